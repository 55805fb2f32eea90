#include <catch2/catch_amalgamated.hpp>

#include "support/oracles.hpp"

using namespace vpgkit;

namespace {

const std::string data = VPGKIT_DATA_DIR;

CayleyTable table(const std::string& file) { return cayley_from_json(load_json_file(data + "/" + file)); }

GroupAlphabet group_alphabet(const std::string& file) {
  return alphabet_from_json(load_json_file(data + "/" + file)).require_group();
}

/// Letter images as permutations of {0, 1, 2} when elements are named by image strings.
std::vector<oracle::Perm> s3_images(const CayleyTable& t) {
  std::vector<oracle::Perm> out;
  for (Letter l : t.alphabet().base().letters()) {
    const auto& name = t.elements()[t.image(l)];
    out.push_back({static_cast<std::uint32_t>(name[0] - '0'), static_cast<std::uint32_t>(name[1] - '0'),
                   static_cast<std::uint32_t>(name[2] - '0')});
  }
  return out;
}

void check_round_trip(const Dfa& d, const GroupAlphabet& g, std::size_t len) {
  auto c = to_coset_representation(d, g);
  auto back = to_dfa(c);
  REQUIRE(is_permutation_dfa(back, g));
  for (const auto& rep : c.coset_representatives) REQUIRE(d.accepts(rep));
  for_each_word(g.size(), len, [&](const Word& w) {
    REQUIRE(back.accepts(w) == d.accepts(w));
    return true;
  });
}

}  // namespace

TEST_CASE("Cayley tables and their word-problem DFAs", "[recognisable]") {
  for (const auto* file : {"s3.json", "s3_rotation.json"}) {
    auto t = table(file);
    auto images = s3_images(t);
    auto d = wp_dfa_from_cayley(t);
    CHECK(d.num_states == 6);
    CHECK(is_permutation_dfa(d, t.alphabet()));
    for_each_word(t.alphabet().size(), 8, [&](const Word& w) {
      const bool trivial = oracle::evaluate_perm(images, w, 3) == oracle::identity_perm(3);
      REQUIRE(d.accepts(w) == trivial);
      REQUIRE((t.evaluate(w) == t.identity()) == trivial);
      return true;
    });
  }
  auto z3 = table("z3.json");
  const auto& A = z3.alphabet().base();
  CHECK(z3.order(z3.image(A.letter("x"))) == 3);
  CHECK(z3.evaluate(parse_word(A, "xxX")) == z3.image(A.letter("x")));
  auto z6 = table("z6.json");
  CHECK(z6.order(z6.image(z6.alphabet().base().letter("u"))) == 2);
  CHECK(z6.order(z6.image(z6.alphabet().base().letter("v"))) == 3);
}

TEST_CASE("built-in groups", "[recognisable]") {
  auto zg = group_alphabet("z3_alphabet.json");
  auto c = cyclic_group(3, zg);
  auto d = wp_dfa_from_cayley(c);
  for_each_word(zg.size(), 7, [&](const Word& w) {
    long sum = 0;
    for (Letter l : w) sum += zg.base().name(l) == "x" ? 1 : -1;
    REQUIRE(d.accepts(w) == (((sum % 3) + 3) % 3 == 0));
    return true;
  });
  auto sg = group_alphabet("s3_alphabet.json");
  auto s = symmetric_group_3(sg, {{"s", "102"}, {"t", "021"}});
  auto file = table("s3.json");
  for_each_word(sg.size(), 6, [&](const Word& w) {
    REQUIRE((s.evaluate(w) == s.identity()) == (file.evaluate(w) == file.identity()));
    return true;
  });
}

TEST_CASE("invalid groups are rejected", "[recognisable]") {
  auto zg = group_alphabet("z2_alphabet.json");
  auto expect_invalid = [](auto&& make) {
    try {
      make();
      FAIL("invalid group accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidGroup);
    }
  };
  expect_invalid([&] { CayleyTable::make({"1", "x"}, 0, {{0, 1}, {1, 1}}, zg, {1, 1}); });
  expect_invalid([&] { CayleyTable::make({"1", "x"}, 0, {{0, 1}}, zg, {1, 1}); });
  expect_invalid([&] { CayleyTable::make({"1", "x"}, 1, {{0, 1}, {1, 0}}, zg, {1, 1}); });
  expect_invalid([&] { CayleyTable::make({"0", "1", "2"}, 0, {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}}, zg, {1, 1}); });
  expect_invalid([&] { CayleyTable::make({"1", "x"}, 0, {{0, 1}, {1, 0}}, zg, {1}); });
  expect_invalid([] { wp_witness_family(Letter{}, Letter{}, 1, 3, 1); });
}

TEST_CASE("coset representations", "[recognisable]") {
  auto z2 = table("z2.json");
  auto c = to_coset_representation(wp_dfa_from_cayley(z2), z2.alphabet());
  CHECK(c.normal_subgroup_index == 2);
  CHECK(c.coset_representatives == std::vector<Word>{Word{}});
  auto s3 = table("s3.json");
  auto cs = to_coset_representation(wp_dfa_from_cayley(s3), s3.alphabet());
  CHECK(cs.normal_subgroup_index == 6);
  CHECK(cs.permutation_group_size == 6);
  CHECK(cs.words.size() == 6);
  for (std::size_t i = 1; i < cs.words.size(); ++i) CHECK_FALSE(shortlex_less(cs.words[i], cs.words[i - 1]));

  auto odd = dfa_from_json(load_json_file(data + "/odd_a.json"));
  auto F = oracle::free_ab();
  auto co = to_coset_representation(odd, F);
  CHECK(co.normal_subgroup_index == 2);
  REQUIRE(co.coset_representatives.size() == 1);
  CHECK(format_word(F.base(), co.coset_representatives[0]) == "a");

  Dfa broken = Dfa::with_states(F.base(), 2, 0);
  for (Letter l : F.base().letters()) broken.set(0, l, 1), broken.set(1, l, 1);
  try {
    to_coset_representation(broken, F);
    FAIL("non-permutation DFA accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPermutationDfa);
  }
  CHECK_THROWS_AS(to_coset_representation(wp_dfa_from_cayley(s3), s3.alphabet(), 3), Error);
}

TEST_CASE("coset round trips", "[recognisable][property]") {
  for (const auto* file : {"z2.json", "z3.json", "s3.json", "s3_rotation.json", "z6.json"}) {
    auto t = table(file);
    auto d = wp_dfa_from_cayley(t);
    check_round_trip(d, t.alphabet(), 6);
    // every union of cosets, not only the trivial one
    for (std::size_t mask = 1; mask < (1u << t.size()); mask += 3) {
      Dfa e = d;
      for (std::size_t s = 0; s < t.size(); ++s) e.accepting[s] = (mask >> s) & 1;
      check_round_trip(e, t.alphabet(), 5);
    }
  }
  auto F = oracle::free_ab();
  auto r = oracle::rng(41);
  int found = 0;
  for (int i = 0; i < 300 && found < 10; ++i) {
    auto graph = build_core_graph(F, oracle::random_generators(r, F, 4, 4));
    if (!index(graph).finite) continue;
    ++found;
    check_round_trip(preimage_dfa(graph), F, 6);
  }
  CHECK(found > 0);
}

TEST_CASE("symmetric partitions", "[recognisable]") {
  CHECK(is_symmetric_partition(group_alphabet("wpz_symmetric.json")).symmetric);
  CHECK(is_symmetric_partition(oracle::free_ab()).symmetric);
  auto side = is_symmetric_partition(group_alphabet("call_internal_inverse.json"));
  CHECK_FALSE(side.symmetric);
  // x is a call with internal inverse; r and R are returns inverse to each other
  REQUIRE(side.violations.size() == 3);
  CHECK(side.violations[0] == PartitionViolation{PartitionViolationKind::CallInverseNotReturn, letter_at(0)});
  CHECK(side.violations[1].kind == PartitionViolationKind::ReturnInverseNotCall);
  CHECK(side.violations[2].kind == PartitionViolationKind::ReturnInverseNotCall);
  auto torsion = is_symmetric_partition(group_alphabet("torsion_call.json"));
  CHECK_FALSE(torsion.symmetric);
  std::set<PartitionViolationKind> kinds;
  for (const auto& v : torsion.violations) kinds.insert(v.kind);
  CHECK(kinds == std::set<PartitionViolationKind>{PartitionViolationKind::TorsionCall, PartitionViolationKind::TorsionReturn});
  auto flip = make_partitioned_alphabet({}, {"x"}, {"X"});
  auto ret = is_symmetric_partition(GroupAlphabet::make(flip, {{"x", "X"}}, {}));
  REQUIRE(ret.violations.size() == 1);
  CHECK(ret.violations[0].kind == PartitionViolationKind::ReturnInverseNotCall);
}

TEST_CASE("lift examples", "[recognisable]") {
  auto side = group_alphabet("call_internal_inverse.json");
  auto w = [&](std::string_view s) { return parse_word(side, s); };
  CHECK(lift_to_matched(side, w("x X r"), MatchSide::mr) == w("xxxXXXxXr"));
  CHECK(lift_to_matched(side, w("x X r"), MatchSide::mc) == w("xXrrrrRRR"));
  auto torsion = group_alphabet("torsion_call.json");
  CHECK(lift_to_matched(torsion, parse_word(torsion, "Z"), MatchSide::mr) == parse_word(torsion, "zzzZ"));
  CHECK(lift_to_matched(torsion, parse_word(torsion, "z"), MatchSide::mc) == parse_word(torsion, "zZZZ"));
  try {
    lift_to_matched(group_alphabet("wpz_symmetric.json"), {}, MatchSide::mr);
    FAIL("symmetric partition lifted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SymmetricPartition);
  }
}

TEST_CASE("lifts are matched and keep the group element", "[recognisable][property]") {
  auto r = oracle::rng(42);
  for (const auto* file : {"call_internal_inverse.json", "torsion_call.json"}) {
    auto g = group_alphabet(file);
    for (const auto& v : is_symmetric_partition(g).violations)
      for (MatchSide side : {MatchSide::mr, MatchSide::mc}) {
        if (!lifts_to(v.kind, side)) {
          CHECK_THROWS_AS(lift_to_matched(g, {}, side, v), Error);
          continue;
        }
        for (int i = 0; i < 100; ++i) {
          Word w = oracle::random_word(r, g.size(), oracle::uniform(r, 0, 9));
          Word out = lift_to_matched(g, w, side, v);
          auto p = classify_word(g.base(), out);
          REQUIRE((side == MatchSide::mr ? p.is_mr : p.is_mc));
          if (g.order(v.letter)) {
            // ⟨z | z³⟩: the image is the exponent sum mod 3
            auto sum = [&](const Word& u) {
              long e = 0;
              for (Letter l : u) e += g.is_positive(l) ? 1 : 2;
              return e % 3;
            };
            REQUIRE(sum(out) == sum(w));
          } else {
            REQUIRE(oracle::naive_reduce(g, out) == oracle::naive_reduce(g, w));
          }
        }
      }
  }
}

TEST_CASE("witness families evaluate to the identity", "[recognisable]") {
  for (auto [file, x, y] : {std::tuple{"s3.json", "s", "t"}, std::tuple{"s3_rotation.json", "s", "r"},
                            std::tuple{"z6.json", "u", "v"}}) {
    auto t = table(file);
    const auto& A = t.alphabet().base();
    Letter lx = A.letter(x), ly = A.letter(y);
    const std::size_t m = t.order(t.image(lx)), n = t.order(t.image(ly));
    for (std::size_t k = 1; k <= 4; ++k) {
      auto [u, v] = wp_witness_family(lx, ly, m, n, k);
      CHECK(u.size() == 2 * k + k * (m + n - 2));
      CHECK(t.evaluate(u) == t.identity());
      CHECK(t.evaluate(v) == t.identity());
    }
  }
}
