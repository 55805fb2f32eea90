#include <catch2/catch_amalgamated.hpp>

#include "support/oracles.hpp"

using namespace vpgkit;

namespace {

GroupAlphabet free_ab() { return GroupAlphabet::free({"a", "b"}); }

Word w(const GroupAlphabet& g, std::string_view s) { return parse_word(g, s); }

}  // namespace

TEST_CASE("partitions reject overlap and emptiness", "[alphabet]") {
  auto anbn = make_partitioned_alphabet({"a"}, {}, {"b"});
  CHECK(anbn.is_call(anbn.letter("a")));
  CHECK(anbn.is_return(anbn.letter("b")));

  auto regular = make_partitioned_alphabet({}, {"a", "b"}, {});
  CHECK(regular.letters_of(LetterKind::internal).size() == 2);
  CHECK(regular.letters_of(LetterKind::call).empty());

  try {
    make_partitioned_alphabet({"a"}, {"a"}, {"b"});
    FAIL("overlap accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PartitionOverlap);
  }
  try {
    make_partitioned_alphabet({}, {}, {});
    FAIL("empty alphabet accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyAlphabet);
  }
}

TEST_CASE("letters keep declaration order", "[alphabet]") {
  auto a = make_partitioned_alphabet({"z", "y"}, {"m"}, {"b"});
  CHECK(a.names() == std::vector<std::string>{"z", "y", "m", "b"});
  CHECK(index(a.letter("m")) == 2);
  CHECK_THROWS_AS(a.letter("q"), Error);
}

TEST_CASE("group alphabets pair every letter", "[alphabet]") {
  auto base = make_partitioned_alphabet({"a"}, {"A"}, {});
  auto g = GroupAlphabet::with_case_inverses(base, {{"a", std::nullopt}});
  CHECK(g.inverse(base.letter("a")) == base.letter("A"));
  CHECK(g.inverse(g.inverse(base.letter("a"))) == base.letter("a"));
  CHECK(g.is_positive(base.letter("a")));
  CHECK_FALSE(g.is_positive(base.letter("A")));

  auto lonely = make_partitioned_alphabet({"a"}, {"b"}, {});
  try {
    GroupAlphabet::with_case_inverses(lonely);
    FAIL("unpaired letter accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidInverse);
  }
  auto mismatch = make_partitioned_alphabet({}, {"a", "A"}, {});
  CHECK_THROWS_AS(GroupAlphabet::make(mismatch, {{"a", "A"}}, {{"a", 2}, {"A", 3}}), Error);
  auto g2 = GroupAlphabet::make(mismatch, {{"a", "A"}}, {{"a", 2}});
  CHECK(g2.order(mismatch.letter("A")) == Order{2});
}

TEST_CASE("word syntax", "[alphabet]") {
  auto g = free_ab();
  const auto& A = g.base();
  CHECK(parse_word(A, "").empty());
  CHECK(parse_word(A, "eps").empty());
  CHECK(parse_word(A, "\xCE\xB5").empty());
  CHECK(w(g, "a^-1 b") == w(g, "Ab"));
  CHECK(format_word(A, w(g, "abA")) == "abA");
  CHECK(format_word(A, {}) == "\xCE\xB5");
  CHECK_THROWS_AS(parse_word(A, "abc"), Error);
  CHECK_THROWS_AS(parse_word(A, "a^-1"), Error);

  auto long_names = make_partitioned_alphabet({"open"}, {"x"}, {"close"});
  auto word = parse_word(long_names, "open x close");
  CHECK(word.size() == 3);
  CHECK(format_word(long_names, word) == "open x close");
}

TEST_CASE("classify_word on the anbn partition", "[alphabet]") {
  auto a = make_partitioned_alphabet({"a"}, {}, {"b"});
  auto p = classify_word(a, parse_word(a, "ab"));
  CHECK((p.is_mr && p.is_mc && p.is_wm));
  p = classify_word(a, parse_word(a, "ba"));
  CHECK((!p.is_mr && !p.is_mc && !p.is_wm));
  CHECK(p.unmatched_calls == 1);
  CHECK(p.unmatched_returns == 1);
  p = classify_word(a, parse_word(a, "aab"));
  CHECK((p.is_mr && !p.is_mc && !p.is_wm));
  CHECK(p.unmatched_calls == 1);
  p = classify_word(a, {});
  CHECK((p.is_mr && p.is_mc && p.is_wm));
  CHECK_THROWS_AS(classify_word(a, Word{letter_at(7)}), Error);
}

TEST_CASE("classify_word matches prefix and suffix counting exhaustively", "[alphabet][property]") {
  auto a = make_partitioned_alphabet({"a", "d"}, {"c"}, {"b"});
  for_each_word(a.size(), 8, [&](const Word& u) {
    auto p = classify_word(a, u);
    REQUIRE(p.is_mr == oracle::naive_is_mr(a, u));
    REQUIRE(p.is_mc == oracle::naive_is_mc(a, u));
    REQUIRE(p.is_wm == (p.is_mr && p.is_mc));
    if (p.is_wm) REQUIRE((p.unmatched_calls == 0 && p.unmatched_returns == 0));
    REQUIRE(p.is_mr == (p.unmatched_returns == 0));
    REQUIRE(p.is_mc == (p.unmatched_calls == 0));
    return true;
  });
}

TEST_CASE("free_reduce examples", "[alphabet]") {
  auto g = free_ab();
  CHECK(free_reduce(g, w(g, "aA")).empty());
  CHECK(free_reduce(g, w(g, "aaAbb")) == w(g, "abb"));
  CHECK(free_reduce(g, w(g, "bAaB")).empty());
  CHECK(oracle::naive_reduce(g, w(g, "bAaB")).empty());
  CHECK(is_reduced(g, w(g, "abAB")));
  CHECK_FALSE(is_reduced(g, w(g, "abBA")));
}

TEST_CASE("free_reduce properties", "[alphabet][property]") {
  auto g = free_ab();
  const std::size_t k = g.size();
  for_each_word(k, 8, [&](const Word& u) {
    Word r = free_reduce(g, u);
    REQUIRE(r == oracle::naive_reduce(g, u));
    REQUIRE(free_reduce(g, r) == r);
    REQUIRE(is_reduced(g, r));
    REQUIRE(r.size() % 2 == u.size() % 2);
    return true;
  });
  auto r = oracle::rng(1);
  for (int i = 0; i < 2000; ++i) {
    Word u = oracle::random_word(r, k, oracle::uniform(r, 0, 10));
    REQUIRE(free_reduce(g, free_reduce(g, u)) == free_reduce(g, u));
  }
  auto shorter = words_up_to(k, 4);
  for (const auto& u : shorter)
    for (const auto& v : shorter)
      REQUIRE(free_reduce(g, concat(u, v)) == free_reduce(g, concat(free_reduce(g, u), free_reduce(g, v))));
  for (int i = 0; i < 2000; ++i) {
    Word u = oracle::random_word(r, k, oracle::uniform(r, 0, 6));
    Word v = oracle::random_word(r, k, oracle::uniform(r, 0, 6));
    REQUIRE(free_reduce(g, concat(u, v)) == free_reduce(g, concat(free_reduce(g, u), free_reduce(g, v))));
  }
}

TEST_CASE("torsion_reduce is the free normal form without torsion", "[alphabet]") {
  auto g = free_ab();
  for_each_word(g.size(), 6, [&](const Word& u) {
    REQUIRE(torsion_reduce(g, u) == free_reduce(g, u));
    return true;
  });
  auto base = make_partitioned_alphabet({"z"}, {}, {"Z"});
  auto t = GroupAlphabet::make(base, {{"z", "Z"}}, {{"z", 3}});
  auto z = [&](std::string_view s) { return parse_word(t, s); };
  CHECK(torsion_reduce(t, z("zzz")).empty());
  CHECK(torsion_reduce(t, z("Z")) == z("zz"));
  CHECK(torsion_reduce(t, z("zzzzZZ")) == z("zz"));
}

TEST_CASE("word enumeration", "[alphabet]") {
  auto all = words_up_to(2, 3);
  CHECK(all.size() == 15);
  CHECK(std::is_sorted(all.begin(), all.end(), shortlex_less));
  auto g = free_ab();
  auto reduced = reduced_words_up_to(g, 3);
  CHECK(reduced.size() == 1 + 4 + 12 + 36);
  for (const auto& u : reduced) CHECK(is_reduced(g, u));
}
