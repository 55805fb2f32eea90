#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vpgkit/alphabet.hpp"
#include "vpgkit/dfa.hpp"
#include "vpgkit/error.hpp"

namespace vpgkit {

using Element = std::uint32_t;

/// Finite group given by its multiplication table, with each letter of an
/// inverse-closed alphabet mapped to an element.
class CayleyTable {
 public:
  CayleyTable() = default;

  /// Throws InvalidGroup unless the table is a group and letter images are
  /// inverse-compatible.
  static CayleyTable make(std::vector<std::string> elements, Element identity, std::vector<std::vector<Element>> product,
                          GroupAlphabet alphabet, std::vector<Element> generator_map) {
    CayleyTable t;
    const std::size_t n = elements.size();
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidGroup, what); };
    if (n == 0) fail("no elements");
    if (identity >= n) fail("identity out of range");
    if (product.size() != n) fail("product table has wrong row count");
    for (const auto& row : product) {
      if (row.size() != n) fail("product table row has wrong length");
      for (Element e : row)
        if (e >= n) fail("product entry out of range");
    }
    for (Element a = 0; a < n; ++a)
      if (product[identity][a] != a || product[a][identity] != a) fail("identity law fails at '" + elements[a] + "'");
    for (Element a = 0; a < n; ++a)
      for (Element b = 0; b < n; ++b)
        for (Element c = 0; c < n; ++c)
          if (product[product[a][b]][c] != product[a][product[b][c]])
            fail("associativity fails at (" + elements[a] + "," + elements[b] + "," + elements[c] + ")");
    for (Element a = 0; a < n; ++a) {
      bool has_inverse = false;
      for (Element b = 0; b < n && !has_inverse; ++b) has_inverse = product[a][b] == identity;
      if (!has_inverse) fail("'" + elements[a] + "' has no inverse");
    }
    if (generator_map.size() != alphabet.size()) fail("generator map must cover every letter");
    for (Letter l : alphabet.base().letters()) {
      Element e = generator_map[index(l)];
      if (e >= n) fail("generator image out of range");
      if (product[e][generator_map[index(alphabet.inverse(l))]] != identity)
        fail("images of '" + alphabet.base().name(l) + "' and its inverse are not inverse elements");
    }
    t.elements_ = std::move(elements);
    t.identity_ = identity;
    t.product_ = std::move(product);
    t.alphabet_ = std::move(alphabet);
    t.generators_ = std::move(generator_map);
    return t;
  }

  std::size_t size() const noexcept { return elements_.size(); }
  Element identity() const noexcept { return identity_; }
  const std::vector<std::string>& elements() const noexcept { return elements_; }
  const std::vector<std::vector<Element>>& table() const noexcept { return product_; }
  const GroupAlphabet& alphabet() const noexcept { return alphabet_; }
  Element multiply(Element a, Element b) const { return product_.at(a).at(b); }
  Element image(Letter l) const { return generators_.at(index(l)); }

  Element evaluate(const Word& w) const {
    alphabet_.base().check(w);
    Element e = identity_;
    for (Letter l : w) e = product_[e][generators_[index(l)]];
    return e;
  }

  std::size_t order(Element e) const {
    std::size_t k = 1;
    for (Element p = e; p != identity_; p = product_[p][e]) ++k;
    return k;
  }

 private:
  std::vector<std::string> elements_;
  Element identity_ = 0;
  std::vector<std::vector<Element>> product_;
  GroupAlphabet alphabet_;
  std::vector<Element> generators_;
};

/// ℤ/n on letters x, X (X = x⁻¹); x ↦ 1. Letters default to internal.
inline CayleyTable cyclic_group(std::size_t n, const GroupAlphabet& alphabet, const std::string& generator = "x") {
  std::vector<std::string> names;
  std::vector<std::vector<Element>> table(n, std::vector<Element>(n));
  for (std::size_t i = 0; i < n; ++i) {
    names.push_back(std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) table[i][j] = static_cast<Element>((i + j) % n);
  }
  Letter x = alphabet.base().letter(generator);
  std::vector<Element> gens(alphabet.size(), 0);
  gens[index(x)] = static_cast<Element>(1 % n);
  gens[index(alphabet.inverse(x))] = static_cast<Element>((n - 1) % n);
  return CayleyTable::make(std::move(names), 0, std::move(table), alphabet, std::move(gens));
}

/// Symmetric group on {0, 1, 2}; elements are permutations in lexicographic
/// order of their images, composition applies the left factor first.
/// `images` maps letter names to permutations written as image strings.
inline CayleyTable symmetric_group_3(const GroupAlphabet& alphabet, const std::map<std::string, std::string>& images) {
  std::vector<std::array<int, 3>> perms;
  std::array<int, 3> p{0, 1, 2};
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  auto find = [&](const std::array<int, 3>& q) {
    return static_cast<Element>(std::find(perms.begin(), perms.end(), q) - perms.begin());
  };
  std::vector<std::string> names;
  for (const auto& q : perms) names.push_back(std::to_string(q[0]) + std::to_string(q[1]) + std::to_string(q[2]));
  std::vector<std::vector<Element>> table(6, std::vector<Element>(6));
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      std::array<int, 3> r{};
      for (int k = 0; k < 3; ++k) r[k] = perms[j][perms[i][k]];
      table[i][j] = find(r);
    }
  std::vector<Element> gens(alphabet.size(), 0);
  for (Letter l : alphabet.base().letters()) {
    auto it = images.find(alphabet.base().name(l));
    if (it == images.end()) continue;
    gens[index(l)] = static_cast<Element>(std::find(names.begin(), names.end(), it->second) - names.begin());
  }
  // inverse letters not listed map to the inverse element
  for (Letter l : alphabet.base().letters())
    if (!images.count(alphabet.base().name(l)) && images.count(alphabet.base().name(alphabet.inverse(l)))) {
      Element e = gens[index(alphabet.inverse(l))];
      for (Element f = 0; f < 6; ++f)
        if (table[e][f] == 0) gens[index(l)] = f;
    }
  return CayleyTable::make(std::move(names), 0, std::move(table), alphabet, std::move(gens));
}

/// States are group elements; start and accept are the identity.
inline Dfa wp_dfa_from_cayley(const CayleyTable& t) {
  const auto& A = t.alphabet().base();
  Dfa d = Dfa::with_states(A, t.size(), t.identity());
  d.accepting[t.identity()] = true;
  for (Element e = 0; e < t.size(); ++e)
    for (Letter l : A.letters()) d.set(e, l, t.multiply(e, t.image(l)));
  return d;
}

// ---------------------------------------------------------------------------
// Coset decomposition of permutation DFAs

using Permutation = std::vector<State>;

/// ∪ N·g_i with N the kernel of the letter action. `group` lists the
/// elements of the finite permutation group (identity first, then in
/// shortlex order of their least representing words); `words[i]` is that
/// least word.
struct CosetUnion {
  std::size_t normal_subgroup_index = 0;
  std::size_t permutation_group_size = 0;
  std::vector<Word> coset_representatives;
  GroupAlphabet alphabet;
  std::vector<Permutation> group;
  std::vector<Word> words;
  std::vector<Permutation> letter_action;
};

inline constexpr std::size_t permutation_group_cap = 100000;

inline CosetUnion to_coset_representation(const Dfa& d, const GroupAlphabet& g,
                                          std::size_t cap = permutation_group_cap) {
  if (!is_permutation_dfa(d, g)) throw Error(ErrorCode::NotPermutationDfa, "some letter does not act as a bijection");
  CosetUnion out;
  out.alphabet = g;
  const std::size_t n = d.num_states;
  for (Letter a : d.alphabet.letters()) {
    Permutation p(n);
    for (State q = 0; q < n; ++q) p[q] = d.next(q, a);
    out.letter_action.push_back(std::move(p));
  }
  Permutation id(n);
  for (State q = 0; q < n; ++q) id[q] = q;
  std::map<Permutation, std::size_t> seen{{id, 0}};
  out.group.push_back(id);
  out.words.push_back({});
  for (std::size_t i = 0; i < out.group.size(); ++i)
    for (Letter a : d.alphabet.letters()) {
      Permutation next(n);
      for (State q = 0; q < n; ++q) next[q] = out.letter_action[index(a)][out.group[i][q]];
      if (seen.count(next)) continue;
      if (out.group.size() >= cap) throw Error(ErrorCode::GroupTooLarge, "permutation group exceeds " + std::to_string(cap));
      seen.emplace(next, out.group.size());
      Word w = out.words[i];
      w.push_back(a);
      out.group.push_back(std::move(next));
      out.words.push_back(std::move(w));
    }
  out.permutation_group_size = out.group.size();
  out.normal_subgroup_index = out.group.size();
  for (std::size_t i = 0; i < out.group.size(); ++i)
    if (d.accepting[out.group[i][d.start]]) out.coset_representatives.push_back(out.words[i]);
  return out;
}

/// DFA of the regular action on the cosets of N, accepting the cosets read
/// by the representatives.
inline Dfa to_dfa(const CosetUnion& c) {
  const auto& A = c.alphabet.base();
  std::map<Permutation, State> id;
  for (std::size_t i = 0; i < c.group.size(); ++i) id.emplace(c.group[i], static_cast<State>(i));
  Dfa d = Dfa::with_states(A, c.group.size(), 0);
  const std::size_t n = c.group.front().size();
  for (std::size_t i = 0; i < c.group.size(); ++i)
    for (Letter a : A.letters()) {
      Permutation next(n);
      for (State q = 0; q < n; ++q) next[q] = c.letter_action[index(a)][c.group[i][q]];
      d.set(static_cast<State>(i), a, id.at(next));
    }
  for (const auto& w : c.coset_representatives) d.accepting[d.run(0, w)] = true;
  return d;
}

// ---------------------------------------------------------------------------
// Symmetric partitions and matched lifts

enum class PartitionViolationKind { TorsionCall, CallInverseNotReturn, ReturnInverseNotCall, TorsionReturn };

constexpr std::string_view to_string(PartitionViolationKind k) {
  switch (k) {
    case PartitionViolationKind::TorsionCall: return "TorsionCall";
    case PartitionViolationKind::CallInverseNotReturn: return "CallInverseNotReturn";
    case PartitionViolationKind::ReturnInverseNotCall: return "ReturnInverseNotCall";
    case PartitionViolationKind::TorsionReturn: return "TorsionReturn";
  }
  return "?";
}

struct PartitionViolation {
  PartitionViolationKind kind;
  Letter letter;
  bool operator==(const PartitionViolation&) const = default;
};

struct SymmetryVerdict {
  bool symmetric = true;
  std::vector<PartitionViolation> violations;
};

/// TorsionReturn is reported alongside the defining violations; it never
/// occurs alone, since a return of finite order forces a violation at its
/// inverse.
inline SymmetryVerdict is_symmetric_partition(const GroupAlphabet& g) {
  SymmetryVerdict v;
  const auto& A = g.base();
  for (Letter l : A.letters()) {
    if (A.is_call(l)) {
      if (g.order(l)) v.violations.push_back({PartitionViolationKind::TorsionCall, l});
      if (!A.is_return(g.inverse(l))) v.violations.push_back({PartitionViolationKind::CallInverseNotReturn, l});
    } else if (A.is_return(l)) {
      if (!A.is_call(g.inverse(l))) v.violations.push_back({PartitionViolationKind::ReturnInverseNotCall, l});
      if (g.order(l)) v.violations.push_back({PartitionViolationKind::TorsionReturn, l});
    }
  }
  v.symmetric = std::none_of(v.violations.begin(), v.violations.end(),
                             [](const auto& x) { return x.kind != PartitionViolationKind::TorsionReturn; });
  return v;
}

enum class MatchSide { mr, mc };

constexpr std::string_view to_string(MatchSide s) { return s == MatchSide::mr ? "MR" : "MC"; }

inline bool lifts_to(PartitionViolationKind k, MatchSide side) {
  switch (k) {
    case PartitionViolationKind::TorsionCall:
    case PartitionViolationKind::CallInverseNotReturn: return side == MatchSide::mr;
    case PartitionViolationKind::ReturnInverseNotCall:
    case PartitionViolationKind::TorsionReturn: return side == MatchSide::mc;
  }
  return false;
}

/// Pads w with a trivial word, n = |w|: x^n x^-n w, z^(k n) w, w y^n y^-n
/// or w z^(k n), depending on the violation. The group image is unchanged.
inline Word lift_to_matched(const GroupAlphabet& g, const Word& w, MatchSide side, const PartitionViolation& violation) {
  g.base().check(w);
  auto verdict = is_symmetric_partition(g);
  if (std::find(verdict.violations.begin(), verdict.violations.end(), violation) == verdict.violations.end())
    throw Error(ErrorCode::SymmetricPartition, "the partition has no " + std::string(to_string(violation.kind)) +
                                                   " violation at '" + g.base().name(violation.letter) + "'");
  if (!lifts_to(violation.kind, side))
    throw Error(ErrorCode::SymmetricPartition,
                std::string(to_string(violation.kind)) + " gives no " + std::string(to_string(side)) + " lift");
  const std::size_t n = w.size();
  const Letter x = violation.letter;
  Word pad;
  switch (violation.kind) {
    case PartitionViolationKind::CallInverseNotReturn:
    case PartitionViolationKind::ReturnInverseNotCall:
      pad = concat(power({x}, n), power({g.inverse(x)}, n));
      break;
    case PartitionViolationKind::TorsionCall:
    case PartitionViolationKind::TorsionReturn:
      pad = power({x}, static_cast<std::size_t>(*g.order(x)) * n);
      break;
  }
  return side == MatchSide::mr ? concat(pad, w) : concat(w, pad);
}

/// First violation enabling the requested side.
inline Word lift_to_matched(const GroupAlphabet& g, const Word& w, MatchSide side) {
  for (const auto& v : is_symmetric_partition(g).violations)
    if (lifts_to(v.kind, side)) return lift_to_matched(g, w, side, v);
  throw Error(ErrorCode::SymmetricPartition, "no violation gives a " + std::string(to_string(side)) + " lift");
}

/// (xy)^k (y^(n-1) x^(m-1))^k and (yx)^k (x^(m-1) y^(n-1))^k.
inline std::pair<Word, Word> wp_witness_family(Letter x, Letter y, std::size_t m, std::size_t n, std::size_t k) {
  if (m < 2 || n < 2 || k < 1) throw Error(ErrorCode::InvalidGroup, "witness family needs m, n >= 2 and k >= 1");
  Word first = concat(power({x, y}, k), power(concat(power({y}, n - 1), power({x}, m - 1)), k));
  Word second = concat(power({y, x}, k), power(concat(power({x}, m - 1), power({y}, n - 1)), k));
  return {first, second};
}

}  // namespace vpgkit
