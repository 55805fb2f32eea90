#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vpgkit/alphabet.hpp"
#include "vpgkit/error.hpp"
#include "vpgkit/vpa.hpp"

namespace vpgkit {

/// Total membership predicate over the words of an alphabet. Membership must
/// be pure; it may be invoked concurrently.
struct LangOracle {
  PartitionedAlphabet alphabet;
  std::function<bool(const Word&)> member;
  std::string description;

  bool operator()(const Word& w) const { return member(w); }
};

inline LangOracle oracle_from_vpa(const Vpa& v, std::string description = "vpa") {
  auto runner = std::make_shared<DeterministicRunner>(is_deterministic(v) ? v : determinize(v));
  return {v.alphabet(), [runner](const Word& w) { return runner->accepts(w); }, std::move(description)};
}

inline LangOracle oracle_from_words(const PartitionedAlphabet& alpha, const std::vector<Word>& words,
                                    std::string description = "finite") {
  for (const auto& w : words) alpha.check(w);
  auto set = std::make_shared<std::set<Word>>(words.begin(), words.end());
  return {alpha, [set](const Word& w) { return set->count(w) > 0; }, std::move(description)};
}

inline LangOracle oracle_all(const PartitionedAlphabet& alpha) {
  return {alpha, [](const Word&) { return true; }, "all"};
}

/// WP(ℤ) over {x, x⁻¹}: exponent sum of x is zero. Other letters are ignored.
inline LangOracle oracle_exponent_sum_zero(const GroupAlphabet& g, Letter x) {
  Letter xi = g.inverse(x);
  return {g.base(),
          [x, xi](const Word& w) {
            long long s = 0;
            for (Letter l : w) s += (l == x) - (l == xi);
            return s == 0;
          },
          "exponent-sum-zero"};
}

/// Word problem of the free group: the word freely reduces to ε.
inline LangOracle oracle_free_word_problem(const GroupAlphabet& g) {
  return {g.base(), [g](const Word& w) { return free_reduce(g, w).empty(); }, "free-word-problem"};
}

/// {b_1^{k_1 n} b_2^{k_2 n} ... : n ∈ ℕ} for blocks (b_i, k_i); a block with
/// k = 0 is a literal that occurs once.
struct PatternBlock {
  Word word;
  std::size_t multiplier;
};

inline bool matches_pattern(const std::vector<PatternBlock>& blocks, const Word& w) {
  std::size_t fixed = 0, per_n = 0;
  for (const auto& b : blocks) {
    if (b.multiplier)
      per_n += b.word.size() * b.multiplier;
    else
      fixed += b.word.size();
  }
  if (w.size() < fixed) return false;
  if (per_n == 0) {
    if (w.size() != fixed) return false;
  } else if ((w.size() - fixed) % per_n != 0) {
    return false;
  }
  const std::size_t n = per_n ? (w.size() - fixed) / per_n : 0;
  std::size_t pos = 0;
  for (const auto& b : blocks) {
    const std::size_t reps = b.multiplier ? b.multiplier * n : 1;
    for (std::size_t r = 0; r < reps; ++r)
      for (Letter l : b.word)
        if (w[pos++] != l) return false;
  }
  return true;
}

/// Members of the pattern language of length at most `max_len`, by increasing n.
inline std::vector<Word> pattern_words(const std::vector<PatternBlock>& blocks, std::size_t max_len) {
  std::vector<Word> out;
  for (std::size_t n = 0;; ++n) {
    Word w;
    for (const auto& b : blocks) {
      const std::size_t reps = b.multiplier ? b.multiplier * n : 1;
      for (std::size_t r = 0; r < reps && w.size() <= max_len; ++r) w.insert(w.end(), b.word.begin(), b.word.end());
    }
    if (w.size() > max_len) break;
    if (!out.empty() && out.back() == w) break;
    out.push_back(std::move(w));
  }
  return out;
}

inline LangOracle oracle_pattern(const PartitionedAlphabet& alpha, std::vector<PatternBlock> blocks,
                                 std::string description = "pattern") {
  for (const auto& b : blocks) alpha.check(b.word);
  auto shared = std::make_shared<std::vector<PatternBlock>>(std::move(blocks));
  return {alpha, [shared](const Word& w) { return matches_pattern(*shared, w); }, std::move(description)};
}

// ---------------------------------------------------------------------------

enum class CongruenceKind { equiv, sim0, approx };

constexpr std::string_view to_string(CongruenceKind k) {
  switch (k) {
    case CongruenceKind::equiv: return "equiv";
    case CongruenceKind::sim0: return "sim0";
    case CongruenceKind::approx: return "approx";
  }
  return "?";
}

inline bool admissible(const PartitionedAlphabet& alpha, CongruenceKind k, const Word& w) {
  auto p = classify_word(alpha, w);
  switch (k) {
    case CongruenceKind::equiv: return true;
    case CongruenceKind::sim0: return p.is_mc;
    case CongruenceKind::approx: return p.is_wm;
  }
  return false;
}

/// Test context: the word tested is left·u·right. Right contexts have an
/// empty left part.
struct Context {
  Word left;
  Word right;
  bool operator==(const Context&) const = default;
};

/// Contexts of total length ≤ bound in test order: by total length, then by
/// length of the left part, then lexicographically (left, then right).
inline std::vector<Context> contexts(const PartitionedAlphabet& alpha, CongruenceKind k, std::size_t bound) {
  std::vector<Context> out;
  const std::size_t n = alpha.size();
  if (k != CongruenceKind::approx) {
    for_each_word(n, bound, [&](const Word& w) {
      if (k == CongruenceKind::sim0 || classify_word(alpha, w).is_mr) out.push_back({{}, w});
      return true;
    });
    return out;
  }
  std::vector<std::vector<Word>> by_len(bound + 1);
  for_each_word(n, bound, [&](const Word& w) {
    by_len[w.size()].push_back(w);
    return true;
  });
  for (std::size_t total = 0; total <= bound; ++total)
    for (std::size_t l = 0; l <= total; ++l)
      for (const auto& left : by_len[l])
        for (const auto& right : by_len[total - l]) out.push_back({left, right});
  return out;
}

inline bool test_context(const LangOracle& L, const Context& c, const Word& u) {
  Word w;
  w.reserve(c.left.size() + u.size() + c.right.size());
  w.insert(w.end(), c.left.begin(), c.left.end());
  w.insert(w.end(), u.begin(), u.end());
  w.insert(w.end(), c.right.begin(), c.right.end());
  return L(w);
}

struct CongruenceTable {
  CongruenceKind kind;
  std::size_t word_bound = 0;
  std::size_t context_bound = 0;
  /// Classes ordered by their shortlex-least member; members in shortlex order.
  std::vector<std::vector<Word>> classes;
  /// (i, j) with i < j → first separating context. Filled when the class
  /// count is at most `witness_limit`.
  std::map<std::pair<std::size_t, std::size_t>, Context> witnesses;

  std::size_t count() const noexcept { return classes.size(); }
  std::size_t class_of(const Word& w) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (std::binary_search(classes[i].begin(), classes[i].end(), w, shortlex_less)) return i;
    throw Error(ErrorCode::InadmissibleWord, "word not in the table");
  }
};

inline constexpr std::size_t witness_limit = 256;

/// Partitions admissible words of length ≤ word_bound by their membership
/// signature over all admissible contexts of length ≤ context_bound. The
/// class count is a lower bound on the index.
inline CongruenceTable explore_classes(const LangOracle& L, CongruenceKind kind, std::size_t word_bound,
                                       std::size_t context_bound) {
  const auto& A = L.alphabet;
  const auto ctx = contexts(A, kind, context_bound);
  std::vector<Word> words;
  for_each_word(A.size(), word_bound, [&](const Word& w) {
    if (admissible(A, kind, w)) words.push_back(w);
    return true;
  });
  std::map<std::vector<bool>, std::size_t> ids;
  std::vector<std::vector<bool>> sigs;
  CongruenceTable t{kind, word_bound, context_bound, {}, {}};
  for (const auto& u : words) {
    std::vector<bool> sig(ctx.size());
    for (std::size_t i = 0; i < ctx.size(); ++i) sig[i] = test_context(L, ctx[i], u);
    auto [it, fresh] = ids.emplace(sig, t.classes.size());
    if (fresh) {
      t.classes.emplace_back();
      sigs.push_back(std::move(sig));
    }
    t.classes[it->second].push_back(u);
  }
  if (t.classes.size() <= witness_limit)
    for (std::size_t i = 0; i < sigs.size(); ++i)
      for (std::size_t j = i + 1; j < sigs.size(); ++j)
        for (std::size_t c = 0; c < ctx.size(); ++c)
          if (sigs[i][c] != sigs[j][c]) {
            t.witnesses.emplace(std::make_pair(i, j), ctx[c]);
            break;
          }
  return t;
}

/// First admissible context of length ≤ bound separating u1 from u2.
inline std::optional<Context> distinguish(const LangOracle& L, CongruenceKind kind, const Word& u1, const Word& u2,
                                          std::size_t context_bound) {
  const auto& A = L.alphabet;
  for (const Word* u : {&u1, &u2})
    if (!admissible(A, kind, *u))
      throw Error(ErrorCode::InadmissibleWord,
                  "'" + format_word(A, *u) + "' is not admissible for " + std::string(to_string(kind)));
  if (u1 == u2) return std::nullopt;
  for (const auto& c : contexts(A, kind, context_bound))
    if (test_context(L, c, u1) != test_context(L, c, u2)) return c;
  return std::nullopt;
}

/// Class counts for word bounds 1..max_bound, each with context bound
/// word bound + 2.
inline std::vector<std::size_t> growth_profile(const LangOracle& L, CongruenceKind kind, std::size_t max_bound) {
  std::vector<std::size_t> out;
  for (std::size_t b = 1; b <= max_bound; ++b) out.push_back(explore_classes(L, kind, b, b + 2).count());
  return out;
}

}  // namespace vpgkit
