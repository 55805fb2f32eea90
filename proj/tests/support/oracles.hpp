#pragma once

// Independent reference implementations used as test oracles. None of these
// call the library's simulation, reduction or folding code.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vpgkit/vpgkit.hpp"

namespace oracle {

using namespace vpgkit;

// ---- randomness ------------------------------------------------------------

/// Seed for randomized tests: VPGKIT_SEED when set, else a fixed default.
inline std::uint64_t seed() {
  if (const char* s = std::getenv("VPGKIT_SEED")) return std::strtoull(s, nullptr, 10);
  return 20240611;
}

inline std::mt19937_64 rng(std::uint64_t salt = 0) { return std::mt19937_64(seed() ^ (salt * 0x9E3779B97F4A7C15ull)); }

inline std::size_t uniform(std::mt19937_64& r, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(r);
}

inline Word random_word(std::mt19937_64& r, std::size_t letters, std::size_t len) {
  Word w;
  for (std::size_t i = 0; i < len; ++i) w.push_back(letter_at(uniform(r, 0, letters - 1)));
  return w;
}

// ---- words -----------------------------------------------------------------

/// Rescans from the start after every deletion.
inline Word naive_reduce(const GroupAlphabet& g, Word w) {
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
      if (w[i + 1] == g.inverse(w[i])) {
        w.erase(w.begin() + static_cast<std::ptrdiff_t>(i), w.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        changed = true;
        break;
      }
  }
  return w;
}

inline bool naive_is_mr(const PartitionedAlphabet& a, const Word& w) {
  for (std::size_t n = 0; n <= w.size(); ++n) {
    long calls = 0, rets = 0;
    for (std::size_t i = 0; i < n; ++i) calls += a.is_call(w[i]), rets += a.is_return(w[i]);
    if (rets > calls) return false;
  }
  return true;
}

inline bool naive_is_mc(const PartitionedAlphabet& a, const Word& w) {
  for (std::size_t n = 0; n <= w.size(); ++n) {
    long calls = 0, rets = 0;
    for (std::size_t i = n; i < w.size(); ++i) calls += a.is_call(w[i]), rets += a.is_return(w[i]);
    if (calls > rets) return false;
  }
  return true;
}

/// Shortlex rank of w among all words over `k` letters.
inline std::size_t rank(const Word& w, std::size_t k) {
  std::size_t offset = 0, p = 1;
  for (std::size_t l = 0; l < w.size(); ++l) offset += p, p *= k;
  std::size_t v = 0;
  for (Letter l : w) v = v * k + index(l);
  return offset + v;
}

inline std::size_t count_words(std::size_t k, std::size_t max_len) {
  std::size_t total = 0, p = 1;
  for (std::size_t l = 0; l <= max_len; ++l) total += p, p *= k;
  return total;
}

// ---- VPA semantics ---------------------------------------------------------

/// Configuration sets with explicit stacks; ⊥ is implicit below `stack`.
struct NaiveConfig {
  State state;
  std::vector<StackSymbol> stack;
  auto operator<=>(const NaiveConfig&) const = default;
};

inline std::set<NaiveConfig> naive_start(const Vpa& v) {
  std::set<NaiveConfig> out;
  for (State q : v.initials()) out.insert({q, {}});
  return out;
}

inline std::set<NaiveConfig> naive_step(const Vpa& v, const std::set<NaiveConfig>& cur, Letter a) {
  std::set<NaiveConfig> out;
  const LetterKind k = v.alphabet().kind(a);
  for (const auto& c : cur) {
    if (k == LetterKind::internal) {
      for (const auto& r : v.internal_rules())
        if (r.from == c.state && r.letter == a) out.insert({r.to, c.stack});
    } else if (k == LetterKind::call) {
      for (const auto& r : v.call_rules())
        if (r.from == c.state && r.letter == a) {
          auto s = c.stack;
          s.push_back(r.push);
          out.insert({r.to, std::move(s)});
        }
    } else {
      const StackSymbol top = c.stack.empty() ? bottom : c.stack.back();
      for (const auto& r : v.return_rules())
        if (r.from == c.state && r.letter == a && r.pop == top) {
          auto s = c.stack;
          if (!s.empty()) s.pop_back();
          out.insert({r.to, std::move(s)});
        }
    }
  }
  return out;
}

inline bool naive_accepting(const Vpa& v, const std::set<NaiveConfig>& cs) {
  return std::any_of(cs.begin(), cs.end(), [&](const NaiveConfig& c) { return v.is_accepting(c.state); });
}

inline bool naive_accepts(const Vpa& v, const Word& w) {
  auto cs = naive_start(v);
  for (Letter a : w) cs = naive_step(v, cs, a);
  return naive_accepting(v, cs);
}

/// Membership of every word of length ≤ max_len, indexed by shortlex rank.
inline std::vector<char> membership_table(const Vpa& v, std::size_t max_len) {
  const std::size_t k = v.alphabet().size();
  std::vector<char> table(count_words(k, max_len), 0);
  Word w;
  std::function<void(const std::set<NaiveConfig>&)> walk = [&](const std::set<NaiveConfig>& cs) {
    table[rank(w, k)] = naive_accepting(v, cs);
    if (cs.empty() || w.size() == max_len) return;
    for (std::size_t i = 0; i < k; ++i) {
      w.push_back(letter_at(i));
      walk(naive_step(v, cs, letter_at(i)));
      w.pop_back();
    }
  };
  walk(naive_start(v));
  return table;
}

/// Words of length ≤ max_len accepted, enumerated through the naive semantics.
inline std::vector<Word> naive_language(const Vpa& v, std::size_t max_len) {
  std::vector<Word> out;
  for (const auto& w : words_up_to(v.alphabet().size(), max_len))
    if (naive_accepts(v, w)) out.push_back(w);
  return out;
}

// ---- fixtures --------------------------------------------------------------

/// Rule lists by name: "p a q X" (call pushing X), "p c q" (internal),
/// "p b q X" (return popping X; "_" pops ⊥). Kinds come from the alphabet.
inline Vpa make_vpa(const PartitionedAlphabet& a, const std::vector<std::string>& states,
                    const std::vector<std::string>& initials, const std::vector<std::string>& accepts,
                    const std::vector<std::string>& stack, const std::vector<std::string>& rules) {
  VpaDescription d;
  d.alphabet = a;
  d.states = states;
  d.initials = initials;
  d.accepts = accepts;
  d.stack_symbols = stack;
  d.bottom_name = "_";
  for (const auto& r : rules) {
    std::vector<std::string> t;
    std::string cur;
    for (char c : r + " ") {
      if (c == ' ') {
        if (!cur.empty()) t.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    TransitionSpec s{t.at(0), t.at(1), t.at(2), std::nullopt, std::nullopt};
    const LetterKind k = a.kind(a.letter(t[1]));
    if (k == LetterKind::call) s.push = t.at(3);
    if (k == LetterKind::ret) s.pop = t.at(3);
    d.transitions.push_back(s);
  }
  return Vpa::from_description(d);
}

/// calls {a}, returns {b}.
inline PartitionedAlphabet ab_calls() { return make_partitioned_alphabet({"a"}, {}, {"b"}); }

/// {aⁿbⁿ : n ≥ 0}; `a` must contain a call "a" and a return "b".
inline Vpa anbn(const PartitionedAlphabet& a = ab_calls()) {
  return make_vpa(a, {"s", "p", "m", "r"}, {"s"}, {"s", "r"}, {"A", "$"},
                  {"s a p A", "p a p $", "p b m $", "m b m $", "p b r A", "m b r A"});
}

/// calls {a}, internals {A, B}, returns {b}.
inline PartitionedAlphabet cancelling_alphabet() { return make_partitioned_alphabet({"a"}, {"A", "B"}, {"b"}); }

inline bool cancelling_member(const PartitionedAlphabet& fa, const Word& w) {
  const std::string s = format_word(fa, w);
  if (s == "ε") return true;
  std::size_t n = 0, i = 0;
  while (s.compare(i, 3, "aaA") == 0) i += 3, ++n;
  if (n == 0) return false;
  return s.substr(i) == std::string(2 * n, 'b');
}

/// Is w a prefix of some member of {(aaA)ⁿb²ⁿ}?
inline bool cancelling_prefix(const PartitionedAlphabet& fa, const Word& w) {
  const std::string s = format_word(fa, w);
  if (s == "ε") return true;
  std::size_t i = 0, n = 0;
  while (i + 3 <= s.size() && s.compare(i, 3, "aaA") == 0) i += 3, ++n;
  const std::string rest = s.substr(i);
  if (rest.empty()) return true;
  if (rest == "a" || rest == "aa") return true;
  if (rest.find_first_not_of('b') != std::string::npos) return false;
  return n > 0 && rest.size() <= 2 * n;
}

/// Random automaton: each possible rule is present with probability
/// `density`; state 0 is initial, each state accepting with probability 1/3.
inline Vpa random_vpa(std::mt19937_64& r, const PartitionedAlphabet& a, std::size_t states, std::size_t symbols,
                      double density) {
  std::bernoulli_distribution keep(density), accept(1.0 / 3);
  std::vector<CallRule> calls;
  std::vector<InternalRule> internals;
  std::vector<ReturnRule> returns;
  for (State p = 0; p < states; ++p)
    for (Letter l : a.letters())
      for (State q = 0; q < states; ++q)
        switch (a.kind(l)) {
          case LetterKind::call:
            for (StackSymbol g = 1; g < symbols; ++g)
              if (keep(r)) calls.push_back({p, l, q, g});
            break;
          case LetterKind::internal:
            if (keep(r)) internals.push_back({p, l, q});
            break;
          case LetterKind::ret:
            for (StackSymbol g = 0; g < symbols; ++g)
              if (keep(r)) returns.push_back({p, l, g, q});
            break;
        }
  std::vector<State> acc;
  for (State q = 0; q < states; ++q)
    if (accept(r)) acc.push_back(q);
  return Vpa(a, states, symbols, {0}, acc, calls, internals, returns);
}

// ---- groups ----------------------------------------------------------------

/// Permutations of {0..n-1} composed as "apply p, then q".
using Perm = std::vector<std::uint32_t>;

inline Perm compose(const Perm& p, const Perm& q) {
  Perm r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[i] = q[p[i]];
  return r;
}

inline Perm identity_perm(std::size_t n) {
  Perm p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
  return p;
}

/// Evaluates a word letter by letter on explicit permutations.
inline Perm evaluate_perm(const std::vector<Perm>& images, const Word& w, std::size_t n) {
  Perm p = identity_perm(n);
  for (Letter l : w) p = compose(p, images.at(index(l)));
  return p;
}

/// Naive Stallings folding: merge any two same-label edges at a vertex and
/// restart until none remain. The base stays vertex 0; vertex ids are not
/// compacted.
struct NaiveGraph {
  std::size_t vertices = 0;
  std::vector<std::tuple<std::size_t, Letter, std::size_t>> edges;  // positive labels
};

inline NaiveGraph naive_fold(const GroupAlphabet& g, const std::vector<Word>& gens) {
  NaiveGraph G;
  G.vertices = 1;
  for (const auto& raw : gens) {
    Word w = naive_reduce(g, raw);
    if (w.empty()) continue;
    std::size_t cur = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      std::size_t next = i + 1 == w.size() ? 0 : G.vertices++;
      if (g.is_positive(w[i]))
        G.edges.emplace_back(cur, w[i], next);
      else
        G.edges.emplace_back(next, g.inverse(w[i]), cur);
      cur = next;
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    std::sort(G.edges.begin(), G.edges.end());
    G.edges.erase(std::unique(G.edges.begin(), G.edges.end()), G.edges.end());
    for (std::size_t i = 0; i < G.edges.size() && !changed; ++i)
      for (std::size_t j = i + 1; j < G.edges.size() && !changed; ++j) {
        auto [s1, l1, t1] = G.edges[i];
        auto [s2, l2, t2] = G.edges[j];
        if (l1 != l2) continue;
        std::size_t keep = 0, drop = 0;
        if (s1 == s2 && t1 != t2) keep = std::min(t1, t2), drop = std::max(t1, t2);
        else if (t1 == t2 && s1 != s2) keep = std::min(s1, s2), drop = std::max(s1, s2);
        else continue;
        for (auto& [s, l, t] : G.edges) {
          if (s == drop) s = keep;
          if (t == drop) t = keep;
        }
        changed = true;
      }
  }
  return G;
}

/// Reads a reduced word along the folded graph from vertex 0.
inline bool naive_member(const GroupAlphabet& g, const NaiveGraph& G, const Word& raw) {
  std::size_t v = 0;
  for (Letter l : naive_reduce(g, raw)) {
    bool moved = false;
    for (const auto& [s, lab, t] : G.edges) {
      if (g.is_positive(l) && lab == l && s == v) { v = t; moved = true; break; }
      if (!g.is_positive(l) && lab == g.inverse(l) && t == v) { v = s; moved = true; break; }
    }
    if (!moved) return false;
  }
  return v == 0;
}

/// Breadth-first coset enumeration over reduced words: u and u' name the
/// same coset when u·u'⁻¹ ∈ H. Returns the index, or nullopt once more than
/// `cap` cosets have appeared.
inline std::optional<std::size_t> coset_count(const GroupAlphabet& g, const std::vector<Word>& gens, std::size_t cap) {
  const NaiveGraph G = naive_fold(g, gens);
  std::vector<Word> reps{Word{}};
  for (std::size_t i = 0; i < reps.size(); ++i)
    for (Letter a : g.base().letters()) {
      Word u = reps[i];
      u.push_back(a);
      u = naive_reduce(g, u);
      bool known = false;
      for (const auto& r : reps)
        if (naive_member(g, G, concat(u, g.invert(r)))) { known = true; break; }
      if (known) continue;
      reps.push_back(u);
      if (reps.size() > cap) return std::nullopt;
    }
  return reps.size();
}

/// F(a, b) with every letter internal.
inline GroupAlphabet free_ab() { return GroupAlphabet::free({"a", "b"}); }

/// 1..max_gens random words of length 1..max_len.
inline std::vector<Word> random_generators(std::mt19937_64& r, const GroupAlphabet& g, std::size_t max_gens,
                                           std::size_t max_len) {
  std::vector<Word> gens(uniform(r, 1, max_gens));
  for (auto& w : gens) w = random_word(r, g.size(), uniform(r, 1, max_len));
  return gens;
}

/// For a missing letter a at the end of w1: w1·α·w2 ∈ H iff α ∈ {a, a⁻¹}*
/// has exponent sum 0. Returns the first α breaking it.
inline std::optional<Word> contract_failure(const GroupAlphabet& g, const std::vector<Word>& gens, const Word& w1,
                                            const Word& w2, Letter a, std::size_t max_len) {
  const NaiveGraph G = naive_fold(g, gens);
  std::optional<Word> bad;
  for_each_word(2, max_len, [&](const Word& bits) {
    Word alpha;
    long sum = 0;
    for (Letter b : bits) {
      alpha.push_back(index(b) == 0 ? a : g.inverse(a));
      sum += index(b) == 0 ? 1 : -1;
    }
    Word x = concat(concat(w1, alpha), w2);
    if (naive_member(g, G, x) != (sum == 0)) bad = alpha;
    return !bad;
  });
  return bad;
}

// ---- equations -------------------------------------------------------------

/// Monoid reading of one side under σ.
inline Word naive_value(const std::vector<EqSymbol>& side, const Assignment& sigma) {
  Word out;
  for (const auto& s : side) {
    if (s.kind == EqSymbol::Kind::constant)
      out.push_back(letter_at(s.id));
    else
      out = concat(out, sigma.at(s.id));
  }
  return out;
}

struct Planted {
  EquationSystem sys;
  Assignment sigma;
};

/// Monoid system U = V satisfied by a random σ: V rewrites σ(U), folding
/// some occurrences of σ(Y) back into Y. The bound is the longest value.
inline Planted planted_system(std::mt19937_64& r, const PartitionedAlphabet& A, std::size_t vars,
                              std::size_t max_value, std::size_t side_len) {
  Planted p;
  auto& sys = p.sys;
  sys.constants = A;
  for (std::size_t v = 0; v < vars; ++v) sys.variables.push_back(std::string(1, static_cast<char>('X' + v)));
  sys.constraints.assign(vars, std::nullopt);
  for (std::size_t v = 0; v < vars; ++v) p.sigma.push_back(random_word(r, A.size(), uniform(r, 0, max_value)));
  bool has_var = false;
  for (std::size_t i = 0; i < side_len; ++i) {
    if (uniform(r, 0, 1) || (i + 1 == side_len && !has_var)) {
      sys.lhs.push_back({EqSymbol::Kind::variable, static_cast<std::uint32_t>(uniform(r, 0, vars - 1))});
      has_var = true;
    } else {
      sys.lhs.push_back({EqSymbol::Kind::constant, static_cast<std::uint32_t>(uniform(r, 0, A.size() - 1))});
    }
  }
  const Word target = naive_value(sys.lhs, p.sigma);
  for (std::size_t i = 0; i < target.size();) {
    bool folded = false;
    if (uniform(r, 0, 1)) {
      const std::size_t v = uniform(r, 0, vars - 1);
      const Word& x = p.sigma[v];
      if (!x.empty() && i + x.size() <= target.size() &&
          std::equal(x.begin(), x.end(), target.begin() + static_cast<std::ptrdiff_t>(i))) {
        sys.rhs.push_back({EqSymbol::Kind::variable, static_cast<std::uint32_t>(v)});
        i += x.size();
        folded = true;
      }
    }
    if (!folded) sys.rhs.push_back({EqSymbol::Kind::constant, static_cast<std::uint32_t>(index(target[i++]))});
  }
  if (uniform(r, 0, 1)) std::swap(sys.lhs, sys.rhs);
  for (const auto& w : p.sigma) sys.bound = std::max(sys.bound, w.size());
  return p;
}

/// Every assignment of words ≤ bound satisfying U = V literally, sorted.
inline std::vector<Assignment> naive_solutions(const EquationSystem& sys) {
  const auto all = words_up_to(sys.constants.size(), sys.bound);
  std::vector<Assignment> out;
  Assignment sigma(sys.variables.size());
  std::function<void(std::size_t)> go = [&](std::size_t v) {
    if (v == sigma.size()) {
      for (std::size_t i = 0; i < sigma.size(); ++i)
        if (sys.constraints[i] && !naive_accepts(*sys.constraints[i]->automaton, sigma[i])) return;
      if (naive_value(sys.lhs, sigma) == naive_value(sys.rhs, sigma)) out.push_back(sigma);
      return;
    }
    for (const auto& w : all) {
      sigma[v] = w;
      go(v + 1);
    }
  };
  go(0);
  std::sort(out.begin(), out.end(), assignment_less);
  return out;
}

}  // namespace oracle
