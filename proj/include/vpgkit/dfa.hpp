#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vpgkit/alphabet.hpp"
#include "vpgkit/error.hpp"
#include "vpgkit/vpa.hpp"

namespace vpgkit {

/// Deterministic finite automaton over the letters of a partitioned
/// alphabet; the partition is carried only so the automaton can be lifted to
/// a VPA over the same alphabet.
struct Dfa {
  static constexpr State none = State(-1);

  PartitionedAlphabet alphabet;
  std::size_t num_states = 0;
  State start = 0;
  std::vector<bool> accepting;
  std::vector<State> delta;  // num_states × |Σ|, `none` where undefined

  static Dfa with_states(PartitionedAlphabet alphabet, std::size_t n, State start) {
    Dfa d;
    d.num_states = n;
    d.start = start;
    d.accepting.assign(n, false);
    d.delta.assign(n * alphabet.size(), none);
    d.alphabet = std::move(alphabet);
    return d;
  }

  State next(State q, Letter a) const { return delta.at(q * alphabet.size() + index(a)); }
  void set(State q, Letter a, State t) { delta.at(q * alphabet.size() + index(a)) = t; }

  State run(State q, const Word& w) const {
    for (Letter a : w) {
      if (q == none) return none;
      q = next(q, a);
    }
    return q;
  }

  bool accepts(const Word& w) const {
    alphabet.check(w);
    State q = run(start, w);
    return q != none && accepting[q];
  }

  bool is_complete() const {
    for (State t : delta)
      if (t == none) return false;
    return true;
  }

  bool operator==(const Dfa&) const = default;
};

/// Every letter acts as a bijection and a⁻¹ acts as the inverse bijection.
inline bool is_permutation_dfa(const Dfa& d, const GroupAlphabet& g) {
  if (!(d.alphabet == g.base()) || !d.is_complete()) return false;
  for (Letter a : d.alphabet.letters()) {
    std::vector<bool> hit(d.num_states, false);
    for (State q = 0; q < d.num_states; ++q) {
      State t = d.next(q, a);
      if (hit[t]) return false;
      hit[t] = true;
      if (d.next(t, g.inverse(a)) != q) return false;
    }
  }
  return true;
}

/// The same language as a VPA ignoring its stack: calls push one symbol,
/// returns pop anything.
inline Vpa to_vpa(const Dfa& d) {
  const auto& A = d.alphabet;
  std::vector<CallRule> calls;
  std::vector<InternalRule> internals;
  std::vector<ReturnRule> returns;
  for (State q = 0; q < d.num_states; ++q)
    for (Letter a : A.letters()) {
      State t = d.next(q, a);
      if (t == Dfa::none) continue;
      switch (A.kind(a)) {
        case LetterKind::call: calls.push_back({q, a, t, 1}); break;
        case LetterKind::internal: internals.push_back({q, a, t}); break;
        case LetterKind::ret:
          returns.push_back({q, a, bottom, t});
          returns.push_back({q, a, 1, t});
          break;
      }
    }
  std::vector<State> accepts;
  for (State q = 0; q < d.num_states; ++q)
    if (d.accepting[q]) accepts.push_back(q);
  return Vpa(A, d.num_states, 2, {d.start}, accepts, std::move(calls), std::move(internals), std::move(returns), {},
             {"\xE2\x8A\xA5", "$"});
}

}  // namespace vpgkit
