#pragma once

#include <map>
#include <vector>

#include "vpgkit/alphabet.hpp"
#include "vpgkit/vpa.hpp"

namespace vpgkit {

/// One state, every move allowed; accepts Σ* when `accepting`, else ∅.
inline Vpa universal_vpa(const PartitionedAlphabet& a, bool accepting = true) {
  std::vector<CallRule> calls;
  std::vector<InternalRule> internals;
  std::vector<ReturnRule> returns;
  for (Letter l : a.letters()) {
    switch (a.kind(l)) {
      case LetterKind::call: calls.push_back({0, l, 0, 1}); break;
      case LetterKind::internal: internals.push_back({0, l, 0}); break;
      case LetterKind::ret:
        returns.push_back({0, l, bottom, 0});
        returns.push_back({0, l, 1, 0});
        break;
    }
  }
  std::vector<State> acc;
  if (accepting) acc.push_back(0);
  return Vpa(a, 1, 2, {0}, acc, std::move(calls), std::move(internals), std::move(returns), {"u"},
             {"\xE2\x8A\xA5", "$"});
}

inline Vpa empty_vpa(const PartitionedAlphabet& a) { return Vpa(a, 1, 1, {0}, {}, {}, {}, {}, {"e"}); }

inline Vpa epsilon_vpa(const PartitionedAlphabet& a) { return Vpa(a, 1, 1, {0}, {0}, {}, {}, {}, {"e"}); }

/// Trie automaton of a finite language. Calls push $, returns pop anything,
/// so acceptance depends only on the letters read.
inline Vpa finite_language_vpa(const PartitionedAlphabet& a, const std::vector<Word>& words) {
  std::map<std::pair<State, std::uint32_t>, State> child;
  std::vector<bool> accepting{false};
  std::vector<CallRule> calls;
  std::vector<InternalRule> internals;
  std::vector<ReturnRule> returns;
  for (const auto& w : words) {
    a.check(w);
    State q = 0;
    for (Letter l : w) {
      auto [it, fresh] = child.emplace(std::make_pair(q, index(l)), static_cast<State>(accepting.size()));
      if (fresh) {
        accepting.push_back(false);
        const State t = it->second;
        switch (a.kind(l)) {
          case LetterKind::call: calls.push_back({q, l, t, 1}); break;
          case LetterKind::internal: internals.push_back({q, l, t}); break;
          case LetterKind::ret:
            returns.push_back({q, l, bottom, t});
            returns.push_back({q, l, 1, t});
            break;
        }
      }
      q = it->second;
    }
    accepting[q] = true;
  }
  std::vector<State> acc;
  for (State q = 0; q < accepting.size(); ++q)
    if (accepting[q]) acc.push_back(q);
  return Vpa(a, accepting.size(), 2, {0}, acc, std::move(calls), std::move(internals), std::move(returns), {},
             {"\xE2\x8A\xA5", "$"});
}

}  // namespace vpgkit
