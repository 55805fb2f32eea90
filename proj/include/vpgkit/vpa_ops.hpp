#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vpgkit/alphabet.hpp"
#include "vpgkit/error.hpp"
#include "vpgkit/vpa.hpp"

namespace vpgkit {

inline void require_same_partition(const Vpa& a, const Vpa& b) {
  if (!(a.alphabet() == b.alphabet()))
    throw Error(ErrorCode::PartitionMismatch, "operands are over different partitioned alphabets");
}

/// Drops states that no run can visit or that cannot reach acceptance
/// (ignoring the stack), and stack symbols no call pushes. Initial states
/// are always kept.
inline Vpa trim(const Vpa& v) {
  const std::size_t n = v.num_states();
  std::vector<std::vector<State>> fwd(n), bwd(n);
  auto edge = [&](State a, State b) {
    fwd[a].push_back(b);
    bwd[b].push_back(a);
  };
  for (const auto& r : v.call_rules()) edge(r.from, r.to);
  for (const auto& r : v.internal_rules()) edge(r.from, r.to);
  for (const auto& r : v.return_rules()) edge(r.from, r.to);
  auto closure = [&](std::vector<State> seeds, const std::vector<std::vector<State>>& g) {
    std::vector<bool> seen(n, false);
    for (State s : seeds) seen[s] = true;
    while (!seeds.empty()) {
      State s = seeds.back();
      seeds.pop_back();
      for (State t : g[s])
        if (!seen[t]) seen[t] = true, seeds.push_back(t);
    }
    return seen;
  };
  auto reach = closure(v.initials(), fwd);
  auto coreach = closure(v.accepts(), bwd);
  std::vector<State> remap(n, State(-1));
  std::vector<std::string> names;
  std::set<State> init(v.initials().begin(), v.initials().end());
  for (State q = 0; q < n; ++q)
    if ((reach[q] && coreach[q]) || init.count(q)) {
      remap[q] = static_cast<State>(names.size());
      names.push_back(v.state_names()[q]);
    }
  auto live = [&](State q) { return remap[q] != State(-1) && reach[q] && coreach[q]; };
  std::vector<StackSymbol> sym(v.num_stack_symbols(), StackSymbol(-1));
  std::vector<std::string> stack_names{v.stack_names()[0]};
  sym[bottom] = bottom;
  for (const auto& r : v.call_rules())
    if (live(r.from) && live(r.to) && sym[r.push] == StackSymbol(-1)) {
      sym[r.push] = static_cast<StackSymbol>(stack_names.size());
      stack_names.push_back(v.stack_names()[r.push]);
    }
  std::vector<CallRule> calls;
  std::vector<InternalRule> internals;
  std::vector<ReturnRule> returns;
  for (const auto& r : v.call_rules())
    if (live(r.from) && live(r.to)) calls.push_back({remap[r.from], r.letter, remap[r.to], sym[r.push]});
  for (const auto& r : v.internal_rules())
    if (live(r.from) && live(r.to)) internals.push_back({remap[r.from], r.letter, remap[r.to]});
  for (const auto& r : v.return_rules())
    if (live(r.from) && live(r.to) && sym[r.pop] != StackSymbol(-1))
      returns.push_back({remap[r.from], r.letter, sym[r.pop], remap[r.to]});
  std::vector<State> initials, accepts;
  for (State q : v.initials()) initials.push_back(remap[q]);
  for (State q : v.accepts())
    if (remap[q] != State(-1)) accepts.push_back(remap[q]);
  const std::size_t num_states = names.size(), num_symbols = stack_names.size();
  return Vpa(v.alphabet(), num_states, num_symbols, initials, accepts, std::move(calls), std::move(internals),
             std::move(returns), std::move(names), std::move(stack_names));
}

/// Disjoint union; ⊥ shared, other stack symbols kept apart.
inline Vpa union_of(const Vpa& a, const Vpa& b) {
  require_same_partition(a, b);
  const State off = static_cast<State>(a.num_states());
  const StackSymbol soff = static_cast<StackSymbol>(a.num_stack_symbols() - 1);
  auto s2 = [&](StackSymbol s) { return s == bottom ? bottom : s + soff; };
  std::vector<CallRule> calls(a.call_rules());
  std::vector<InternalRule> internals(a.internal_rules());
  std::vector<ReturnRule> returns(a.return_rules());
  for (auto r : b.call_rules()) calls.push_back({r.from + off, r.letter, r.to + off, s2(r.push)});
  for (auto r : b.internal_rules()) internals.push_back({r.from + off, r.letter, r.to + off});
  for (auto r : b.return_rules()) returns.push_back({r.from + off, r.letter, s2(r.pop), r.to + off});
  std::vector<State> initials(a.initials()), accepts(a.accepts());
  for (State q : b.initials()) initials.push_back(q + off);
  for (State q : b.accepts()) accepts.push_back(q + off);
  std::vector<std::string> names, stack_names{a.stack_names()[0]};
  for (const auto& s : a.state_names()) names.push_back("1." + s);
  for (const auto& s : b.state_names()) names.push_back("2." + s);
  for (std::size_t i = 1; i < a.num_stack_symbols(); ++i) stack_names.push_back("1." + a.stack_names()[i]);
  for (std::size_t i = 1; i < b.num_stack_symbols(); ++i) stack_names.push_back("2." + b.stack_names()[i]);
  const std::size_t num_states = names.size(), num_symbols = stack_names.size();
  return Vpa(a.alphabet(), num_states, num_symbols, initials, accepts, std::move(calls), std::move(internals),
             std::move(returns), std::move(names), std::move(stack_names));
}

/// Synchronized product over reachable state pairs; stack symbols are pairs
/// with a fused ⊥.
inline Vpa intersection(const Vpa& a, const Vpa& b) {
  require_same_partition(a, b);
  const auto& A = a.alphabet();
  std::map<std::pair<State, State>, State> ids;
  std::vector<std::pair<State, State>> states;
  std::map<std::pair<StackSymbol, StackSymbol>, StackSymbol> sids;
  std::vector<std::pair<StackSymbol, StackSymbol>> syms{{bottom, bottom}};
  sids[{bottom, bottom}] = bottom;
  auto state = [&](State p, State q) {
    auto [it, fresh] = ids.emplace(std::make_pair(p, q), static_cast<State>(states.size()));
    if (fresh) states.emplace_back(p, q);
    return it->second;
  };
  auto symbol = [&](StackSymbol g, StackSymbol h) {
    auto [it, fresh] = sids.emplace(std::make_pair(g, h), static_cast<StackSymbol>(syms.size()));
    if (fresh) syms.emplace_back(g, h);
    return it->second;
  };
  std::vector<State> initials;
  for (State p : a.initials())
    for (State q : b.initials()) initials.push_back(state(p, q));
  std::vector<CallRule> calls;
  std::vector<InternalRule> internals;
  // returns resolved after all symbols are known
  std::vector<std::tuple<State, Letter, State, State>> pending_returns;  // (id, letter, p, q)
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto [p, q] = states[i];
    const State id = static_cast<State>(i);
    for (Letter l : A.letters()) {
      switch (A.kind(l)) {
        case LetterKind::internal:
          for (const auto& r1 : a.internals_from(p, l))
            for (const auto& r2 : b.internals_from(q, l)) internals.push_back({id, l, state(r1.to, r2.to)});
          break;
        case LetterKind::call:
          for (const auto& r1 : a.calls_from(p, l))
            for (const auto& r2 : b.calls_from(q, l))
              calls.push_back({id, l, state(r1.to, r2.to), symbol(r1.push, r2.push)});
          break;
        case LetterKind::ret:
          pending_returns.emplace_back(id, l, p, q);
          // successors must be explored too; pops resolved below
          for (const auto& r1 : a.returns_from(p, l))
            for (const auto& r2 : b.returns_from(q, l))
              if ((r1.pop == bottom) == (r2.pop == bottom)) state(r1.to, r2.to);
          break;
      }
    }
  }
  std::vector<ReturnRule> returns;
  for (const auto& [id, l, p, q] : pending_returns)
    for (const auto& r1 : a.returns_from(p, l))
      for (const auto& r2 : b.returns_from(q, l)) {
        auto it = sids.find({r1.pop, r2.pop});
        if (it != sids.end()) returns.push_back({id, l, it->second, ids.at({r1.to, r2.to})});
      }
  std::vector<State> accepts;
  std::vector<std::string> names, stack_names{a.stack_names()[0]};
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto [p, q] = states[i];
    if (a.is_accepting(p) && b.is_accepting(q)) accepts.push_back(static_cast<State>(i));
    names.push_back("(" + a.state_names()[p] + "," + b.state_names()[q] + ")");
  }
  for (std::size_t i = 1; i < syms.size(); ++i)
    stack_names.push_back("(" + a.stack_names()[syms[i].first] + "," + b.stack_names()[syms[i].second] + ")");
  return trim(Vpa(A, states.size(), syms.size(), initials, accepts, std::move(calls), std::move(internals),
                  std::move(returns), std::move(names), std::move(stack_names)));
}

inline Vpa complement(const Vpa& v) {
  Vpa d = determinize(v);
  std::vector<State> flipped;
  for (State q = 0; q < d.num_states(); ++q)
    if (!d.is_accepting(q)) flipped.push_back(q);
  return d.with_accepts(flipped);
}

/// L(a)·L(b). Stack alphabets are kept disjoint; once the second factor
/// runs, a pending symbol of the first factor is read like ⊥ and popped.
inline Vpa concat(const Vpa& a, const Vpa& b) {
  require_same_partition(a, b);
  const State off = static_cast<State>(a.num_states());
  const StackSymbol soff = static_cast<StackSymbol>(a.num_stack_symbols() - 1);
  auto s2 = [&](StackSymbol s) { return s == bottom ? bottom : s + soff; };
  std::vector<CallRule> calls(a.call_rules());
  std::vector<InternalRule> internals(a.internal_rules());
  std::vector<ReturnRule> returns(a.return_rules());
  // rules of b, emitted from `from` (a b-state or a seam state of a)
  auto emit_b = [&](State from, State bq) {
    for (Letter l : a.alphabet().letters()) {
      for (const auto& r : b.calls_from(bq, l)) calls.push_back({from, l, r.to + off, s2(r.push)});
      for (const auto& r : b.internals_from(bq, l)) internals.push_back({from, l, r.to + off});
      for (const auto& r : b.returns_from(bq, l)) {
        returns.push_back({from, l, s2(r.pop), r.to + off});
        if (r.pop == bottom)
          for (StackSymbol g = 1; g < a.num_stack_symbols(); ++g) returns.push_back({from, l, g, r.to + off});
      }
    }
  };
  for (State q = 0; q < b.num_states(); ++q) emit_b(q + off, q);
  bool b_has_eps = false;
  for (State i : b.initials()) b_has_eps = b_has_eps || b.is_accepting(i);
  std::vector<State> accepts;
  for (State f : a.accepts()) {
    for (State i : b.initials()) emit_b(f, i);
    if (b_has_eps) accepts.push_back(f);
  }
  for (State q : b.accepts()) accepts.push_back(q + off);
  std::vector<std::string> names, stack_names{a.stack_names()[0]};
  for (const auto& s : a.state_names()) names.push_back("1." + s);
  for (const auto& s : b.state_names()) names.push_back("2." + s);
  for (std::size_t i = 1; i < a.num_stack_symbols(); ++i) stack_names.push_back("1." + a.stack_names()[i]);
  for (std::size_t i = 1; i < b.num_stack_symbols(); ++i) stack_names.push_back("2." + b.stack_names()[i]);
  const std::size_t num_states = names.size(), num_symbols = stack_names.size();
  return trim(Vpa(a.alphabet(), num_states, num_symbols, a.initials(), accepts, std::move(calls),
                  std::move(internals), std::move(returns), std::move(names), std::move(stack_names)));
}

/// L(v)*. Each call guesses whether it stays pending past the end of its
/// iteration. Control states are (q, e, m): e = this iteration already
/// pushed a pending symbol, m = a matched-tagged symbol is open. A pending
/// symbol is read like ⊥ only when e = m = 0, i.e. from a later iteration.
/// Iterations may end only with m = 0. One extra initial state accepts ε.
inline Vpa star(const Vpa& v) {
  const std::size_t n = v.num_states();
  const std::size_t g = v.num_stack_symbols() - 1;  // non-bottom symbols 1..g
  auto sid = [&](State q, int e, int m) { return static_cast<State>(1 + (q * 2 + e) * 2 + m); };
  // symbols: matched (h, b) and pending h
  auto matched_sym = [&](StackSymbol h, int b) { return static_cast<StackSymbol>(1 + ((h - 1) * 2 + b)); };
  auto pending_sym = [&](StackSymbol h) { return static_cast<StackSymbol>(1 + 2 * g + (h - 1)); };
  std::vector<CallRule> calls;
  std::vector<InternalRule> internals;
  std::vector<ReturnRule> returns;
  auto emit = [&](State from, State q, int e, int m) {
    for (Letter l : v.alphabet().letters()) {
      for (const auto& r : v.internals_from(q, l)) internals.push_back({from, l, sid(r.to, e, m)});
      for (const auto& r : v.calls_from(q, l)) {
        calls.push_back({from, l, sid(r.to, e, 1), matched_sym(r.push, m)});
        if (m == 0) calls.push_back({from, l, sid(r.to, 1, 0), pending_sym(r.push)});
      }
      for (const auto& r : v.returns_from(q, l)) {
        if (r.pop != bottom) {
          if (m == 1)
            for (int b = 0; b < 2; ++b) returns.push_back({from, l, matched_sym(r.pop, b), sid(r.to, e, b)});
        } else if (e == 0 && m == 0) {
          returns.push_back({from, l, bottom, sid(r.to, 0, 0)});
          for (StackSymbol h = 1; h <= g; ++h) returns.push_back({from, l, pending_sym(h), sid(r.to, 0, 0)});
        }
      }
    }
  };
  std::vector<State> accepts{0};
  for (State q = 0; q < n; ++q)
    for (int e = 0; e < 2; ++e)
      for (int m = 0; m < 2; ++m) {
        emit(sid(q, e, m), q, e, m);
        if (m == 0 && v.is_accepting(q)) {
          accepts.push_back(sid(q, e, m));
          for (State i : v.initials()) emit(sid(q, e, m), i, 0, 0);
        }
      }
  for (State i : v.initials()) emit(0, i, 0, 0);
  std::vector<std::string> names{"start"};
  for (State q = 0; q < n; ++q)
    for (int e = 0; e < 2; ++e)
      for (int m = 0; m < 2; ++m)
        names.push_back(v.state_names()[q] + "/" + std::to_string(e) + std::to_string(m));
  std::vector<std::string> stack_names{v.stack_names()[0]};
  for (StackSymbol h = 1; h <= g; ++h)
    for (int b = 0; b < 2; ++b) stack_names.push_back(v.stack_names()[h] + "/m" + std::to_string(b));
  for (StackSymbol h = 1; h <= g; ++h) stack_names.push_back(v.stack_names()[h] + "/p");
  const std::size_t num_states = names.size(), num_symbols = stack_names.size();
  return trim(Vpa(v.alphabet(), num_states, num_symbols, {0}, accepts, std::move(calls), std::move(internals),
                  std::move(returns), std::move(names), std::move(stack_names)));
}

// ---------------------------------------------------------------------------
// Renaming

/// Letter-to-letter map between partitioned alphabets that preserves parts.
class Renaming {
 public:
  static Renaming make(const PartitionedAlphabet& source, const PartitionedAlphabet& target,
                       const std::map<Letter, Letter>& mapping) {
    Renaming f;
    f.source_ = source;
    f.target_ = target;
    for (Letter l : source.letters()) {
      auto it = mapping.find(l);
      if (it == mapping.end())
        throw Error(ErrorCode::PartitionViolation, "renaming undefined on '" + source.name(l) + "'");
      if (!target.contains(it->second)) throw Error(ErrorCode::UnknownLetter, "renaming image outside target alphabet");
      if (source.kind(l) != target.kind(it->second))
        throw Error(ErrorCode::PartitionViolation, "'" + source.name(l) + "' (" + std::string(to_string(source.kind(l))) +
                                                       ") sent to '" + target.name(it->second) + "' (" +
                                                       std::string(to_string(target.kind(it->second))) + ")");
      f.image_.push_back(it->second);
    }
    return f;
  }

  static Renaming by_name(const PartitionedAlphabet& source, const PartitionedAlphabet& target,
                          const std::map<std::string, std::string>& names) {
    std::map<Letter, Letter> m;
    for (Letter l : source.letters()) {
      auto it = names.find(source.name(l));
      m[l] = target.letter(it == names.end() ? source.name(l) : it->second);
    }
    return make(source, target, m);
  }

  static Renaming identity(const PartitionedAlphabet& a) {
    std::map<Letter, Letter> m;
    for (Letter l : a.letters()) m[l] = l;
    return make(a, a, m);
  }

  const PartitionedAlphabet& source() const noexcept { return source_; }
  const PartitionedAlphabet& target() const noexcept { return target_; }
  Letter operator()(Letter l) const { return image_.at(index(l)); }
  Word operator()(const Word& w) const {
    Word out;
    out.reserve(w.size());
    for (Letter l : w) out.push_back((*this)(l));
    return out;
  }

 private:
  PartitionedAlphabet source_, target_;
  std::vector<Letter> image_;
};

inline Vpa rename(const Vpa& v, const Renaming& f) {
  if (!(v.alphabet() == f.source())) throw Error(ErrorCode::PartitionMismatch, "renaming source differs from automaton alphabet");
  std::vector<CallRule> calls;
  std::vector<InternalRule> internals;
  std::vector<ReturnRule> returns;
  for (auto r : v.call_rules()) calls.push_back({r.from, f(r.letter), r.to, r.push});
  for (auto r : v.internal_rules()) internals.push_back({r.from, f(r.letter), r.to});
  for (auto r : v.return_rules()) returns.push_back({r.from, f(r.letter), r.pop, r.to});
  return Vpa(f.target(), v.num_states(), v.num_stack_symbols(), v.initials(), v.accepts(), std::move(calls),
             std::move(internals), std::move(returns), v.state_names(), v.stack_names());
}

// ---------------------------------------------------------------------------
// Quotients by finite languages

enum class Side { left, right };

constexpr std::string_view to_string(Side s) { return s == Side::left ? "left" : "right"; }

namespace detail {

/// Configurations reachable from `start` on w (explicit stacks).
inline std::set<Configuration> configs_after(const Vpa& v, const std::set<Configuration>& start, const Word& w) {
  std::set<Configuration> cur = start;
  for (Letter a : w) {
    std::set<Configuration> next;
    for (const auto& c : cur)
      for (auto& d : step(v, c, a)) next.insert(std::move(d));
    cur = std::move(next);
  }
  return cur;
}

inline Vpa right_quotient(const Vpa& v, const std::vector<Word>& lang) {
  std::size_t k = 0;
  for (const auto& w : lang) k = std::max(k, w.size());
  TrackedVpa t = track_stack_top_detailed(v, k);
  std::vector<State> accepts;
  for (State s = 0; s < t.automaton.num_states(); ++s) {
    const auto& [q, window] = t.origin[s];
    Configuration c{q, {bottom}};
    c.stack.insert(c.stack.end(), window.rbegin(), window.rend());
    for (const auto& w : lang) {
      auto end = configs_after(v, {c}, w);
      if (std::any_of(end.begin(), end.end(), [&](const Configuration& e) { return v.is_accepting(e.state); })) {
        accepts.push_back(s);
        break;
      }
    }
  }
  return trim(t.automaton.with_accepts(accepts));
}

/// Control states (q, P) where P lists the symbols left by the prefix,
/// topmost first. Calls push the original symbols; a return reading ⊥
/// consumes P instead.
inline Vpa left_quotient(const Vpa& v, const std::vector<Word>& lang) {
  std::set<Configuration> init_configs;
  std::set<Configuration> start;
  for (State q : v.initials()) start.insert({q, {bottom}});
  for (const auto& w : lang) {
    auto c = configs_after(v, start, w);
    init_configs.insert(c.begin(), c.end());
  }
  using Pending = std::vector<StackSymbol>;
  std::map<std::pair<State, Pending>, State> ids;
  std::vector<std::pair<State, Pending>> states;
  auto id = [&](State q, Pending p) {
    auto key = std::make_pair(q, std::move(p));
    auto [it, fresh] = ids.emplace(key, static_cast<State>(states.size()));
    if (fresh) states.push_back(std::move(key));
    return it->second;
  };
  std::vector<State> initials;
  for (const auto& c : init_configs) initials.push_back(id(c.state, Pending(c.stack.rbegin(), c.stack.rend() - 1)));
  std::vector<CallRule> calls;
  std::vector<InternalRule> internals;
  std::vector<ReturnRule> returns;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto [q, p] = states[i];
    const State from = static_cast<State>(i);
    for (const auto& r : v.internal_rules())
      if (r.from == q) internals.push_back({from, r.letter, id(r.to, p)});
    for (const auto& r : v.call_rules())
      if (r.from == q) calls.push_back({from, r.letter, id(r.to, p), r.push});
    for (const auto& r : v.return_rules()) {
      if (r.from != q) continue;
      if (r.pop != bottom) returns.push_back({from, r.letter, r.pop, id(r.to, p)});
      if (p.empty() && r.pop == bottom) returns.push_back({from, r.letter, bottom, id(r.to, p)});
      if (!p.empty() && r.pop == p.front()) returns.push_back({from, r.letter, bottom, id(r.to, Pending(p.begin() + 1, p.end()))});
    }
  }
  std::vector<State> accepts;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& [q, p] = states[i];
    if (v.is_accepting(q)) accepts.push_back(static_cast<State>(i));
    std::string name = v.state_names()[q] + "|";
    for (std::size_t j = 0; j < p.size(); ++j) name += (j ? "," : "") + v.stack_names()[p[j]];
    names.push_back(std::move(name));
  }
  if (initials.empty()) {
    // no prefix in lang is readable: empty language
    return Vpa(v.alphabet(), 1, 1, {0}, {}, {}, {}, {}, {"void"}, {v.stack_names()[0]});
  }
  return trim(Vpa(v.alphabet(), states.size(), v.num_stack_symbols(), initials, accepts, std::move(calls),
                  std::move(internals), std::move(returns), std::move(names), v.stack_names()));
}

}  // namespace detail

/// right: {u : ∃w ∈ lang, uw ∈ L(v)}; left: {u : ∃w ∈ lang, wu ∈ L(v)}.
inline Vpa quotient_finite(const Vpa& v, const std::vector<Word>& lang, Side side) {
  for (const auto& w : lang) v.alphabet().check(w);
  if (lang.empty()) return Vpa(v.alphabet(), 1, 1, {0}, {}, {}, {}, {}, {"void"}, {v.stack_names()[0]});
  return side == Side::right ? detail::right_quotient(v, lang) : detail::left_quotient(v, lang);
}

// ---------------------------------------------------------------------------
// Equivalence

struct EquivalenceResult {
  bool equivalent = true;
  std::optional<Word> counterexample;  // shortlex-least separating word
};

/// Exact decision via emptiness of both differences.
inline EquivalenceResult equivalent(const Vpa& a, const Vpa& b) {
  require_same_partition(a, b);
  auto d1 = is_empty(intersection(a, complement(b)));
  auto d2 = is_empty(intersection(b, complement(a)));
  EquivalenceResult res;
  for (const auto* d : {&d1, &d2})
    if (!d->empty && (!res.counterexample || shortlex_less(*d->witness, *res.counterexample)))
      res.counterexample = d->witness;
  res.equivalent = !res.counterexample.has_value();
  return res;
}

/// L(a) ⊆ L(b), with the least word of L(a) \ L(b) on failure.
inline EquivalenceResult included(const Vpa& a, const Vpa& b) {
  require_same_partition(a, b);
  auto d = is_empty(intersection(a, complement(b)));
  return {d.empty, d.witness};
}

}  // namespace vpgkit
