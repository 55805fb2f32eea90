#pragma once

#include <algorithm>
#include <initializer_list>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vpgkit/alphabet.hpp"
#include "vpgkit/bits.hpp"
#include "vpgkit/error.hpp"

namespace vpgkit {

using State = std::uint32_t;
using StackSymbol = std::uint32_t;

/// Stack symbol 0 is always the bottom marker ⊥.
inline constexpr StackSymbol bottom = 0;

struct CallRule {
  State from;
  Letter letter;
  State to;
  StackSymbol push;
  auto operator<=>(const CallRule&) const = default;
};

struct InternalRule {
  State from;
  Letter letter;
  State to;
  auto operator<=>(const InternalRule&) const = default;
};

struct ReturnRule {
  State from;
  Letter letter;
  StackSymbol pop;
  State to;
  auto operator<=>(const ReturnRule&) const = default;
};

// ---------------------------------------------------------------------------
// Name-level description, the shape of the JSON format. Validation works on
// this form so that ill-formed automata can be reported rather than rejected
// at construction.

struct TransitionSpec {
  std::string from;
  std::string letter;
  std::string to;
  std::optional<std::string> push;
  std::optional<std::string> pop;
  bool operator==(const TransitionSpec&) const = default;
};

struct VpaDescription {
  PartitionedAlphabet alphabet;
  std::vector<std::string> states;
  std::vector<std::string> initials;
  std::vector<std::string> accepts;
  std::vector<std::string> stack_symbols;  // without the bottom symbol
  std::string bottom_name = "\xE2\x8A\xA5";  // ⊥
  std::vector<TransitionSpec> transitions;
  bool operator==(const VpaDescription&) const = default;
};

enum class ViolationKind {
  BottomPushed,
  VisibilityBroken,
  UnknownState,
  UnknownLetter,
  UnknownStackSymbol,
  NoInitialState,
  DuplicateName,
};

constexpr std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::BottomPushed: return "BottomPushed";
    case ViolationKind::VisibilityBroken: return "VisibilityBroken";
    case ViolationKind::UnknownState: return "UnknownState";
    case ViolationKind::UnknownLetter: return "UnknownLetter";
    case ViolationKind::UnknownStackSymbol: return "UnknownStackSymbol";
    case ViolationKind::NoInitialState: return "NoInitialState";
    case ViolationKind::DuplicateName: return "DuplicateName";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  std::optional<std::size_t> transition;  // index into VpaDescription::transitions
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(ViolationKind k) const {
    return std::any_of(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; });
  }
  std::string summary() const {
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      out += std::string(to_string(v.kind));
      if (v.transition) out += " (transition " + std::to_string(*v.transition) + ")";
      if (!v.detail.empty()) out += ": " + v.detail;
    }
    return out;
  }
};

inline ValidationReport validate(const VpaDescription& d) {
  ValidationReport report;
  auto add = [&](ViolationKind k, std::optional<std::size_t> t, std::string detail) {
    report.violations.push_back({k, t, std::move(detail)});
  };
  std::set<std::string> states(d.states.begin(), d.states.end());
  if (states.size() != d.states.size()) add(ViolationKind::DuplicateName, std::nullopt, "duplicate state name");
  std::set<std::string> stack(d.stack_symbols.begin(), d.stack_symbols.end());
  if (stack.size() != d.stack_symbols.size() || stack.count(d.bottom_name))
    add(ViolationKind::DuplicateName, std::nullopt, "duplicate stack symbol name");
  if (d.initials.empty()) add(ViolationKind::NoInitialState, std::nullopt, "");
  for (const auto& s : d.initials)
    if (!states.count(s)) add(ViolationKind::UnknownState, std::nullopt, "initial '" + s + "'");
  for (const auto& s : d.accepts)
    if (!states.count(s)) add(ViolationKind::UnknownState, std::nullopt, "accepting '" + s + "'");
  for (std::size_t i = 0; i < d.transitions.size(); ++i) {
    const auto& t = d.transitions[i];
    if (!states.count(t.from)) add(ViolationKind::UnknownState, i, "'" + t.from + "'");
    if (!states.count(t.to)) add(ViolationKind::UnknownState, i, "'" + t.to + "'");
    auto l = d.alphabet.find(t.letter);
    if (!l) {
      add(ViolationKind::UnknownLetter, i, "'" + t.letter + "'");
      continue;
    }
    LetterKind kind = d.alphabet.kind(*l);
    if (t.push) {
      if (*t.push == d.bottom_name)
        add(ViolationKind::BottomPushed, i, "letter '" + t.letter + "' pushes the bottom symbol");
      else if (!stack.count(*t.push))
        add(ViolationKind::UnknownStackSymbol, i, "'" + *t.push + "'");
    }
    if (t.pop && *t.pop != d.bottom_name && !stack.count(*t.pop))
      add(ViolationKind::UnknownStackSymbol, i, "'" + *t.pop + "'");
    switch (kind) {
      case LetterKind::call:
        if (!t.push || t.pop) add(ViolationKind::VisibilityBroken, i, "call '" + t.letter + "' must push and not pop");
        break;
      case LetterKind::internal:
        if (t.push || t.pop)
          add(ViolationKind::VisibilityBroken, i, "internal '" + t.letter + "' must not touch the stack");
        break;
      case LetterKind::ret:
        if (t.push || !t.pop) add(ViolationKind::VisibilityBroken, i, "return '" + t.letter + "' must pop and not push");
        break;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

/// A (possibly nondeterministic) visibly pushdown automaton. Missing
/// transitions block a run. Acceptance is by final state, whatever the stack.
class Vpa {
 public:
  Vpa() = default;

  Vpa(PartitionedAlphabet alphabet, std::size_t num_states, std::size_t num_stack_symbols,
      std::vector<State> initials, std::vector<State> accepts, std::vector<CallRule> calls,
      std::vector<InternalRule> internals, std::vector<ReturnRule> returns,
      std::vector<std::string> state_names = {}, std::vector<std::string> stack_names = {})
      : alphabet_(std::move(alphabet)),
        num_states_(num_states),
        num_stack_(std::max<std::size_t>(num_stack_symbols, 1)),
        initials_(std::move(initials)),
        calls_(std::move(calls)),
        internals_(std::move(internals)),
        returns_(std::move(returns)),
        state_names_(std::move(state_names)),
        stack_names_(std::move(stack_names)) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidAutomaton, what); };
    if (initials_.empty()) fail("NoInitialState");
    auto check_state = [&](State q) {
      if (q >= num_states_) fail("UnknownState: " + std::to_string(q));
    };
    auto check_kind = [&](Letter l, LetterKind k) {
      if (!alphabet_.contains(l)) fail("UnknownLetter: index " + std::to_string(index(l)));
      if (alphabet_.kind(l) != k) fail("VisibilityBroken: letter '" + alphabet_.name(l) + "' used as " + std::string(to_string(k)));
    };
    for (State q : initials_) check_state(q);
    accepting_.assign(num_states_, false);
    for (State q : accepts) {
      check_state(q);
      accepting_[q] = true;
    }
    for (const auto& r : calls_) {
      check_state(r.from), check_state(r.to), check_kind(r.letter, LetterKind::call);
      if (r.push == bottom) fail("BottomPushed: call '" + alphabet_.name(r.letter) + "'");
      if (r.push >= num_stack_) fail("UnknownStackSymbol: " + std::to_string(r.push));
    }
    for (const auto& r : internals_) check_state(r.from), check_state(r.to), check_kind(r.letter, LetterKind::internal);
    for (const auto& r : returns_) {
      check_state(r.from), check_state(r.to), check_kind(r.letter, LetterKind::ret);
      if (r.pop >= num_stack_) fail("UnknownStackSymbol: " + std::to_string(r.pop));
    }
    normalize(initials_);
    normalize(calls_);
    normalize(internals_);
    normalize(returns_);
    if (state_names_.size() != num_states_) {
      state_names_.clear();
      for (std::size_t i = 0; i < num_states_; ++i) state_names_.push_back("q" + std::to_string(i));
    }
    if (stack_names_.size() != num_stack_) {
      stack_names_.assign(1, "\xE2\x8A\xA5");
      for (std::size_t i = 1; i < num_stack_; ++i) stack_names_.push_back("g" + std::to_string(i));
    }
    build_index();
  }

  static Vpa from_description(const VpaDescription& d) {
    auto report = validate(d);
    if (!report.ok()) throw Error(ErrorCode::InvalidAutomaton, report.summary());
    std::map<std::string, State> st;
    for (std::size_t i = 0; i < d.states.size(); ++i) st[d.states[i]] = static_cast<State>(i);
    std::map<std::string, StackSymbol> sy;
    sy[d.bottom_name] = bottom;
    for (std::size_t i = 0; i < d.stack_symbols.size(); ++i) sy[d.stack_symbols[i]] = static_cast<StackSymbol>(i + 1);
    std::vector<State> init, acc;
    for (const auto& s : d.initials) init.push_back(st.at(s));
    for (const auto& s : d.accepts) acc.push_back(st.at(s));
    std::vector<CallRule> calls;
    std::vector<InternalRule> internals;
    std::vector<ReturnRule> returns;
    for (const auto& t : d.transitions) {
      Letter l = d.alphabet.letter(t.letter);
      switch (d.alphabet.kind(l)) {
        case LetterKind::call: calls.push_back({st.at(t.from), l, st.at(t.to), sy.at(*t.push)}); break;
        case LetterKind::internal: internals.push_back({st.at(t.from), l, st.at(t.to)}); break;
        case LetterKind::ret: returns.push_back({st.at(t.from), l, sy.at(*t.pop), st.at(t.to)}); break;
      }
    }
    std::vector<std::string> stack_names{d.bottom_name};
    stack_names.insert(stack_names.end(), d.stack_symbols.begin(), d.stack_symbols.end());
    return Vpa(d.alphabet, d.states.size(), d.stack_symbols.size() + 1, std::move(init), std::move(acc),
               std::move(calls), std::move(internals), std::move(returns), d.states, std::move(stack_names));
  }

  VpaDescription describe() const {
    VpaDescription d;
    d.alphabet = alphabet_;
    d.states = state_names_;
    for (State q : initials_) d.initials.push_back(state_names_[q]);
    for (State q = 0; q < num_states_; ++q)
      if (accepting_[q]) d.accepts.push_back(state_names_[q]);
    d.bottom_name = stack_names_[0];
    d.stack_symbols.assign(stack_names_.begin() + 1, stack_names_.end());
    // transitions grouped by source state, then letter order
    std::vector<std::tuple<State, Letter, int, std::size_t>> order;
    for (std::size_t i = 0; i < calls_.size(); ++i) order.emplace_back(calls_[i].from, calls_[i].letter, 0, i);
    for (std::size_t i = 0; i < internals_.size(); ++i) order.emplace_back(internals_[i].from, internals_[i].letter, 1, i);
    for (std::size_t i = 0; i < returns_.size(); ++i) order.emplace_back(returns_[i].from, returns_[i].letter, 2, i);
    std::sort(order.begin(), order.end());
    for (const auto& [from, l, kind, i] : order) {
      TransitionSpec t;
      t.from = state_names_[from];
      t.letter = alphabet_.name(l);
      if (kind == 0) {
        t.to = state_names_[calls_[i].to];
        t.push = stack_names_[calls_[i].push];
      } else if (kind == 1) {
        t.to = state_names_[internals_[i].to];
      } else {
        t.to = state_names_[returns_[i].to];
        t.pop = stack_names_[returns_[i].pop];
      }
      d.transitions.push_back(std::move(t));
    }
    return d;
  }

  const PartitionedAlphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t num_states() const noexcept { return num_states_; }
  /// Including ⊥.
  std::size_t num_stack_symbols() const noexcept { return num_stack_; }
  const std::vector<State>& initials() const noexcept { return initials_; }
  bool is_accepting(State q) const { return accepting_.at(q); }
  std::vector<State> accepts() const {
    std::vector<State> out;
    for (State q = 0; q < num_states_; ++q)
      if (accepting_[q]) out.push_back(q);
    return out;
  }
  const std::vector<CallRule>& call_rules() const noexcept { return calls_; }
  const std::vector<InternalRule>& internal_rules() const noexcept { return internals_; }
  const std::vector<ReturnRule>& return_rules() const noexcept { return returns_; }
  const std::vector<std::string>& state_names() const noexcept { return state_names_; }
  const std::vector<std::string>& stack_names() const noexcept { return stack_names_; }

  std::span<const CallRule> calls_from(State q, Letter a) const { return slice(calls_, call_off_, q, a); }
  std::span<const InternalRule> internals_from(State q, Letter a) const { return slice(internals_, internal_off_, q, a); }
  /// Return rules from q on a, sorted by popped symbol.
  std::span<const ReturnRule> returns_from(State q, Letter a) const { return slice(returns_, return_off_, q, a); }
  std::span<const ReturnRule> returns_from(State q, Letter a, StackSymbol top) const {
    auto all = returns_from(q, a);
    auto lo = std::lower_bound(all.begin(), all.end(), top, [](const ReturnRule& r, StackSymbol s) { return r.pop < s; });
    auto hi = std::upper_bound(lo, all.end(), top, [](StackSymbol s, const ReturnRule& r) { return s < r.pop; });
    return {lo, hi};
  }

  /// Same automaton with a different accepting set.
  Vpa with_accepts(const std::vector<State>& accepts) const {
    return Vpa(alphabet_, num_states_, num_stack_, initials_, accepts, calls_, internals_, returns_, state_names_, stack_names_);
  }
  Vpa with_initials(const std::vector<State>& initials) const {
    return Vpa(alphabet_, num_states_, num_stack_, initials, this->accepts(), calls_, internals_, returns_, state_names_,
               stack_names_);
  }

 private:
  template <class T>
  static void normalize(std::vector<T>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  template <class Rule>
  std::span<const Rule> slice(const std::vector<Rule>& rules, const std::vector<std::uint32_t>& off, State q, Letter a) const {
    std::size_t k = static_cast<std::size_t>(q) * alphabet_.size() + index(a);
    if (q >= num_states_ || index(a) >= alphabet_.size()) return {};
    return std::span<const Rule>(rules.data() + off[k], off[k + 1] - off[k]);
  }

  template <class Rule>
  void index_rules(const std::vector<Rule>& rules, std::vector<std::uint32_t>& off) const {
    const std::size_t keys = num_states_ * alphabet_.size();
    off.assign(keys + 1, 0);
    for (const auto& r : rules) ++off[static_cast<std::size_t>(r.from) * alphabet_.size() + index(r.letter) + 1];
    for (std::size_t k = 0; k < keys; ++k) off[k + 1] += off[k];
  }

  void build_index() {
    index_rules(calls_, call_off_);
    index_rules(internals_, internal_off_);
    index_rules(returns_, return_off_);
  }

  PartitionedAlphabet alphabet_;
  std::size_t num_states_ = 0;
  std::size_t num_stack_ = 1;
  std::vector<State> initials_;
  std::vector<bool> accepting_;
  std::vector<CallRule> calls_;
  std::vector<InternalRule> internals_;
  std::vector<ReturnRule> returns_;
  std::vector<std::string> state_names_;
  std::vector<std::string> stack_names_;
  std::vector<std::uint32_t> call_off_, internal_off_, return_off_;
};

inline ValidationReport validate(const Vpa& v) { return validate(v.describe()); }

// ---------------------------------------------------------------------------
// Runs

struct Configuration {
  State state;
  std::vector<StackSymbol> stack;  // bottom first; stack[0] == ⊥
  auto operator<=>(const Configuration&) const = default;
};

struct RunResult {
  bool accepted = false;
  std::vector<Configuration> final_configs;
  /// Configurations of one accepting run, one per prefix (ε first).
  std::optional<std::vector<Configuration>> trace;
};

inline std::vector<Configuration> step(const Vpa& v, const Configuration& c, Letter a) {
  std::vector<Configuration> out;
  switch (v.alphabet().kind(a)) {
    case LetterKind::internal:
      for (const auto& r : v.internals_from(c.state, a)) out.push_back({r.to, c.stack});
      break;
    case LetterKind::call:
      for (const auto& r : v.calls_from(c.state, a)) {
        Configuration n{r.to, c.stack};
        n.stack.push_back(r.push);
        out.push_back(std::move(n));
      }
      break;
    case LetterKind::ret: {
      StackSymbol top = c.stack.back();
      for (const auto& r : v.returns_from(c.state, a, top)) {
        Configuration n{r.to, c.stack};
        if (top != bottom) n.stack.pop_back();
        out.push_back(std::move(n));
      }
      break;
    }
  }
  return out;
}

/// Explicit-configuration simulation from every initial state with stack ⊥.
inline RunResult run(const Vpa& v, const Word& w, bool want_trace = false) {
  v.alphabet().check(w);
  struct Node {
    Configuration config;
    std::size_t parent;
  };
  std::vector<std::vector<Node>> layers(1);
  for (State q : v.initials()) layers[0].push_back({{q, {bottom}}, 0});
  for (Letter a : w) {
    std::map<Configuration, std::size_t> seen;
    std::vector<Node> next;
    const auto& cur = layers.back();
    for (std::size_t i = 0; i < cur.size(); ++i) {
      for (auto& c : step(v, cur[i].config, a)) {
        if (seen.count(c)) continue;
        seen.emplace(c, next.size());
        next.push_back({std::move(c), i});
      }
    }
    layers.push_back(std::move(next));
  }
  RunResult res;
  const auto& last = layers.back();
  std::optional<std::size_t> acc;
  for (std::size_t i = 0; i < last.size(); ++i) {
    res.final_configs.push_back(last[i].config);
    if (v.is_accepting(last[i].config.state) && !acc) acc = i;
  }
  std::sort(res.final_configs.begin(), res.final_configs.end());
  res.final_configs.erase(std::unique(res.final_configs.begin(), res.final_configs.end()), res.final_configs.end());
  res.accepted = acc.has_value();
  if (want_trace && acc) {
    std::vector<Configuration> trace(layers.size());
    std::size_t i = *acc;
    for (std::size_t l = layers.size(); l-- > 0;) {
      trace[l] = layers[l][i].config;
      i = layers[l][i].parent;
    }
    res.trace = std::move(trace);
  }
  return res;
}

/// Incremental simulation with undo, for walking word trees. Stacks are
/// shared through a parent-pointer arena that is truncated on undo.
class Simulation {
 public:
  explicit Simulation(const Vpa& v) : v_(&v) { reset(); }

  void reset() {
    nodes_.assign(1, {bottom, 0});
    configs_.clear();
    for (State q : v_->initials()) configs_.push_back({q, 0});
    std::sort(configs_.begin(), configs_.end());
    configs_.erase(std::unique(configs_.begin(), configs_.end()), configs_.end());
    layers_.assign(1, Layer{0, configs_.size(), nodes_.size()});
  }

  void push(Letter a) {
    const Layer cur = layers_.back();
    const std::size_t begin = configs_.size();
    const std::size_t node_mark = nodes_.size();
    const LetterKind kind = v_->alphabet().kind(a);
    for (std::size_t i = cur.begin; i < cur.end; ++i) {
      const Config c = configs_[i];
      switch (kind) {
        case LetterKind::internal:
          for (const auto& r : v_->internals_from(c.state, a)) configs_.push_back({r.to, c.node});
          break;
        case LetterKind::call:
          for (const auto& r : v_->calls_from(c.state, a)) configs_.push_back({r.to, child(c.node, r.push, node_mark)});
          break;
        case LetterKind::ret: {
          const StackSymbol top = nodes_[c.node].symbol;
          const std::uint32_t below = c.node == 0 ? 0 : nodes_[c.node].parent;
          for (const auto& r : v_->returns_from(c.state, a, top)) configs_.push_back({r.to, below});
          break;
        }
      }
    }
    std::sort(configs_.begin() + static_cast<std::ptrdiff_t>(begin), configs_.end());
    configs_.erase(std::unique(configs_.begin() + static_cast<std::ptrdiff_t>(begin), configs_.end()), configs_.end());
    layers_.push_back({begin, configs_.size(), nodes_.size()});
  }

  void pop() {
    layers_.pop_back();
    const Layer& cur = layers_.back();
    configs_.resize(cur.end);
    nodes_.resize(cur.nodes);
  }

  bool accepting() const {
    const Layer& cur = layers_.back();
    for (std::size_t i = cur.begin; i < cur.end; ++i)
      if (v_->is_accepting(configs_[i].state)) return true;
    return false;
  }

  bool dead() const { return layers_.back().begin == layers_.back().end; }

  std::size_t depth() const { return layers_.size() - 1; }

 private:
  struct Node {
    StackSymbol symbol;
    std::uint32_t parent;
  };
  struct Config {
    State state;
    std::uint32_t node;
    auto operator<=>(const Config&) const = default;
  };
  struct Layer {
    std::size_t begin;
    std::size_t end;
    std::size_t nodes = 1;
  };

  std::uint32_t child(std::uint32_t parent, StackSymbol s, std::size_t from) {
    for (std::size_t i = from; i < nodes_.size(); ++i)
      if (nodes_[i].parent == parent && nodes_[i].symbol == s) return static_cast<std::uint32_t>(i);
    nodes_.push_back({s, parent});
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  const Vpa* v_;
  std::vector<Node> nodes_;
  std::vector<Config> configs_;
  std::vector<Layer> layers_;
};

inline bool accepts(const Vpa& v, const Word& w) {
  v.alphabet().check(w);
  Simulation sim(v);
  for (Letter a : w) {
    sim.push(a);
    if (sim.dead()) return false;
  }
  return sim.accepting();
}

/// Pre-order walk of the tree of all words of length ≤ max_len. `enter(a)`
/// and `leave()` bracket each edge; `visit(w)` sees each node, ε first, and
/// returns whether to descend below it.
template <class Enter, class Leave, class Visit>
void walk_word_tree(std::size_t letters, std::size_t max_len, Enter&& enter, Leave&& leave, Visit&& visit) {
  Word w;
  if (!visit(static_cast<const Word&>(w)) || max_len == 0 || letters == 0) return;
  std::vector<std::uint32_t> next{0};
  while (!next.empty()) {
    if (next.back() == letters || w.size() == max_len) {
      next.pop_back();
      if (!w.empty()) {
        w.pop_back();
        leave();
      }
      continue;
    }
    Letter a = letter_at(next.back()++);
    w.push_back(a);
    enter(a);
    if (visit(static_cast<const Word&>(w))) {
      next.push_back(0);
    } else {
      w.pop_back();
      leave();
    }
  }
}

/// Accepted words of length ≤ max_len, shortlex order.
inline std::vector<Word> enumerate_language(const Vpa& v, std::size_t max_len) {
  std::vector<Word> out;
  Simulation sim(v);
  walk_word_tree(
      v.alphabet().size(), max_len, [&](Letter a) { sim.push(a); }, [&] { sim.pop(); },
      [&](const Word& w) {
        if (sim.accepting()) out.push_back(w);
        return !sim.dead();
      });
  std::sort(out.begin(), out.end(), shortlex_less);
  return out;
}

/// Shortlex-least word of length ≤ max_len on which the two automata differ.
inline std::optional<Word> first_disagreement(const Vpa& a, const Vpa& b, std::size_t max_len) {
  if (!(a.alphabet() == b.alphabet())) throw Error(ErrorCode::PartitionMismatch, "automata over different partitions");
  std::optional<Word> best;
  Simulation sa(a), sb(b);
  walk_word_tree(
      a.alphabet().size(), max_len,
      [&](Letter l) {
        sa.push(l);
        sb.push(l);
      },
      [&] {
        sa.pop();
        sb.pop();
      },
      [&](const Word& w) {
        if (sa.accepting() != sb.accepting() && (!best || shortlex_less(w, *best))) best = w;
        return !(sa.dead() && sb.dead());
      });
  return best;
}

// ---------------------------------------------------------------------------
// Determinism

inline bool is_deterministic(const Vpa& v) {
  if (v.initials().size() != 1) return false;
  const auto& A = v.alphabet();
  for (State q = 0; q < v.num_states(); ++q) {
    for (Letter a : A.letters()) {
      switch (A.kind(a)) {
        case LetterKind::call:
          if (v.calls_from(q, a).size() > 1) return false;
          break;
        case LetterKind::internal:
          if (v.internals_from(q, a).size() > 1) return false;
          break;
        case LetterKind::ret:
          for (StackSymbol s = 0; s < v.num_stack_symbols(); ++s)
            if (v.returns_from(q, a, s).size() > 1) return false;
          break;
      }
    }
  }
  return true;
}

/// Every (state, letter[, stack symbol]) has at least one successor.
inline bool is_complete(const Vpa& v) {
  const auto& A = v.alphabet();
  for (State q = 0; q < v.num_states(); ++q) {
    for (Letter a : A.letters()) {
      switch (A.kind(a)) {
        case LetterKind::call:
          if (v.calls_from(q, a).empty()) return false;
          break;
        case LetterKind::internal:
          if (v.internals_from(q, a).empty()) return false;
          break;
        case LetterKind::ret:
          for (StackSymbol s = 0; s < v.num_stack_symbols(); ++s)
            if (v.returns_from(q, a, s).empty()) return false;
          break;
      }
    }
  }
  return true;
}

namespace detail {

/// Summary-set state for the determinization: rows[p] is the set of states
/// reachable from p across the current segment (since the last pending call,
/// or since the start at top level); `reach` is the set of states reachable
/// from an initial state by the whole prefix.
struct SummaryState {
  std::vector<Bits> rows;
  Bits reach;

  std::vector<std::uint64_t> key() const {
    std::vector<std::uint64_t> k;
    for (const auto& r : rows) k.insert(k.end(), r.words().begin(), r.words().end());
    k.insert(k.end(), reach.words().begin(), reach.words().end());
    return k;
  }
};

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint64_t>& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (auto w : k) {
      h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace detail

/// Summary-pair subset construction. The result is deterministic and
/// complete over the same partition; its stack symbols are (state, call)
/// pairs recording the summary in force when the call was read.
inline Vpa determinize(const Vpa& v) {
  using detail::SummaryState;
  const auto& A = v.alphabet();
  const std::size_t n = v.num_states();
  const auto call_letters = A.letters_of(LetterKind::call);
  const auto int_letters = A.letters_of(LetterKind::internal);
  const auto ret_letters = A.letters_of(LetterKind::ret);

  // internal successors, call successors (any symbol), return successors per popped symbol
  auto succ_internal = [&](Letter a, State q) {
    Bits b(n);
    for (const auto& r : v.internals_from(q, a)) b.set(r.to);
    return b;
  };
  std::map<std::pair<std::uint32_t, State>, Bits> int_cache;
  auto internal_image = [&](Letter a, const Bits& s) {
    Bits out(n);
    s.for_each([&](std::size_t q) {
      auto key = std::make_pair(index(a), static_cast<State>(q));
      auto it = int_cache.find(key);
      if (it == int_cache.end()) it = int_cache.emplace(key, succ_internal(a, static_cast<State>(q))).first;
      out |= it->second;
    });
    return out;
  };
  auto call_image = [&](Letter c, const Bits& s) {
    Bits out(n);
    s.for_each([&](std::size_t q) {
      for (const auto& r : v.calls_from(static_cast<State>(q), c)) out.set(r.to);
    });
    return out;
  };
  auto ret_image = [&](Letter r, StackSymbol top, const Bits& s) {
    Bits out(n);
    s.for_each([&](std::size_t q) {
      for (const auto& rule : v.returns_from(static_cast<State>(q), r, top)) out.set(rule.to);
    });
    return out;
  };

  std::vector<SummaryState> states;
  std::unordered_map<std::vector<std::uint64_t>, State, detail::KeyHash> ids;
  auto intern = [&](SummaryState s) -> State {
    auto k = s.key();
    auto it = ids.find(k);
    if (it != ids.end()) return it->second;
    State id = static_cast<State>(states.size());
    ids.emplace(std::move(k), id);
    states.push_back(std::move(s));
    return id;
  };

  {
    SummaryState init{std::vector<Bits>(n, Bits(n)), Bits(n)};
    for (State q : v.initials()) {
      init.rows[q].set(q);
      init.reach.set(q);
    }
    intern(std::move(init));
  }

  struct Symbol {
    State below;
    Letter call;
  };
  std::vector<Symbol> symbols{{0, letter_at(0)}};  // index 0 = ⊥
  std::map<std::pair<State, std::uint32_t>, StackSymbol> symbol_ids;

  std::vector<CallRule> calls;
  std::vector<InternalRule> internals;
  std::vector<ReturnRule> returns;
  std::vector<std::size_t> returns_done;  // per state: symbols [1, returns_done) processed

  // M(q1) for the current summary (rows) and a (call, return) pair: states
  // reached by taking the call from q1, crossing the segment, and returning.
  auto matched = [&](const SummaryState& cur, Letter c, Letter r) {
    std::vector<Bits> m(n, Bits(n));
    for (State q1 = 0; q1 < n; ++q1) {
      for (const auto& cr : v.calls_from(q1, c)) {
        Bits tops(n);
        cur.rows[cr.to].for_each([&](std::size_t q3) {
          for (const auto& rr : v.returns_from(static_cast<State>(q3), r, cr.push)) tops.set(rr.to);
        });
        m[q1] |= tops;
      }
    }
    return m;
  };

  std::size_t processed = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    while (processed < states.size()) {
      const State d = static_cast<State>(processed++);
      returns_done.push_back(1);
      for (Letter a : int_letters) {
        SummaryState next{std::vector<Bits>(n, Bits(n)), Bits(n)};
        const SummaryState& cur = states[d];
        for (std::size_t p = 0; p < n; ++p) next.rows[p] = internal_image(a, cur.rows[p]);
        next.reach = internal_image(a, cur.reach);
        State t = intern(std::move(next));
        internals.push_back({d, a, t});
      }
      for (Letter c : call_letters) {
        const SummaryState& cur = states[d];
        Bits targets(n);
        for (std::size_t p = 0; p < n; ++p) targets |= call_image(c, cur.rows[p]);
        SummaryState next{std::vector<Bits>(n, Bits(n)), call_image(c, cur.reach)};
        targets.for_each([&](std::size_t q) { next.rows[q].set(q); });
        State t = intern(std::move(next));
        StackSymbol sym = static_cast<StackSymbol>(symbols.size());
        symbols.push_back({d, c});
        symbol_ids[{d, index(c)}] = sym;
        calls.push_back({d, c, t, sym});
      }
      for (Letter r : ret_letters) {
        const SummaryState& cur = states[d];
        SummaryState next{std::vector<Bits>(n, Bits(n)), ret_image(r, bottom, cur.reach)};
        for (std::size_t p = 0; p < n; ++p) next.rows[p] = ret_image(r, bottom, cur.rows[p]);
        State t = intern(std::move(next));
        returns.push_back({d, r, bottom, t});
      }
      changed = true;
    }
    for (State d = 0; d < returns_done.size(); ++d) {
      if (returns_done[d] == symbols.size()) continue;
      std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<Bits>> cache;
      for (std::size_t s = returns_done[d]; s < symbols.size(); ++s) {
        const Symbol sym = symbols[s];
        for (Letter r : ret_letters) {
          auto key = std::make_pair(index(sym.call), index(r));
          auto it = cache.find(key);
          if (it == cache.end()) it = cache.emplace(key, matched(states[d], sym.call, r)).first;
          const auto& m = it->second;
          const SummaryState& below = states[sym.below];
          SummaryState next{std::vector<Bits>(n, Bits(n)), Bits(n)};
          for (std::size_t p = 0; p < n; ++p) below.rows[p].for_each([&](std::size_t q1) { next.rows[p] |= m[q1]; });
          below.reach.for_each([&](std::size_t q1) { next.reach |= m[q1]; });
          State t = intern(std::move(next));
          returns.push_back({d, r, static_cast<StackSymbol>(s), t});
        }
      }
      returns_done[d] = symbols.size();
      changed = true;
    }
  }

  std::vector<State> accepts;
  for (State d = 0; d < states.size(); ++d) {
    bool acc = false;
    states[d].reach.for_each([&](std::size_t q) { acc = acc || v.is_accepting(static_cast<State>(q)); });
    if (acc) accepts.push_back(d);
  }
  std::vector<std::string> state_names, stack_names{"\xE2\x8A\xA5"};
  for (std::size_t d = 0; d < states.size(); ++d) state_names.push_back("d" + std::to_string(d));
  for (std::size_t s = 1; s < symbols.size(); ++s)
    stack_names.push_back("[d" + std::to_string(symbols[s].below) + "," + A.name(symbols[s].call) + "]");
  return Vpa(A, states.size(), symbols.size(), {0}, accepts, std::move(calls), std::move(internals), std::move(returns),
             std::move(state_names), std::move(stack_names));
}

/// Table-driven membership for deterministic automata. Missing moves reject.
class DeterministicRunner {
 public:
  explicit DeterministicRunner(const Vpa& v) : alphabet_(v.alphabet()), letters_(v.alphabet().size()), symbols_(v.num_stack_symbols()) {
    if (!is_deterministic(v)) throw Error(ErrorCode::InvalidAutomaton, "runner needs a deterministic automaton");
    const std::size_t n = v.num_states();
    start_ = v.initials().front();
    accepting_.resize(n);
    kind_.resize(letters_);
    for (Letter a : alphabet_.letters()) kind_[index(a)] = alphabet_.kind(a);
    next_.assign(n * letters_, dead);
    push_.assign(n * letters_, bottom);
    ret_.assign(n * letters_ * symbols_, dead);
    for (State q = 0; q < n; ++q) accepting_[q] = v.is_accepting(q);
    for (const auto& r : v.call_rules()) {
      next_[r.from * letters_ + index(r.letter)] = r.to;
      push_[r.from * letters_ + index(r.letter)] = r.push;
    }
    for (const auto& r : v.internal_rules()) next_[r.from * letters_ + index(r.letter)] = r.to;
    for (const auto& r : v.return_rules()) ret_[(r.from * letters_ + index(r.letter)) * symbols_ + r.pop] = r.to;
  }

  const PartitionedAlphabet& alphabet() const noexcept { return alphabet_; }

  /// Membership of the concatenation of the given words.
  bool accepts(std::initializer_list<const Word*> parts) const {
    thread_local std::vector<StackSymbol> stack;
    stack.clear();
    State q = start_;
    for (const Word* w : parts) {
      for (Letter a : *w) {
        const std::size_t k = q * letters_ + index(a);
        switch (kind_[index(a)]) {
          case LetterKind::internal: q = next_[k]; break;
          case LetterKind::call:
            if (next_[k] != dead) stack.push_back(push_[k]);
            q = next_[k];
            break;
          case LetterKind::ret: {
            StackSymbol top = stack.empty() ? bottom : stack.back();
            q = ret_[k * symbols_ + top];
            if (!stack.empty()) stack.pop_back();
            break;
          }
        }
        if (q == dead) return false;
      }
    }
    return accepting_[q];
  }
  bool accepts(const Word& w) const { return accepts({&w}); }

 private:
  static constexpr State dead = State(-1);
  PartitionedAlphabet alphabet_;
  std::size_t letters_, symbols_;
  State start_ = 0;
  std::vector<LetterKind> kind_;
  std::vector<bool> accepting_;
  std::vector<State> next_;
  std::vector<StackSymbol> push_;
  std::vector<State> ret_;
};

// ---------------------------------------------------------------------------
// Emptiness

struct EmptinessResult {
  bool empty = true;
  std::optional<Word> witness;  // shortlex-least accepted word when nonempty
};

namespace detail {

inline bool improves(const std::optional<Word>& cur, const Word& cand) {
  return !cur || shortlex_less(cand, *cur);
}

/// best[p][q]: shortlex-least well-matched word leading from p to q.
inline std::vector<std::vector<std::optional<Word>>> well_matched_summaries(const Vpa& v) {
  const std::size_t n = v.num_states();
  std::vector<std::vector<std::optional<Word>>> best(n, std::vector<std::optional<Word>>(n));
  for (State q = 0; q < n; ++q) best[q][q] = Word{};
  // matched blocks keyed (q1, q4) candidate via (call rule, return rule) pairs sharing a symbol
  std::vector<std::vector<ReturnRule>> returns_by_symbol(v.num_stack_symbols());
  for (const auto& r : v.return_rules())
    if (r.pop != bottom) returns_by_symbol[r.pop].push_back(r);
  bool changed = true;
  while (changed) {
    changed = false;
    for (State p = 0; p < n; ++p) {
      for (State q = 0; q < n; ++q) {
        if (!best[p][q]) continue;
        for (const auto& r : v.internal_rules()) {
          if (r.from != q) continue;
          Word cand = *best[p][q];
          cand.push_back(r.letter);
          if (improves(best[p][r.to], cand)) {
            best[p][r.to] = std::move(cand);
            changed = true;
          }
        }
      }
    }
    for (const auto& c : v.call_rules()) {
      for (const auto& r : returns_by_symbol[c.push]) {
        if (!best[c.to][r.from]) continue;
        Word block{c.letter};
        block.insert(block.end(), best[c.to][r.from]->begin(), best[c.to][r.from]->end());
        block.push_back(r.letter);
        for (State p = 0; p < n; ++p) {
          if (!best[p][c.from]) continue;
          Word cand = concat(*best[p][c.from], block);
          if (improves(best[p][r.to], cand)) {
            best[p][r.to] = std::move(cand);
            changed = true;
          }
        }
      }
    }
  }
  return best;
}

}  // namespace detail

/// Exact emptiness by saturating well-matched summaries, then closing the
/// top level under ⊥-returns (before any pending call) and pending calls.
inline EmptinessResult is_empty(const Vpa& v) {
  const std::size_t n = v.num_states();
  auto wm = detail::well_matched_summaries(v);
  // node id: phase * n + q; phase 0 = no pending call yet, phase 1 = some pending call
  std::vector<std::optional<Word>> best(2 * n);
  for (State q : v.initials()) best[q] = Word{};
  bool changed = true;
  while (changed) {
    changed = false;
    auto relax = [&](std::size_t node, Word cand) {
      if (detail::improves(best[node], cand)) {
        best[node] = std::move(cand);
        changed = true;
      }
    };
    for (std::size_t phase = 0; phase < 2; ++phase) {
      for (State q = 0; q < n; ++q) {
        const auto& cur = best[phase * n + q];
        if (!cur) continue;
        const Word here = *cur;
        for (State t = 0; t < n; ++t)
          if (t != q && wm[q][t]) relax(phase * n + t, concat(here, *wm[q][t]));
        for (const auto& c : v.call_rules())
          if (c.from == q) {
            Word cand = here;
            cand.push_back(c.letter);
            relax(n + c.to, std::move(cand));
          }
        if (phase == 0)
          for (const auto& r : v.return_rules())
            if (r.from == q && r.pop == bottom) {
              Word cand = here;
              cand.push_back(r.letter);
              relax(r.to, std::move(cand));
            }
      }
    }
  }
  EmptinessResult res;
  for (std::size_t node = 0; node < 2 * n; ++node) {
    State q = static_cast<State>(node % n);
    if (best[node] && v.is_accepting(q) && detail::improves(res.witness, *best[node])) res.witness = best[node];
  }
  res.empty = !res.witness.has_value();
  return res;
}

// ---------------------------------------------------------------------------
// Stack-top tracking

struct TrackedVpa {
  Vpa automaton;
  /// For each state of `automaton`: the original state and the top-k window
  /// of the original stack, topmost first (shorter than k only when the
  /// whole stack above ⊥ is shown).
  std::vector<std::pair<State, std::vector<StackSymbol>>> origin;
};

inline TrackedVpa track_stack_top_detailed(const Vpa& v, std::size_t k) {
  using Window = std::vector<StackSymbol>;
  const auto& A = v.alphabet();
  std::vector<std::pair<State, Window>> states;
  std::map<std::pair<State, Window>, State> state_ids;
  std::vector<std::pair<StackSymbol, Window>> symbols{{bottom, {}}};
  std::map<std::pair<StackSymbol, Window>, StackSymbol> symbol_ids;
  auto state_id = [&](State q, Window w) {
    auto key = std::make_pair(q, std::move(w));
    auto it = state_ids.find(key);
    if (it != state_ids.end()) return it->second;
    State id = static_cast<State>(states.size());
    states.push_back(key);
    state_ids.emplace(std::move(key), id);
    return id;
  };
  auto symbol_id = [&](StackSymbol g, Window w) {
    auto key = std::make_pair(g, std::move(w));
    auto it = symbol_ids.find(key);
    if (it != symbol_ids.end()) return it->second;
    StackSymbol id = static_cast<StackSymbol>(symbols.size());
    symbols.push_back(key);
    symbol_ids.emplace(std::move(key), id);
    return id;
  };
  auto pushed = [&](StackSymbol g, const Window& w) {
    Window out{g};
    out.insert(out.end(), w.begin(), w.end());
    if (out.size() > k) out.resize(k);
    return out;
  };

  std::vector<State> initials;
  for (State q : v.initials()) initials.push_back(state_id(q, {}));

  std::vector<CallRule> calls;
  std::vector<InternalRule> internals;
  std::vector<ReturnRule> returns;
  std::vector<std::size_t> returns_done;
  std::size_t processed = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    while (processed < states.size()) {
      const State id = static_cast<State>(processed++);
      returns_done.push_back(1);
      const auto [q, w] = states[id];
      for (const auto& r : v.internal_rules())
        if (r.from == q) internals.push_back({id, r.letter, state_id(r.to, w)});
      for (const auto& r : v.call_rules())
        if (r.from == q) {
          StackSymbol s = symbol_id(r.push, w);
          calls.push_back({id, r.letter, state_id(r.to, pushed(r.push, w)), s});
        }
      if (w.empty())
        for (const auto& r : v.return_rules())
          if (r.from == q && r.pop == bottom) returns.push_back({id, r.letter, bottom, state_id(r.to, {})});
      changed = true;
    }
    for (State id = 0; id < returns_done.size(); ++id) {
      if (returns_done[id] == symbols.size()) continue;
      const auto [q, w] = states[id];
      for (std::size_t s = returns_done[id]; s < symbols.size(); ++s) {
        const auto [g, below] = symbols[s];
        if (pushed(g, below) != w) continue;
        for (const auto& r : v.return_rules())
          if (r.from == q && r.pop == g) returns.push_back({id, r.letter, static_cast<StackSymbol>(s), state_id(r.to, below)});
      }
      returns_done[id] = symbols.size();
      changed = true;
    }
  }

  std::vector<State> accepts;
  std::vector<std::string> names;
  for (State id = 0; id < states.size(); ++id) {
    const auto& [q, w] = states[id];
    if (v.is_accepting(q)) accepts.push_back(id);
    std::string name = v.state_names()[q] + "|";
    for (std::size_t i = 0; i < w.size(); ++i) name += (i ? "," : "") + v.stack_names()[w[i]];
    names.push_back(std::move(name));
  }
  std::vector<std::string> stack_names{v.stack_names()[0]};
  for (std::size_t s = 1; s < symbols.size(); ++s) {
    std::string name = v.stack_names()[symbols[s].first] + "|";
    for (std::size_t i = 0; i < symbols[s].second.size(); ++i) name += (i ? "," : "") + v.stack_names()[symbols[s].second[i]];
    stack_names.push_back(std::move(name));
  }
  TrackedVpa out{Vpa(A, states.size(), symbols.size(), initials, accepts, std::move(calls), std::move(internals),
                     std::move(returns), std::move(names), std::move(stack_names)),
                 std::move(states)};
  return out;
}

/// Language-equal automaton whose states also record the top k stack symbols.
inline Vpa track_stack_top(const Vpa& v, std::size_t k) { return track_stack_top_detailed(v, k).automaton; }

}  // namespace vpgkit
