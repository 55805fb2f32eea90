#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vpgkit/alphabet.hpp"
#include "vpgkit/error.hpp"
#include "vpgkit/vpa.hpp"

namespace vpgkit {

enum class EquationMode { monoid, group };

constexpr std::string_view to_string(EquationMode m) { return m == EquationMode::monoid ? "monoid" : "group"; }

/// One symbol of an equation side.
struct EqSymbol {
  enum class Kind { constant, variable, inverse_variable } kind;
  std::uint32_t id;  // letter index or variable index
  bool operator==(const EqSymbol&) const = default;
};

/// Constraint on a variable's value, backed by a VPA over the constants.
struct EqConstraint {
  std::shared_ptr<const Vpa> automaton;
  std::string description;
};

/// U = V with per-variable constraints and a search bound. `group` is set in
/// group mode only and then has base `constants`.
struct EquationSystem {
  EquationMode mode = EquationMode::monoid;
  GroupAlphabet group;             // group mode
  PartitionedAlphabet constants;   // letters of both sides and of the values
  std::vector<std::string> variables;
  std::vector<EqSymbol> lhs, rhs;
  std::vector<std::optional<EqConstraint>> constraints;  // per variable
  std::size_t bound = 0;
};

using Assignment = std::vector<Word>;  // value per variable, declaration order

struct SolutionSet {
  std::vector<Assignment> assignments;  // sorted
  std::size_t exhausted_bound = 0;
  bool operator==(const SolutionSet&) const = default;
};

inline bool assignment_less(const Assignment& a, const Assignment& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), shortlex_less);
}

inline Word substitute(const EquationSystem& sys, const std::vector<EqSymbol>& side, const Assignment& sigma) {
  Word out;
  for (const auto& s : side) {
    switch (s.kind) {
      case EqSymbol::Kind::constant: out.push_back(letter_at(s.id)); break;
      case EqSymbol::Kind::variable: out.insert(out.end(), sigma[s.id].begin(), sigma[s.id].end()); break;
      case EqSymbol::Kind::inverse_variable: {
        Word inv = sys.group.invert(sigma[s.id]);
        out.insert(out.end(), inv.begin(), inv.end());
        break;
      }
    }
  }
  return out;
}

/// Re-checks one assignment from scratch: bound, constraints, equality.
inline bool satisfies(const EquationSystem& sys, const Assignment& sigma) {
  for (std::size_t v = 0; v < sys.variables.size(); ++v) {
    if (sigma[v].size() > sys.bound) return false;
    if (sys.mode == EquationMode::group && !is_reduced(sys.group, sigma[v])) return false;
    if (sys.constraints[v] && !accepts(*sys.constraints[v]->automaton, sigma[v])) return false;
  }
  Word u = substitute(sys, sys.lhs, sigma), w = substitute(sys, sys.rhs, sigma);
  if (sys.mode == EquationMode::group) return free_reduce(sys.group, u) == free_reduce(sys.group, w);
  return u == w;
}

/// Candidate values are all words (monoid mode) or reduced words, one per
/// element (group mode), filtered by their constraints.
inline SolutionSet solve_bounded(const EquationSystem& sys) {
  std::vector<std::vector<Word>> candidates(sys.variables.size());
  const std::vector<Word> all = sys.mode == EquationMode::group ? reduced_words_up_to(sys.group, sys.bound)
                                                                : words_up_to(sys.constants.size(), sys.bound);
  for (std::size_t v = 0; v < sys.variables.size(); ++v)
    for (const auto& w : all)
      if (!sys.constraints[v] || accepts(*sys.constraints[v]->automaton, w)) candidates[v].push_back(w);
  SolutionSet out;
  out.exhausted_bound = sys.bound;
  Assignment sigma(sys.variables.size());
  std::function<void(std::size_t)> go = [&](std::size_t v) {
    if (v == sys.variables.size()) {
      Word u = substitute(sys, sys.lhs, sigma), w = substitute(sys, sys.rhs, sigma);
      bool eq = sys.mode == EquationMode::group ? free_reduce(sys.group, u) == free_reduce(sys.group, w) : u == w;
      if (eq) out.assignments.push_back(sigma);
      return;
    }
    for (const auto& w : candidates[v]) {
      sigma[v] = w;
      go(v + 1);
    }
  };
  go(0);
  std::sort(out.assignments.begin(), out.assignments.end(), assignment_less);
  return out;
}

/// Σ = X ∪ X⁻¹ with X in its original order followed by the inverses, which
/// are internal and spelled in uppercase (or with a trailing '-').
inline GroupAlphabet free_group_over(const PartitionedAlphabet& x) {
  std::vector<std::pair<std::string, LetterKind>> letters;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (Letter l : x.letters()) letters.emplace_back(x.name(l), x.kind(l));
  for (Letter l : x.letters()) {
    std::string up = x.name(l);
    for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (up == x.name(l) || x.find(up)) up = x.name(l) + "-";
    letters.emplace_back(up, LetterKind::internal);
    pairs.emplace_back(x.name(l), up);
  }
  return GroupAlphabet::make(PartitionedAlphabet::from_letters(std::move(letters)), pairs);
}

/// Same automaton over a larger alphabet whose first letters are the
/// original ones; the new letters have no transitions.
inline Vpa widen_alphabet(const Vpa& v, const PartitionedAlphabet& wider) {
  for (Letter l : v.alphabet().letters())
    if (!wider.contains(l) || wider.name(l) != v.alphabet().name(l) || wider.kind(l) != v.alphabet().kind(l))
      throw Error(ErrorCode::PartitionMismatch, "alphabet is not an extension");
  return Vpa(wider, v.num_states(), v.num_stack_symbols(), v.initials(), v.accepts(), v.call_rules(),
             v.internal_rules(), v.return_rules(), v.state_names(), v.stack_names());
}

/// X* over Σ as a one-state automaton.
inline Vpa positive_words_vpa(const GroupAlphabet& g) {
  const auto& A = g.base();
  std::vector<CallRule> calls;
  std::vector<InternalRule> internals;
  std::vector<ReturnRule> returns;
  for (Letter l : g.positive_letters()) {
    switch (A.kind(l)) {
      case LetterKind::call: calls.push_back({0, l, 0, 1}); break;
      case LetterKind::internal: internals.push_back({0, l, 0}); break;
      case LetterKind::ret:
        returns.push_back({0, l, bottom, 0});
        returns.push_back({0, l, 1, 0});
        break;
    }
  }
  return Vpa(A, 1, 2, {0}, {0}, std::move(calls), std::move(internals), std::move(returns), {"p"},
             {"\xE2\x8A\xA5", "$"});
}

/// Reads the monoid system over F(X); each constraint becomes its
/// intersection with X*. Values are words over X in both readings.
inline EquationSystem encode_monoid_to_group(const EquationSystem& sys) {
  if (sys.mode != EquationMode::monoid) throw Error(ErrorCode::SchemaViolation, "system is already in group mode");
  EquationSystem out = sys;
  out.mode = EquationMode::group;
  out.group = free_group_over(sys.constants);
  out.constants = out.group.base();
  auto positive = std::make_shared<const Vpa>(positive_words_vpa(out.group));
  for (auto& c : out.constraints) {
    if (c)
      c = EqConstraint{std::make_shared<const Vpa>(widen_alphabet(*c->automaton, out.constants)),
                       c->description + " (over X*)"};
    else
      c = EqConstraint{positive, "X*"};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text form: `X a b = a X b ; X in @name ; bound 4 ; mode monoid`. Tokens of
// a side that are declared variables (or, without a `vars` clause, that are
// not words over the alphabet) are variables; `Y^-1` is an inverse
// variable.

using ConstraintResolver = std::function<Vpa(const std::string&)>;

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> tokens(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

}  // namespace detail

/// Group mode needs `group`, whose base must equal `constants`.
inline EquationSystem parse_equation(std::string_view text, const PartitionedAlphabet& constants,
                                     const std::optional<GroupAlphabet>& group,
                                     const ConstraintResolver& resolve = {}) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ParseError, "equation: " + what); };
  auto clauses = detail::split(text, ';');
  EquationSystem sys;
  sys.constants = constants;
  std::optional<std::vector<std::string>> declared;
  std::string equation;
  std::vector<std::pair<std::string, std::string>> constraint_specs;
  for (const auto& raw : clauses) {
    std::string c = detail::trim(raw);
    if (c.empty()) continue;
    auto t = detail::tokens(c);
    if (c.find('=') != std::string::npos) {
      if (!equation.empty()) fail("more than one equation");
      equation = c;
    } else if (t[0] == "bound") {
      if (t.size() != 2) fail("bound takes one number");
      try {
        sys.bound = std::stoul(t[1]);
      } catch (const std::exception&) {
        fail("bad bound '" + t[1] + "'");
      }
    } else if (t[0] == "mode") {
      if (t.size() != 2 || (t[1] != "monoid" && t[1] != "group")) fail("mode is monoid or group");
      sys.mode = t[1] == "monoid" ? EquationMode::monoid : EquationMode::group;
    } else if (t[0] == "vars") {
      declared = std::vector<std::string>(t.begin() + 1, t.end());
    } else if (t.size() == 3 && t[1] == "in") {
      constraint_specs.emplace_back(t[0], t[2]);
    } else {
      fail("unrecognised clause '" + c + "'");
    }
  }
  if (equation.empty()) fail("no equation");
  const bool group_mode = sys.mode == EquationMode::group;
  if (group_mode) {
    if (!group || !(group->base() == constants)) fail("group mode needs an inverse-closed alphabet");
    sys.group = *group;
  }
  auto variable_index = [&](const std::string& name) -> std::uint32_t {
    auto it = std::find(sys.variables.begin(), sys.variables.end(), name);
    if (it != sys.variables.end()) return static_cast<std::uint32_t>(it - sys.variables.begin());
    sys.variables.push_back(name);
    return static_cast<std::uint32_t>(sys.variables.size() - 1);
  };
  if (declared)
    for (const auto& v : *declared) variable_index(v);
  auto parse_side = [&](const std::string& side) {
    std::vector<EqSymbol> out;
    for (const auto& tok : detail::tokens(side)) {
      std::string name = tok;
      bool inverse = false;
      if (name.size() > 3 && name.ends_with("^-1")) {
        name.resize(name.size() - 3);
        inverse = true;
      }
      bool is_var = declared ? std::find(declared->begin(), declared->end(), name) != declared->end() : false;
      if (!declared) {
        try {
          if (group_mode)
            parse_word(sys.group, tok);
          else
            parse_word(constants, tok);
        } catch (const Error&) {
          is_var = true;
        }
      }
      if (is_var) {
        if (inverse && !group_mode) fail("inverse variable '" + tok + "' in monoid mode");
        out.push_back({inverse ? EqSymbol::Kind::inverse_variable : EqSymbol::Kind::variable, variable_index(name)});
        continue;
      }
      Word w = group_mode ? parse_word(sys.group, tok) : parse_word(constants, tok);
      for (Letter l : w) out.push_back({EqSymbol::Kind::constant, index(l)});
    }
    return out;
  };
  auto sides = detail::split(equation, '=');
  if (sides.size() != 2) fail("equation needs exactly one '='");
  sys.lhs = parse_side(sides[0]);
  sys.rhs = parse_side(sides[1]);
  sys.constraints.assign(sys.variables.size(), std::nullopt);
  for (const auto& [var, spec] : constraint_specs) {
    auto it = std::find(sys.variables.begin(), sys.variables.end(), var);
    if (it == sys.variables.end()) fail("constraint on unknown variable '" + var + "'");
    std::shared_ptr<const Vpa> a;
    if (spec == "positive") {
      if (!group_mode) fail("'positive' constraints need group mode");
      a = std::make_shared<const Vpa>(positive_words_vpa(sys.group));
    } else if (!spec.empty() && spec[0] == '@') {
      if (!resolve) fail("no resolver for '" + spec + "'");
      a = std::make_shared<const Vpa>(resolve(spec.substr(1)));
    } else {
      fail("constraint must be @name or positive");
    }
    if (!(a->alphabet() == sys.constants)) throw Error(ErrorCode::PartitionMismatch, "constraint alphabet differs");
    sys.constraints[static_cast<std::size_t>(it - sys.variables.begin())] = EqConstraint{a, spec};
  }
  return sys;
}

inline std::string format_assignment(const EquationSystem& sys, const Assignment& a) {
  std::string out;
  for (std::size_t v = 0; v < sys.variables.size(); ++v) {
    if (v) out += ", ";
    out += sys.variables[v] + "=" + format_word(sys.constants, a[v]);
  }
  return out;
}

}  // namespace vpgkit
