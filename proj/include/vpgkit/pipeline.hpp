#pragma once

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "vpgkit/alphabet.hpp"
#include "vpgkit/builders.hpp"
#include "vpgkit/congruence.hpp"
#include "vpgkit/dfa.hpp"
#include "vpgkit/equations.hpp"
#include "vpgkit/error.hpp"
#include "vpgkit/io.hpp"
#include "vpgkit/recognisable.hpp"
#include "vpgkit/stallings.hpp"
#include "vpgkit/vpa.hpp"
#include "vpgkit/vpa_ops.hpp"

namespace vpgkit {

/// Finite word set, kept sorted in shortlex order without duplicates.
struct WordSet {
  PartitionedAlphabet alphabet;
  std::vector<Word> words;

  static WordSet make(PartitionedAlphabet a, std::vector<Word> ws) {
    for (const auto& w : ws) a.check(w);
    std::sort(ws.begin(), ws.end(), shortlex_less);
    ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
    return {std::move(a), std::move(ws)};
  }
  bool contains(const Word& w) const { return std::binary_search(words.begin(), words.end(), w, shortlex_less); }
};

struct Solutions {
  EquationSystem system;
  SolutionSet solutions;
};

using Artifact = std::variant<AlphabetSpec, Vpa, Dfa, CoreGraph, CayleyTable, WordSet, LangOracle, CosetUnion,
                              EquationSystem, Solutions>;

inline std::string_view artifact_kind(const Artifact& a) {
  static constexpr std::string_view names[] = {"alphabet", "vpa", "dfa", "graph", "cayley",
                                               "words", "oracle", "cosets", "equation", "solutions"};
  return names[a.index()];
}

/// Named artifacts; names are unique.
class Workspace {
 public:
  void add(const std::string& name, Artifact a) {
    if (!items_.emplace(name, std::move(a)).second)
      throw Error(ErrorCode::DuplicateArtifact, "'" + name + "' is already defined");
  }

  const Artifact& get(const std::string& name) const {
    auto it = items_.find(name);
    if (it == items_.end()) throw Error(ErrorCode::UnknownArtifact, "'" + name + "' is not defined");
    return it->second;
  }

  template <class T>
  const T& as(const std::string& name, std::string_view want) const {
    const Artifact& a = get(name);
    if (const T* p = std::get_if<T>(&a)) return *p;
    throw Error(ErrorCode::UnknownArtifact,
                "'" + name + "' is a " + std::string(artifact_kind(a)) + ", expected " + std::string(want));
  }

  bool contains(const std::string& name) const { return items_.count(name) > 0; }
  std::size_t size() const noexcept { return items_.size(); }

 private:
  std::map<std::string, Artifact> items_;
};

struct PipelineReport {
  std::string text;
  std::size_t passed = 0;
  std::size_t failed = 0;
  bool aborted = false;
  bool ok() const noexcept { return failed == 0 && !aborted; }
};

namespace detail {

/// Whitespace-separated tokens; double quotes group, '#' starts a comment.
inline std::vector<std::string> script_tokens(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false, have = false;
  for (char c : line) {
    if (quoted) {
      if (c == '"')
        quoted = false;
      else
        cur += c;
    } else if (c == '"') {
      quoted = have = true;
    } else if (c == '#') {
      break;
    } else if (is_space(c)) {
      if (have) out.push_back(cur);
      cur.clear();
      have = false;
    } else {
      cur += c;
      have = true;
    }
  }
  if (quoted) throw Error(ErrorCode::ParseError, "unterminated quote");
  if (have) out.push_back(cur);
  return out;
}

inline std::size_t comment_start(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return i;
  }
  return line.size();
}

inline std::size_t to_size(const std::string& s) {
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty() || s[0] == '-') throw Error(ErrorCode::ParseError, "expected a number, got '" + s + "'");
  return v;
}

inline CongruenceKind parse_kind(const std::string& s) {
  if (s == "equiv") return CongruenceKind::equiv;
  if (s == "sim0") return CongruenceKind::sim0;
  if (s == "approx") return CongruenceKind::approx;
  throw Error(ErrorCode::ParseError, "congruence kind is equiv, sim0 or approx, got '" + s + "'");
}

inline ErrorCode parse_error_code(const std::string& s) {
  for (int c = 0; c <= static_cast<int>(ErrorCode::DuplicateArtifact); ++c)
    if (to_string(static_cast<ErrorCode>(c)) == s) return static_cast<ErrorCode>(c);
  throw Error(ErrorCode::ParseError, "unknown error code '" + s + "'");
}

/// Pattern tokens: `w` (literal), `w^n`, `w^kn`, parentheses optional.
inline std::vector<PatternBlock> parse_pattern(const PartitionedAlphabet& a, const std::string& text) {
  std::vector<PatternBlock> out;
  for (const auto& tok : tokens(text)) {
    std::string word = tok;
    std::size_t mult = 0;
    if (auto caret = tok.rfind('^'); caret != std::string::npos && tok.back() == 'n') {
      word = tok.substr(0, caret);
      std::string k = tok.substr(caret + 1, tok.size() - caret - 2);
      mult = k.empty() ? 1 : to_size(k);
    }
    if (word.size() >= 2 && word.front() == '(' && word.back() == ')') word = word.substr(1, word.size() - 2);
    out.push_back({parse_word(a, word), mult});
  }
  return out;
}

inline std::string format_set(const WordSet& s, std::size_t limit = 12) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.words.size() && i < limit; ++i) {
    if (i) out += ", ";
    out += format_word(s.alphabet, s.words[i]);
  }
  if (s.words.size() > limit) out += ", ...";
  return out + "}";
}

inline std::string format_context(const PartitionedAlphabet& a, CongruenceKind k, const Context& c) {
  if (k != CongruenceKind::approx) return format_word(a, c.right);
  return format_word(a, c.left) + "|" + format_word(a, c.right);
}

inline std::string join(const std::vector<std::size_t>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

}  // namespace detail

/// Executes pipeline scripts against a workspace. Paths are resolved
/// against `base_dir`.
class PipelineRunner {
 public:
  explicit PipelineRunner(std::filesystem::path base_dir = ".") : base_(std::move(base_dir)) {}

  const Workspace& workspace() const noexcept { return ws_; }

  PipelineReport run(std::string_view script) {
    PipelineReport r;
    std::ostringstream out;
    std::istringstream in{std::string(script)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::vector<std::string> t;
      try {
        t = detail::script_tokens(line);
      } catch (const Error& e) {
        out << "line " << lineno << ": abort: " << e.what() << "\n";
        r.aborted = true;
        break;
      }
      if (t.empty()) continue;
      const std::string stmt = detail::trim(line.substr(0, detail::comment_start(line)));
      try {
        if (t[0] == "expect") {
          std::string detail_msg;
          bool pass = expect({t.begin() + 1, t.end()}, detail_msg);
          (pass ? r.passed : r.failed)++;
          out << "line " << lineno << ": " << (pass ? "PASS" : "FAIL") << " " << stmt;
          if (!detail_msg.empty()) out << " [" << detail_msg << "]";
          out << "\n";
        } else {
          std::string summary = execute(t);
          out << "line " << lineno << ": " << stmt;
          if (!summary.empty()) out << " => " << summary;
          out << "\n";
        }
      } catch (const Error& e) {
        out << "line " << lineno << ": abort: " << stmt << " => " << e.what() << "\n";
        r.aborted = true;
        break;
      }
    }
    if (r.passed + r.failed > 0 || r.aborted)
      out << "summary: " << r.passed << " passed, " << r.failed << " failed" << (r.aborted ? ", aborted" : "") << "\n";
    r.text = out.str();
    return r;
  }

 private:
  using Args = std::vector<std::string>;

  static void arity(const Args& a, std::size_t lo, std::size_t hi, const char* usage) {
    if (a.size() < lo || a.size() > hi) throw Error(ErrorCode::ParseError, std::string("usage: ") + usage);
  }

  std::string path(const std::string& p) const { return (base_ / p).lexically_normal().string(); }

  const PartitionedAlphabet& alphabet_of(const std::string& name) const {
    const Artifact& a = ws_.get(name);
    return std::visit(
        [&](const auto& x) -> const PartitionedAlphabet& {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, AlphabetSpec>) return x.base;
          else if constexpr (std::is_same_v<T, Vpa>) return x.alphabet();
          else if constexpr (std::is_same_v<T, Dfa> || std::is_same_v<T, WordSet> || std::is_same_v<T, LangOracle>)
            return x.alphabet;
          else if constexpr (std::is_same_v<T, CoreGraph> || std::is_same_v<T, CayleyTable>)
            return x.alphabet().base();
          else if constexpr (std::is_same_v<T, CosetUnion>) return x.alphabet.base();
          else if constexpr (std::is_same_v<T, EquationSystem>) return x.constants;
          else return x.system.constants;
        },
        a);
  }

  const GroupAlphabet& group_of(const std::string& name) const {
    const Artifact& a = ws_.get(name);
    if (auto* s = std::get_if<AlphabetSpec>(&a)) return s->require_group();
    if (auto* g = std::get_if<CoreGraph>(&a)) return g->alphabet();
    if (auto* c = std::get_if<CayleyTable>(&a)) return c->alphabet();
    if (auto* c = std::get_if<CosetUnion>(&a)) return c->alphabet;
    throw Error(ErrorCode::UnknownArtifact, "'" + name + "' carries no group alphabet");
  }

  /// Membership predicate of any artifact that denotes a language.
  std::function<bool(const Word&)> member(const std::string& name) const {
    const Artifact& a = ws_.get(name);
    if (auto* v = std::get_if<Vpa>(&a)) {
      auto o = std::make_shared<LangOracle>(oracle_from_vpa(*v));
      return [o](const Word& w) { return (*o)(w); };
    }
    if (auto* d = std::get_if<Dfa>(&a)) return [d](const Word& w) { return d->accepts(w); };
    if (auto* g = std::get_if<CoreGraph>(&a)) return [g](const Word& w) { return subgroup_membership(*g, w); };
    if (auto* c = std::get_if<CayleyTable>(&a)) return [c](const Word& w) { return c->evaluate(w) == c->identity(); };
    if (auto* s = std::get_if<WordSet>(&a)) return [s](const Word& w) { return s->contains(w); };
    if (auto* o = std::get_if<LangOracle>(&a)) return [o](const Word& w) { return (*o)(w); };
    if (auto* c = std::get_if<CosetUnion>(&a)) {
      auto d = std::make_shared<Dfa>(to_dfa(*c));
      return [d](const Word& w) { return d->accepts(w); };
    }
    throw Error(ErrorCode::UnknownArtifact, "'" + name + "' is a " + std::string(artifact_kind(a)) + ", not a language");
  }

  Word word(const std::string& artifact, const std::string& text) const {
    const Artifact& a = ws_.get(artifact);
    if (auto* s = std::get_if<AlphabetSpec>(&a); s && s->group) return parse_word(*s->group, text);
    if (std::holds_alternative<CoreGraph>(a) || std::holds_alternative<CayleyTable>(a) ||
        std::holds_alternative<CosetUnion>(a))
      return parse_word(group_of(artifact), text);
    return parse_word(alphabet_of(artifact), text);
  }

  std::vector<Word> words(const std::string& artifact, Args::const_iterator b, Args::const_iterator e) const {
    std::vector<Word> out;
    for (; b != e; ++b) out.push_back(word(artifact, *b));
    return out;
  }

  static std::string describe(const Artifact& a) {
    return std::visit(
        [](const auto& x) -> std::string {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, AlphabetSpec>)
            return "alphabet of " + std::to_string(x.base.size()) + " letters" + (x.group ? ", inverse-closed" : "");
          else if constexpr (std::is_same_v<T, Vpa>)
            return "vpa with " + std::to_string(x.num_states()) + " states, " + std::to_string(x.num_stack_symbols()) +
                   " stack symbols";
          else if constexpr (std::is_same_v<T, Dfa>)
            return "dfa with " + std::to_string(x.num_states) + " states";
          else if constexpr (std::is_same_v<T, CoreGraph>)
            return "core graph with " + std::to_string(x.num_vertices()) + " vertices, " +
                   std::to_string(x.edges().size()) + " edges";
          else if constexpr (std::is_same_v<T, CayleyTable>)
            return "group of order " + std::to_string(x.size());
          else if constexpr (std::is_same_v<T, WordSet>)
            return std::to_string(x.words.size()) + " words " + detail::format_set(x);
          else if constexpr (std::is_same_v<T, LangOracle>)
            return "oracle " + x.description;
          else if constexpr (std::is_same_v<T, CosetUnion>)
            return "kernel index " + std::to_string(x.normal_subgroup_index) + ", " +
                   std::to_string(x.coset_representatives.size()) + " cosets";
          else if constexpr (std::is_same_v<T, EquationSystem>)
            return std::string(to_string(x.mode)) + " equation in " + std::to_string(x.variables.size()) +
                   " variables, bound " + std::to_string(x.bound);
          else
            return std::to_string(x.solutions.assignments.size()) + " solutions up to bound " +
                   std::to_string(x.solutions.exhausted_bound);
        },
        a);
  }

  // ---- statements --------------------------------------------------------

  std::string execute(const Args& t) {
    if (t[0] == "load") {
      arity(t, 4, 4, "load NAME KIND PATH");
      ws_.add(t[1], load(t[2], t[3]));
      return describe(ws_.get(t[1]));
    }
    if (t[0] == "let") {
      if (t.size() < 4 || t[2] != "=") throw Error(ErrorCode::ParseError, "usage: let NAME = OP ARGS...");
      Artifact a = operation({t.begin() + 3, t.end()});
      std::string d = describe(a);
      ws_.add(t[1], std::move(a));
      return d;
    }
    if (t[0] == "show") {
      arity(t, 2, 2, "show NAME");
      return show(t[1]);
    }
    throw Error(ErrorCode::ParseError, "unknown statement '" + t[0] + "'");
  }

  Artifact load(const std::string& kind, const std::string& file) const {
    Json j = load_json_file(path(file));
    if (kind == "alphabet") return alphabet_from_json(j);
    if (kind == "vpa") return vpa_from_json(j);
    if (kind == "dfa") return dfa_from_json(j);
    if (kind == "graph") return core_graph_from_json(j);
    if (kind == "cayley") return cayley_from_json(j);
    throw Error(ErrorCode::ParseError, "unknown artifact kind '" + kind + "'");
  }

  std::string show(const std::string& name) const {
    const Artifact& a = ws_.get(name);
    if (auto* s = std::get_if<WordSet>(&a)) return detail::format_set(*s, s->words.size());
    if (auto* c = std::get_if<CosetUnion>(&a)) {
      WordSet reps = WordSet::make(c->alphabet.base(), c->coset_representatives);
      return "representatives " + detail::format_set(reps, reps.words.size());
    }
    if (auto* s = std::get_if<Solutions>(&a)) {
      std::string out;
      for (const auto& x : s->solutions.assignments) out += (out.empty() ? "" : "; ") + format_assignment(s->system, x);
      return out.empty() ? "no solutions" : out;
    }
    if (auto* g = std::get_if<CoreGraph>(&a)) {
      std::string out;
      for (const auto& e : g->edges())
        out += (out.empty() ? "" : " ") + std::to_string(e.source) + "-" + g->alphabet().base().name(e.label) + "->" +
               std::to_string(e.target);
      return out.empty() ? "no edges" : out;
    }
    return describe(a);
  }

  Artifact operation(const Args& t) const {
    const std::string& op = t[0];
    auto vpa = [&](std::size_t i) -> const Vpa& { return ws_.as<Vpa>(t.at(i), "vpa"); };
    if (op == "union") return arity(t, 3, 3, "union A B"), union_of(vpa(1), vpa(2));
    if (op == "intersect") return arity(t, 3, 3, "intersect A B"), intersection(vpa(1), vpa(2));
    if (op == "complement") return arity(t, 2, 2, "complement A"), complement(vpa(1));
    if (op == "concat") return arity(t, 3, 3, "concat A B"), concat(vpa(1), vpa(2));
    if (op == "star") return arity(t, 2, 2, "star A"), star(vpa(1));
    if (op == "determinize") return arity(t, 2, 2, "determinize A"), determinize(vpa(1));
    if (op == "trim") return arity(t, 2, 2, "trim A"), trim(vpa(1));
    if (op == "track") return arity(t, 3, 3, "track A K"), track_stack_top(vpa(1), detail::to_size(t[2]));
    if (op == "rename") {
      arity(t, 3, 1000, "rename A TARGET x->y...");
      std::map<std::string, std::string> m;
      for (std::size_t i = 3; i < t.size(); ++i) {
        auto arrow = t[i].find("->");
        if (arrow == std::string::npos) throw Error(ErrorCode::ParseError, "renaming entries are x->y");
        m[t[i].substr(0, arrow)] = t[i].substr(arrow + 2);
      }
      const Vpa& v = vpa(1);
      return rename(v, Renaming::by_name(v.alphabet(), alphabet_of(t[2]), m));
    }
    if (op == "quotient") {
      arity(t, 4, 4, "quotient left|right A WORDS");
      if (t[1] != "left" && t[1] != "right") throw Error(ErrorCode::ParseError, "quotient side is left or right");
      return quotient_finite(vpa(2), ws_.as<WordSet>(t[3], "words").words, t[1] == "left" ? Side::left : Side::right);
    }
    if (op == "universal") return arity(t, 2, 2, "universal ALPHABET"), universal_vpa(alphabet_of(t[1]));
    if (op == "nothing") return arity(t, 2, 2, "nothing ALPHABET"), empty_vpa(alphabet_of(t[1]));
    if (op == "epsilon") return arity(t, 2, 2, "epsilon ALPHABET"), epsilon_vpa(alphabet_of(t[1]));
    if (op == "finite") {
      arity(t, 2, 2, "finite WORDS");
      const auto& s = ws_.as<WordSet>(t[1], "words");
      return finite_language_vpa(s.alphabet, s.words);
    }
    if (op == "lift") return arity(t, 2, 2, "lift DFA"), to_vpa(ws_.as<Dfa>(t[1], "dfa"));

    if (op == "words") {
      arity(t, 2, 100000, "words ALPHABET w...");
      return WordSet::make(alphabet_of(t[1]), words(t[1], t.begin() + 2, t.end()));
    }
    if (op == "enum") {
      arity(t, 3, 3, "enum LANGUAGE N");
      const auto& A = alphabet_of(t[1]);
      const std::size_t n = detail::to_size(t[2]);
      if (auto* v = std::get_if<Vpa>(&ws_.get(t[1]))) return WordSet::make(A, enumerate_language(*v, n));
      auto m = member(t[1]);
      std::vector<Word> out;
      for_each_word(A.size(), n, [&](const Word& w) {
        if (m(w)) out.push_back(w);
        return true;
      });
      return WordSet::make(A, std::move(out));
    }
    if (op == "reduce") {
      arity(t, 3, 3, "reduce GROUP WORDS");
      const auto& g = group_of(t[1]);
      const auto& s = ws_.as<WordSet>(t[2], "words");
      if (!(s.alphabet == g.base())) throw Error(ErrorCode::PartitionMismatch, "word set is over another alphabet");
      std::vector<Word> out;
      for (const auto& w : s.words) out.push_back(free_reduce(g, w));
      return WordSet::make(g.base(), std::move(out));
    }
    if (op == "pattern") {
      arity(t, 4, 4, "pattern ALPHABET N PATTERN");
      const auto& A = alphabet_of(t[1]);
      auto blocks = detail::parse_pattern(A, t[3]);
      return WordSet::make(A, pattern_words(blocks, detail::to_size(t[2])));
    }

    if (op == "oracle") {
      arity(t, 3, 4, "oracle vpa|words|pattern|all|expsum|wp NAME [ARG]");
      const std::string& k = t[1];
      if (k == "vpa") return oracle_from_vpa(vpa(2), "vpa " + t[2]);
      if (k == "words") {
        const auto& s = ws_.as<WordSet>(t[2], "words");
        return oracle_from_words(s.alphabet, s.words, "words " + t[2]);
      }
      if (k == "pattern") {
        arity(t, 4, 4, "oracle pattern ALPHABET PATTERN");
        return oracle_pattern(alphabet_of(t[2]), detail::parse_pattern(alphabet_of(t[2]), t[3]), "pattern " + t[3]);
      }
      if (k == "all") return oracle_all(alphabet_of(t[2]));
      if (k == "expsum") {
        arity(t, 4, 4, "oracle expsum GROUP LETTER");
        const auto& g = group_of(t[2]);
        return oracle_exponent_sum_zero(g, g.base().letter(t[3]));
      }
      if (k == "wp") return oracle_free_word_problem(group_of(t[2]));
      throw Error(ErrorCode::ParseError, "unknown oracle kind '" + k + "'");
    }

    if (op == "core") {
      arity(t, 2, 1000, "core GROUP gen...");
      const auto& g = group_of(t[1]);
      return build_core_graph(g, words(t[1], t.begin() + 2, t.end()));
    }
    if (op == "preimage") return arity(t, 2, 2, "preimage GRAPH"), preimage_dfa(ws_.as<CoreGraph>(t[1], "graph"));
    if (op == "wpdfa") return arity(t, 2, 2, "wpdfa CAYLEY"), wp_dfa_from_cayley(ws_.as<CayleyTable>(t[1], "cayley"));
    if (op == "cyclic") {
      arity(t, 4, 4, "cyclic GROUP N LETTER");
      return cyclic_group(detail::to_size(t[2]), group_of(t[1]), t[3]);
    }
    if (op == "cosets") {
      arity(t, 3, 3, "cosets DFA GROUP");
      return to_coset_representation(ws_.as<Dfa>(t[1], "dfa"), group_of(t[2]));
    }
    if (op == "cosetdfa") return arity(t, 2, 2, "cosetdfa COSETS"), to_dfa(ws_.as<CosetUnion>(t[1], "cosets"));

    if (op == "equation") {
      arity(t, 3, 3, "equation ALPHABET TEXT");
      const Artifact& a = ws_.get(t[1]);
      std::optional<GroupAlphabet> g;
      if (auto* s = std::get_if<AlphabetSpec>(&a)) g = s->group;
      auto resolve = [this](const std::string& n) { return ws_.as<Vpa>(n, "vpa"); };
      return parse_equation(t[2], alphabet_of(t[1]), g, resolve);
    }
    if (op == "solve") {
      arity(t, 2, 2, "solve EQUATION");
      const auto& sys = ws_.as<EquationSystem>(t[1], "equation");
      return Solutions{sys, solve_bounded(sys)};
    }
    if (op == "encode") {
      arity(t, 2, 2, "encode EQUATION");
      return encode_monoid_to_group(ws_.as<EquationSystem>(t[1], "equation"));
    }
    throw Error(ErrorCode::ParseError, "unknown operation '" + op + "'");
  }

  // ---- expectations ------------------------------------------------------

  bool expect(const Args& t, std::string& msg) {
    if (t.empty()) throw Error(ErrorCode::ParseError, "empty expectation");
    const std::string& k = t[0];
    auto vpa = [&](std::size_t i) -> const Vpa& { return ws_.as<Vpa>(t.at(i), "vpa"); };

    if (k == "error") {
      arity(t, 3, 100000, "expect error CODE STATEMENT...");
      const ErrorCode want = detail::parse_error_code(t[1]);
      Args stmt(t.begin() + 2, t.end());
      try {
        if (stmt[0] == "load" || stmt[0] == "let" || stmt[0] == "show") {
          Workspace saved = ws_;
          execute(stmt);
          ws_ = std::move(saved);
        } else {
          operation(stmt);
        }
      } catch (const Error& e) {
        msg = e.what();
        return e.code() == want;
      }
      msg = "no error raised";
      return false;
    }
    if (k == "accepts" || k == "rejects") {
      arity(t, 3, 100000, "expect accepts|rejects LANGUAGE w...");
      auto m = member(t[1]);
      for (std::size_t i = 2; i < t.size(); ++i)
        if (m(word(t[1], t[i])) != (k == "accepts")) {
          msg = "'" + t[i] + "' is " + (k == "accepts" ? "rejected" : "accepted");
          return false;
        }
      return true;
    }
    if (k == "valid") {
      arity(t, 2, 2, "expect valid VPA");
      auto rep = validate(vpa(1));
      msg = rep.summary();
      return rep.ok();
    }
    if (k == "violation") {
      arity(t, 3, 3, "expect violation PATH KIND");
      auto rep = validate(vpa_description_from_json(load_json_file(path(t[1]))));
      msg = rep.summary();
      for (const auto& v : rep.violations)
        if (to_string(v.kind) == t[2]) return true;
      return false;
    }
    if (k == "deterministic") {
      arity(t, 2, 2, "expect deterministic VPA");
      return is_deterministic(vpa(1)) && is_complete(vpa(1));
    }
    if (k == "empty" || k == "nonempty") {
      arity(t, 2, k == "empty" ? 2 : 4, "expect empty VPA | expect nonempty VPA [witness w]");
      auto r = is_empty(vpa(1));
      if (r.witness) msg = "witness " + format_word(vpa(1).alphabet(), *r.witness);
      if (k == "empty") return r.empty;
      if (r.empty) return false;
      if (t.size() == 4) {
        if (t[2] != "witness") throw Error(ErrorCode::ParseError, "expected 'witness'");
        return *r.witness == word(t[1], t[3]);
      }
      return true;
    }
    if (k == "equivalent" || k == "inequivalent") {
      arity(t, 3, k == "equivalent" ? 3 : 5, "expect equivalent A B | expect inequivalent A B [counterexample w]");
      auto r = equivalent(vpa(1), vpa(2));
      if (r.counterexample) msg = "counterexample " + format_word(vpa(1).alphabet(), *r.counterexample);
      if (k == "equivalent") return r.equivalent;
      if (r.equivalent) return false;
      if (t.size() == 5) {
        if (t[3] != "counterexample") throw Error(ErrorCode::ParseError, "expected 'counterexample'");
        return *r.counterexample == word(t[1], t[4]);
      }
      return true;
    }
    if (k == "agree") {
      arity(t, 4, 4, "expect agree A B N");
      const auto& A = alphabet_of(t[1]);
      if (!(A == alphabet_of(t[2]))) throw Error(ErrorCode::PartitionMismatch, "languages over different alphabets");
      auto m1 = member(t[1]), m2 = member(t[2]);
      std::optional<Word> bad;
      for_each_word(A.size(), detail::to_size(t[3]), [&](const Word& w) {
        if (m1(w) != m2(w)) bad = w;
        return !bad;
      });
      if (bad) msg = "disagree on '" + format_word(A, *bad) + "'";
      return !bad;
    }
    if (k == "same") {
      arity(t, 3, 3, "expect same WORDS WORDS");
      const auto& a = ws_.as<WordSet>(t[1], "words");
      const auto& b = ws_.as<WordSet>(t[2], "words");
      if (a.alphabet == b.alphabet && a.words == b.words) return true;
      for (const auto& w : a.words)
        if (!b.contains(w)) return msg = "only in " + t[1] + ": " + format_word(a.alphabet, w), false;
      for (const auto& w : b.words)
        if (!a.contains(w)) return msg = "only in " + t[2] + ": " + format_word(b.alphabet, w), false;
      msg = "alphabets differ";
      return false;
    }
    if (k == "count") {
      arity(t, 3, 3, "expect count WORDS N");
      const auto& s = ws_.as<WordSet>(t[1], "words");
      msg = std::to_string(s.words.size()) + " words";
      return s.words.size() == detail::to_size(t[2]);
    }
    if (k == "classes") {
      arity(t, 7, 7, "expect classes ORACLE KIND WORD_BOUND CONTEXT_BOUND =|>= N");
      const auto& L = ws_.as<LangOracle>(t[1], "oracle");
      auto table = explore_classes(L, detail::parse_kind(t[2]), detail::to_size(t[3]), detail::to_size(t[4]));
      const std::size_t n = detail::to_size(t[6]);
      msg = std::to_string(table.count()) + " classes";
      if (t[5] == "=") return table.count() == n;
      if (t[5] == ">=") return table.count() >= n;
      throw Error(ErrorCode::ParseError, "comparison is = or >=");
    }
    if (k == "profile") {
      arity(t, 5, 6, "expect profile ORACLE KIND MAX increasing | constant-from B | equals LIST");
      const auto& L = ws_.as<LangOracle>(t[1], "oracle");
      auto p = growth_profile(L, detail::parse_kind(t[2]), detail::to_size(t[3]));
      msg = "profile " + detail::join(p);
      if (t[4] == "increasing") {
        for (std::size_t i = 1; i < p.size(); ++i)
          if (p[i] <= p[i - 1]) return false;
        return true;
      }
      if (t[4] == "constant-from") {
        arity(t, 6, 6, "expect profile ORACLE KIND MAX constant-from B");
        const std::size_t b = detail::to_size(t[5]);
        if (b < 1 || b > p.size()) throw Error(ErrorCode::ParseError, "constant-from bound out of range");
        for (std::size_t i = b; i < p.size(); ++i)
          if (p[i] != p[b - 1]) return false;
        return true;
      }
      if (t[4] == "equals") return arity(t, 6, 6, "expect profile ... equals LIST"), detail::join(p) == t[5];
      throw Error(ErrorCode::ParseError, "profile shape is increasing, constant-from or equals");
    }
    if (k == "distinguish") {
      arity(t, 7, 7, "expect distinguish ORACLE KIND u1 u2 CONTEXT_BOUND CONTEXT|none");
      const auto& L = ws_.as<LangOracle>(t[1], "oracle");
      const auto kind = detail::parse_kind(t[2]);
      auto c = distinguish(L, kind, parse_word(L.alphabet, t[3]), parse_word(L.alphabet, t[4]), detail::to_size(t[5]));
      std::string got = c ? detail::format_context(L.alphabet, kind, *c) : "none";
      msg = "context " + got;
      return got == t[6] || (c && t[6] != "none" && kind != CongruenceKind::approx &&
                             c->right == parse_word(L.alphabet, t[6]));
    }
    if (k == "index") {
      arity(t, 3, 5, "expect index GRAPH finite N | infinite [VERTEX LETTER]");
      const auto& g = ws_.as<CoreGraph>(t[1], "graph");
      auto v = index(g);
      msg = v.finite ? "finite index " + std::to_string(v.index)
                     : "infinite, vertex " + std::to_string(v.vertex) + " lacks " + g.alphabet().base().name(v.missing);
      if (t[2] == "finite") return arity(t, 4, 4, "expect index GRAPH finite N"), v.finite && v.index == detail::to_size(t[3]);
      if (t[2] == "infinite") {
        if (v.finite) return false;
        if (t.size() == 5) return v.vertex == detail::to_size(t[3]) && g.alphabet().base().name(v.missing) == t[4];
        return true;
      }
      throw Error(ErrorCode::ParseError, "index verdict is finite or infinite");
    }
    if (k == "witness") {
      arity(t, 5, 5, "expect witness GRAPH w1 w2 LETTER");
      const auto& g = ws_.as<CoreGraph>(t[1], "graph");
      auto w = infinite_index_witness_language(g);
      const auto& A = g.alphabet().base();
      msg = "w1=" + format_word(A, w.w1) + " w2=" + format_word(A, w.w2) + " a=" + A.name(w.a);
      return w.w1 == word(t[1], t[2]) && w.w2 == word(t[1], t[3]) && A.name(w.a) == t[4];
    }
    if (k == "witness-contract") {
      arity(t, 3, 3, "expect witness-contract GRAPH N");
      const auto& g = ws_.as<CoreGraph>(t[1], "graph");
      auto w = infinite_index_witness_language(g);
      const GroupAlphabet& G = g.alphabet();
      const std::vector<Letter> pair{w.a, G.inverse(w.a)};
      bool ok = true;
      for_each_word(2, detail::to_size(t[2]), [&](const Word& alpha_idx) {
        Word alpha;
        long long sum = 0;
        for (Letter i : alpha_idx) {
          alpha.push_back(pair[index(i)]);
          sum += index(i) == 0 ? 1 : -1;
        }
        if (subgroup_membership(g, concat(concat(w.w1, alpha), w.w2)) != (sum == 0)) {
          msg = "fails at alpha=" + format_word(G, alpha);
          ok = false;
        }
        return ok;
      });
      return ok;
    }
    if (k == "permutation") {
      arity(t, 3, 3, "expect permutation DFA GROUP");
      return is_permutation_dfa(ws_.as<Dfa>(t[1], "dfa"), group_of(t[2]));
    }
    if (k == "cosets") {
      arity(t, 4, 100000, "expect cosets COSETS INDEX rep...");
      const auto& c = ws_.as<CosetUnion>(t[1], "cosets");
      auto reps = WordSet::make(c.alphabet.base(), c.coset_representatives);
      msg = "index " + std::to_string(c.normal_subgroup_index) + ", representatives " +
            detail::format_set(reps, reps.words.size());
      auto want = WordSet::make(c.alphabet.base(), words(t[1], t.begin() + 3, t.end()));
      return c.normal_subgroup_index == detail::to_size(t[2]) && reps.words == want.words;
    }
    if (k == "symmetric" || k == "asymmetric") {
      arity(t, 2, 100000, "expect symmetric GROUP | expect asymmetric GROUP KIND...");
      auto v = is_symmetric_partition(group_of(t[1]));
      const auto& A = group_of(t[1]).base();
      for (const auto& x : v.violations) msg += (msg.empty() ? "" : ", ") + std::string(to_string(x.kind)) + "(" + A.name(x.letter) + ")";
      if (k == "symmetric") return v.symmetric;
      if (v.symmetric) return false;
      for (std::size_t i = 2; i < t.size(); ++i)
        if (std::none_of(v.violations.begin(), v.violations.end(), [&](const auto& x) { return to_string(x.kind) == t[i]; }))
          return false;
      return true;
    }
    if (k == "lift") {
      arity(t, 5, 5, "expect lift GROUP MR|MC w LIFTED");
      const auto& g = group_of(t[1]);
      if (t[2] != "MR" && t[2] != "MC") throw Error(ErrorCode::ParseError, "side is MR or MC");
      const MatchSide side = t[2] == "MR" ? MatchSide::mr : MatchSide::mc;
      const Word w = parse_word(g, t[3]);
      Word out = lift_to_matched(g, w, side);
      auto p = classify_word(g.base(), out);
      msg = "lifted " + format_word(g, out);
      return out == parse_word(g, t[4]) && (side == MatchSide::mr ? p.is_mr : p.is_mc) &&
             torsion_reduce(g, out) == torsion_reduce(g, w);
    }
    if (k == "identity") {
      arity(t, 3, 100000, "expect identity CAYLEY w...");
      const auto& c = ws_.as<CayleyTable>(t[1], "cayley");
      for (std::size_t i = 2; i < t.size(); ++i)
        if (c.evaluate(parse_word(c.alphabet(), t[i])) != c.identity()) return msg = "'" + t[i] + "' is not trivial", false;
      return true;
    }
    if (k == "family") {
      arity(t, 7, 7, "expect family CAYLEY x y m n K");
      const auto& c = ws_.as<CayleyTable>(t[1], "cayley");
      const auto& A = c.alphabet().base();
      const Letter x = A.letter(t[2]), y = A.letter(t[3]);
      const std::size_t m = detail::to_size(t[4]), n = detail::to_size(t[5]);
      if (c.order(c.image(x)) != m || c.order(c.image(y)) != n)
        return msg = "declared orders do not match the group", false;
      for (std::size_t kk = 1; kk <= detail::to_size(t[6]); ++kk) {
        auto [u, v] = wp_witness_family(x, y, m, n, kk);
        if (c.evaluate(u) != c.identity() || c.evaluate(v) != c.identity())
          return msg = "k=" + std::to_string(kk) + " not trivial", false;
      }
      return true;
    }
    if (k == "solutions") {
      arity(t, 3, 100000, "expect solutions SOLUTIONS assignment...");
      const auto& s = ws_.as<Solutions>(t[1], "solutions");
      std::vector<std::string> got;
      for (const auto& a : s.solutions.assignments) got.push_back(format_assignment(s.system, a));
      std::vector<std::string> want(t.begin() + 2, t.end());
      if (want.size() == 1 && want[0] == "none") want.clear();
      std::string all;
      for (const auto& g : got) all += (all.empty() ? "" : "; ") + g;
      msg = all.empty() ? "no solutions" : all;
      if (got != want) return false;
      for (const auto& a : s.solutions.assignments)
        if (!satisfies(s.system, a)) return msg += "; re-check failed", false;
      return true;
    }
    if (k == "same-solutions") {
      arity(t, 3, 3, "expect same-solutions S1 S2");
      const auto& a = ws_.as<Solutions>(t[1], "solutions");
      const auto& b = ws_.as<Solutions>(t[2], "solutions");
      msg = std::to_string(a.solutions.assignments.size()) + " vs " + std::to_string(b.solutions.assignments.size());
      return a.solutions == b.solutions;
    }
    if (k == "dot") {
      arity(t, 3, 3, "expect dot ARTIFACT TEXT");
      const Artifact& a = ws_.get(t[1]);
      std::string dot;
      if (auto* v = std::get_if<Vpa>(&a)) dot = to_dot(*v);
      else if (auto* g = std::get_if<CoreGraph>(&a)) dot = to_dot(*g);
      else if (auto* d = std::get_if<Dfa>(&a)) dot = to_dot(*d);
      else throw Error(ErrorCode::UnknownArtifact, "'" + t[1] + "' has no DOT form");
      return dot.find(t[2]) != std::string::npos;
    }
    if (k == "roundtrip") {
      arity(t, 2, 2, "expect roundtrip ARTIFACT");
      const Artifact& a = ws_.get(t[1]);
      auto again = [](const Json& j, auto parse) { return dump(to_json(parse(parse_json(dump(j))))) == dump(j); };
      if (auto* v = std::get_if<Vpa>(&a)) return again(to_json(*v), vpa_from_json);
      if (auto* d = std::get_if<Dfa>(&a)) return again(to_json(*d), dfa_from_json);
      if (auto* g = std::get_if<CoreGraph>(&a)) return again(to_json(*g), core_graph_from_json);
      if (auto* c = std::get_if<CayleyTable>(&a)) return again(to_json(*c), cayley_from_json);
      if (auto* s = std::get_if<AlphabetSpec>(&a))
        return again(to_json(*s), [](const Json& j) { return alphabet_from_json(j); });
      throw Error(ErrorCode::UnknownArtifact, "'" + t[1] + "' has no file form");
    }
    throw Error(ErrorCode::ParseError, "unknown expectation '" + k + "'");
  }

  std::filesystem::path base_;
  Workspace ws_;
};

inline PipelineReport run_pipeline(std::string_view script, const std::filesystem::path& base_dir = ".") {
  return PipelineRunner(base_dir).run(script);
}

inline PipelineReport run_pipeline_file(const std::string& file) {
  return run_pipeline(detail::read_file(file), std::filesystem::path(file).parent_path());
}

}  // namespace vpgkit
