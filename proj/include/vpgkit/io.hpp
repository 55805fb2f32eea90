#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vpgkit/alphabet.hpp"
#include "vpgkit/dfa.hpp"
#include "vpgkit/error.hpp"
#include "vpgkit/recognisable.hpp"
#include "vpgkit/stallings.hpp"
#include "vpgkit/vpa.hpp"

namespace vpgkit {

using Json = nlohmann::ordered_json;

/// A partition with optional group structure, as stored in alphabet files.
struct AlphabetSpec {
  PartitionedAlphabet base;
  std::optional<GroupAlphabet> group;

  const GroupAlphabet& require_group() const {
    if (!group) throw Error(ErrorCode::InvalidInverse, "alphabet has no inverse pairing");
    return *group;
  }
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
  out << text;
}

/// 1-based line and column of a byte offset.
inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

[[noreturn]] inline void schema(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, where + ": " + what);
}

inline const Json& field(const Json& j, const std::string& where, const char* key) {
  if (!j.is_object()) schema(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) schema(where, std::string("missing field '") + key + "'");
  return *it;
}

inline std::string as_string(const Json& j, const std::string& where) {
  if (!j.is_string()) schema(where, "expected a string");
  return j.get<std::string>();
}

inline std::vector<std::string> as_strings(const Json& j, const std::string& where) {
  if (!j.is_array()) schema(where, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_string(j[i], where + "/" + std::to_string(i)));
  return out;
}

inline std::uint64_t as_uint(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    schema(where, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

}  // namespace detail

inline Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, col] = detail::line_column(text, byte);
    std::string msg = e.what();
    auto pos = msg.find("parse error");
    pos = pos == std::string::npos ? std::string::npos : msg.find(": ", pos);
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                                           (pos == std::string::npos ? msg : msg.substr(pos + 2)));
  }
}

inline Json load_json_file(const std::string& path) {
  try {
    return parse_json(detail::read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw Error(ErrorCode::ParseError, path + ": " + std::string(e.detail()));
    throw;
  }
}

// ---------------------------------------------------------------------------
// Alphabets

inline AlphabetSpec alphabet_from_json(const Json& j, const std::string& where = "alphabet") {
  auto part = [&](const char* key) {
    auto it = j.is_object() ? j.find(key) : j.end();
    if (!j.is_object()) detail::schema(where, "expected an object");
    return it == j.end() ? std::vector<std::string>{} : detail::as_strings(*it, where + "/" + key);
  };
  AlphabetSpec out;
  out.base = make_partitioned_alphabet(part("calls"), part("internals"), part("returns"));
  std::map<std::string, Order> orders;
  if (auto it = j.find("orders"); it != j.end()) {
    if (!it->is_object()) detail::schema(where + "/orders", "expected an object");
    for (const auto& [k, v] : it->items()) {
      if (v.is_string() && (v == "inf" || v == "\xE2\x88\x9E"))
        orders[k] = std::nullopt;
      else
        orders[k] = detail::as_uint(v, where + "/orders/" + k);
    }
  }
  if (auto it = j.find("inverses"); it != j.end()) {
    if (it->is_string() && *it == "case") {
      out.group = GroupAlphabet::with_case_inverses(out.base, orders);
    } else if (it->is_object()) {
      std::vector<std::pair<std::string, std::string>> pairs;
      for (const auto& [k, v] : it->items()) pairs.emplace_back(k, detail::as_string(v, where + "/inverses/" + k));
      out.group = GroupAlphabet::make(out.base, pairs, orders);
    } else {
      detail::schema(where + "/inverses", "expected an object or \"case\"");
    }
  } else if (!orders.empty()) {
    detail::schema(where + "/orders", "orders need an inverse pairing");
  }
  return out;
}

inline Json to_json(const PartitionedAlphabet& a) {
  Json j = Json::object();
  for (auto [key, kind] : {std::pair{"calls", LetterKind::call}, std::pair{"internals", LetterKind::internal},
                           std::pair{"returns", LetterKind::ret}}) {
    Json arr = Json::array();
    for (Letter l : a.letters_of(kind)) arr.push_back(a.name(l));
    j[key] = arr;
  }
  return j;
}

inline Json to_json(const GroupAlphabet& g) {
  Json j = to_json(g.base());
  Json inv = Json::object(), ord = Json::object();
  for (Letter l : g.positive_letters()) {
    inv[g.base().name(l)] = g.base().name(g.inverse(l));
    if (auto o = g.order(l)) ord[g.base().name(l)] = *o;
    else ord[g.base().name(l)] = "inf";
  }
  j["inverses"] = inv;
  j["orders"] = ord;
  return j;
}

inline Json to_json(const AlphabetSpec& a) { return a.group ? to_json(*a.group) : to_json(a.base); }

// ---------------------------------------------------------------------------
// Automata

inline VpaDescription vpa_description_from_json(const Json& j) {
  using namespace detail;
  VpaDescription d;
  d.alphabet = alphabet_from_json(field(j, "/", "alphabet"), "/alphabet").base;
  d.states = as_strings(field(j, "/", "states"), "/states");
  d.initials = as_strings(field(j, "/", "initial"), "/initial");
  d.accepts = as_strings(field(j, "/", "accepting"), "/accepting");
  if (j.contains("stack")) d.stack_symbols = as_strings(j["stack"], "/stack");
  if (j.contains("bottom")) d.bottom_name = as_string(j["bottom"], "/bottom");
  const Json& ts = field(j, "/", "transitions");
  if (!ts.is_array()) schema("/transitions", "expected an array");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const std::string where = "/transitions/" + std::to_string(i);
    TransitionSpec t;
    t.from = as_string(field(ts[i], where, "from"), where + "/from");
    t.letter = as_string(field(ts[i], where, "letter"), where + "/letter");
    t.to = as_string(field(ts[i], where, "to"), where + "/to");
    if (ts[i].contains("push")) t.push = as_string(ts[i]["push"], where + "/push");
    if (ts[i].contains("pop")) t.pop = as_string(ts[i]["pop"], where + "/pop");
    d.transitions.push_back(std::move(t));
  }
  return d;
}

inline Json to_json(const VpaDescription& d) {
  Json j = Json::object();
  j["alphabet"] = to_json(d.alphabet);
  j["states"] = d.states;
  j["initial"] = d.initials;
  j["accepting"] = d.accepts;
  j["stack"] = d.stack_symbols;
  j["bottom"] = d.bottom_name;
  Json ts = Json::array();
  for (const auto& t : d.transitions) {
    Json e = Json::object();
    e["from"] = t.from;
    e["letter"] = t.letter;
    e["to"] = t.to;
    if (t.push) e["push"] = *t.push;
    if (t.pop) e["pop"] = *t.pop;
    ts.push_back(e);
  }
  j["transitions"] = ts;
  return j;
}

inline Json to_json(const Vpa& v) { return to_json(v.describe()); }
inline Vpa vpa_from_json(const Json& j) { return Vpa::from_description(vpa_description_from_json(j)); }
inline Vpa load_vpa(const std::string& path) { return vpa_from_json(load_json_file(path)); }

inline Json to_json(const Dfa& d) {
  Json j = Json::object();
  j["alphabet"] = to_json(d.alphabet);
  j["states"] = d.num_states;
  j["start"] = d.start;
  Json acc = Json::array();
  for (State q = 0; q < d.num_states; ++q)
    if (d.accepting[q]) acc.push_back(q);
  j["accepting"] = acc;
  Json ts = Json::array();
  for (State q = 0; q < d.num_states; ++q)
    for (Letter a : d.alphabet.letters())
      if (d.next(q, a) != Dfa::none) ts.push_back(Json::array({q, d.alphabet.name(a), d.next(q, a)}));
  j["transitions"] = ts;
  return j;
}

inline Dfa dfa_from_json(const Json& j) {
  using namespace detail;
  auto alpha = alphabet_from_json(field(j, "/", "alphabet"), "/alphabet").base;
  const std::size_t n = as_uint(field(j, "/", "states"), "/states");
  const State start = static_cast<State>(as_uint(field(j, "/", "start"), "/start"));
  if (start >= n) schema("/start", "state out of range");
  Dfa d = Dfa::with_states(alpha, n, start);
  const Json& acc = field(j, "/", "accepting");
  if (!acc.is_array()) schema("/accepting", "expected an array");
  for (const auto& q : acc) {
    auto s = as_uint(q, "/accepting");
    if (s >= n) schema("/accepting", "state out of range");
    d.accepting[s] = true;
  }
  const Json& ts = field(j, "/", "transitions");
  if (!ts.is_array()) schema("/transitions", "expected an array");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const std::string where = "/transitions/" + std::to_string(i);
    if (!ts[i].is_array() || ts[i].size() != 3) schema(where, "expected [from, letter, to]");
    auto q = as_uint(ts[i][0], where), t = as_uint(ts[i][2], where);
    if (q >= n || t >= n) schema(where, "state out of range");
    Letter a = alpha.letter(as_string(ts[i][1], where));
    if (d.next(static_cast<State>(q), a) != Dfa::none) schema(where, "duplicate transition");
    d.set(static_cast<State>(q), a, static_cast<State>(t));
  }
  return d;
}

inline Json to_json(const CoreGraph& g) {
  Json j = Json::object();
  j["alphabet"] = to_json(g.alphabet());
  j["vertices"] = g.num_vertices();
  j["base"] = g.base();
  Json es = Json::array();
  for (const auto& e : g.edges()) es.push_back(Json::array({e.source, g.alphabet().base().name(e.label), e.target}));
  j["edges"] = es;
  return j;
}

/// Loaded graphs are folded, pruned and canonically numbered.
inline CoreGraph core_graph_from_json(const Json& j) {
  using namespace detail;
  auto spec = alphabet_from_json(field(j, "/", "alphabet"), "/alphabet");
  const GroupAlphabet& g = spec.require_group();
  const std::size_t n = as_uint(field(j, "/", "vertices"), "/vertices");
  const Vertex base = static_cast<Vertex>(as_uint(field(j, "/", "base"), "/base"));
  const Json& es = field(j, "/", "edges");
  if (!es.is_array()) schema("/edges", "expected an array");
  std::vector<GraphEdge> edges;
  for (std::size_t i = 0; i < es.size(); ++i) {
    const std::string where = "/edges/" + std::to_string(i);
    if (!es[i].is_array() || es[i].size() != 3) schema(where, "expected [source, label, target]");
    edges.push_back({static_cast<Vertex>(as_uint(es[i][0], where)), g.base().letter(as_string(es[i][1], where)),
                     static_cast<Vertex>(as_uint(es[i][2], where))});
  }
  return canonicalize(prune(fold(CoreGraph(g, n, base, std::move(edges)))));
}

inline Json to_json(const CayleyTable& t) {
  Json j = Json::object();
  j["alphabet"] = to_json(t.alphabet());
  j["elements"] = t.elements();
  j["identity"] = t.elements()[t.identity()];
  Json rows = Json::array();
  for (const auto& row : t.table()) {
    Json r = Json::array();
    for (Element e : row) r.push_back(t.elements()[e]);
    rows.push_back(r);
  }
  j["table"] = rows;
  Json gens = Json::object();
  for (Letter l : t.alphabet().base().letters()) gens[t.alphabet().base().name(l)] = t.elements()[t.image(l)];
  j["generators"] = gens;
  return j;
}

inline CayleyTable cayley_from_json(const Json& j) {
  using namespace detail;
  auto spec = alphabet_from_json(field(j, "/", "alphabet"), "/alphabet");
  const GroupAlphabet& g = spec.require_group();
  auto elements = as_strings(field(j, "/", "elements"), "/elements");
  std::map<std::string, Element> id;
  for (std::size_t i = 0; i < elements.size(); ++i)
    if (!id.emplace(elements[i], static_cast<Element>(i)).second) schema("/elements", "duplicate element '" + elements[i] + "'");
  auto element = [&](const Json& v, const std::string& where) {
    auto it = id.find(as_string(v, where));
    if (it == id.end()) schema(where, "unknown element");
    return it->second;
  };
  Element identity = element(field(j, "/", "identity"), "/identity");
  const Json& rows = field(j, "/", "table");
  if (!rows.is_array()) schema("/table", "expected an array of rows");
  std::vector<std::vector<Element>> table;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array()) schema("/table/" + std::to_string(r), "expected an array");
    std::vector<Element> row;
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      row.push_back(element(rows[r][c], "/table/" + std::to_string(r) + "/" + std::to_string(c)));
    table.push_back(std::move(row));
  }
  const Json& gens = field(j, "/", "generators");
  std::vector<Element> images(g.size(), 0);
  for (Letter l : g.base().letters())
    images[index(l)] = element(field(gens, "/generators", g.base().name(l).c_str()), "/generators/" + g.base().name(l));
  return CayleyTable::make(std::move(elements), identity, std::move(table), g, std::move(images));
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// DOT

namespace detail {
inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}
}  // namespace detail

/// Calls are labelled "letter,pushed", returns "letter,popped".
inline std::string to_dot(const Vpa& v) {
  using detail::dot_quote;
  const auto& A = v.alphabet();
  std::ostringstream out;
  out << "digraph vpa {\n  rankdir=LR;\n  node [shape=circle];\n";
  for (State q = 0; q < v.num_states(); ++q)
    out << "  " << dot_quote(v.state_names()[q]) << (v.is_accepting(q) ? " [shape=doublecircle]" : "") << ";\n";
  for (std::size_t i = 0; i < v.initials().size(); ++i) {
    out << "  init" << i << " [shape=point];\n";
    out << "  init" << i << " -> " << dot_quote(v.state_names()[v.initials()[i]]) << ";\n";
  }
  auto edge = [&](State a, State b, const std::string& label) {
    out << "  " << dot_quote(v.state_names()[a]) << " -> " << dot_quote(v.state_names()[b])
        << " [label=" << dot_quote(label) << "];\n";
  };
  for (const auto& r : v.call_rules()) edge(r.from, r.to, A.name(r.letter) + "," + v.stack_names()[r.push]);
  for (const auto& r : v.internal_rules()) edge(r.from, r.to, A.name(r.letter));
  for (const auto& r : v.return_rules()) edge(r.from, r.to, A.name(r.letter) + "," + v.stack_names()[r.pop]);
  out << "}\n";
  return out.str();
}

inline std::string to_dot(const CoreGraph& g) {
  std::ostringstream out;
  out << "digraph core {\n  node [shape=circle];\n";
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    out << "  v" << v << (v == g.base() ? " [style=filled, fillcolor=black, fontcolor=white, label=\"\xE2\x88\x98\"]" : "")
        << ";\n";
  for (const auto& e : g.edges())
    out << "  v" << e.source << " -> v" << e.target << " [label=" << detail::dot_quote(g.alphabet().base().name(e.label))
        << "];\n";
  out << "}\n";
  return out.str();
}

inline std::string to_dot(const Dfa& d) {
  std::ostringstream out;
  out << "digraph dfa {\n  rankdir=LR;\n  node [shape=circle];\n";
  for (State q = 0; q < d.num_states; ++q) out << "  s" << q << (d.accepting[q] ? " [shape=doublecircle]" : "") << ";\n";
  out << "  init [shape=point];\n  init -> s" << d.start << ";\n";
  for (State q = 0; q < d.num_states; ++q)
    for (Letter a : d.alphabet.letters())
      if (d.next(q, a) != Dfa::none)
        out << "  s" << q << " -> s" << d.next(q, a) << " [label=" << detail::dot_quote(d.alphabet.name(a)) << "];\n";
  out << "}\n";
  return out.str();
}

}  // namespace vpgkit
