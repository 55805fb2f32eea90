#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vpgkit/vpgkit.hpp"

using namespace vpgkit;

namespace {

int exit_code = 0;

void emit(const std::string& text, const std::string& out) {
  if (out.empty())
    std::cout << text;
  else
    detail::write_file(out, text);
}

AlphabetSpec load_alphabet(const std::string& path) { return alphabet_from_json(load_json_file(path)); }

CongruenceKind kind_of(const std::string& s) { return detail::parse_kind(s); }

struct OracleArgs {
  std::string vpa, alphabet, rule = "vpa", letter;
};

void oracle_options(CLI::App* c, OracleArgs& o) {
  c->add_option("--vpa", o.vpa, "VPA file backing the language");
  c->add_option("--alphabet", o.alphabet, "alphabet file for rule-backed languages");
  c->add_option("--rule", o.rule, "vpa | expsum | wp | all")->check(CLI::IsMember({"vpa", "expsum", "wp", "all"}));
  c->add_option("--letter", o.letter, "letter whose exponent sum is zero (expsum)");
}

LangOracle make_oracle(const OracleArgs& o) {
  if (o.rule == "vpa") {
    if (o.vpa.empty()) throw Error(ErrorCode::ParseError, "--vpa is required for rule vpa");
    return oracle_from_vpa(load_vpa(o.vpa), o.vpa);
  }
  if (o.alphabet.empty()) throw Error(ErrorCode::ParseError, "--alphabet is required for rule " + o.rule);
  auto a = load_alphabet(o.alphabet);
  if (o.rule == "all") return oracle_all(a.base);
  const auto& g = a.require_group();
  if (o.rule == "wp") return oracle_free_word_problem(g);
  if (o.letter.empty()) throw Error(ErrorCode::ParseError, "--letter is required for rule expsum");
  return oracle_exponent_sum_zero(g, g.base().letter(o.letter));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visibly pushdown automata and group languages"};
  app.require_subcommand(1);
  std::string out;

  // ---- vpa ---------------------------------------------------------------
  auto* vpa = app.add_subcommand("vpa", "visibly pushdown automata")->require_subcommand(1);
  std::string fa, fb, word_text;
  bool trace = false;

  auto* run = vpa->add_subcommand("run", "run a word");
  run->add_option("automaton", fa)->required();
  run->add_option("word", word_text)->required();
  run->add_flag("--trace", trace, "print one accepting run");
  run->callback([&] {
    Vpa v = load_vpa(fa);
    Word w = parse_word(v.alphabet(), word_text);
    auto r = vpgkit::run(v, w, trace);
    std::cout << (r.accepted ? "accepted" : "rejected") << "\n";
    auto show = [&](const Configuration& c) {
      std::cout << v.state_names()[c.state] << " [";
      for (std::size_t i = 0; i < c.stack.size(); ++i) std::cout << (i ? " " : "") << v.stack_names()[c.stack[i]];
      std::cout << "]\n";
    };
    if (r.trace)
      for (const auto& c : *r.trace) show(c);
    if (!r.accepted) exit_code = 1;
  });

  auto* val = vpa->add_subcommand("validate", "check the visibility conditions");
  val->add_option("automaton", fa)->required();
  val->callback([&] {
    auto rep = validate(vpa_description_from_json(load_json_file(fa)));
    if (rep.ok()) {
      std::cout << "valid\n";
    } else {
      for (const auto& v : rep.violations) std::cout << to_string(v.kind) << ": " << v.detail << "\n";
      exit_code = 1;
    }
  });

  auto unary = [&](const char* name, const char* help, auto fn) {
    auto* c = vpa->add_subcommand(name, help);
    c->add_option("automaton", fa)->required();
    c->add_option("-o,--output", out, "output file");
    c->callback([&, fn] { emit(dump(to_json(fn(load_vpa(fa)))), out); });
    return c;
  };
  unary("determinize", "deterministic complete equivalent", [](const Vpa& v) { return determinize(v); });
  unary("complement", "complement language", [](const Vpa& v) { return complement(v); });
  unary("star", "Kleene star", [](const Vpa& v) { return star(v); });

  auto binary = [&](const char* name, const char* help, auto fn) {
    auto* c = vpa->add_subcommand(name, help);
    c->add_option("first", fa)->required();
    c->add_option("second", fb)->required();
    c->add_option("-o,--output", out, "output file");
    c->callback([&, fn] { emit(dump(to_json(fn(load_vpa(fa), load_vpa(fb)))), out); });
  };
  binary("union", "union", [](const Vpa& a, const Vpa& b) { return union_of(a, b); });
  binary("intersect", "intersection", [](const Vpa& a, const Vpa& b) { return intersection(a, b); });
  binary("concat", "concatenation", [](const Vpa& a, const Vpa& b) { return concat(a, b); });

  std::size_t depth = 0;
  auto* track = vpa->add_subcommand("track", "record the top stack symbols in the state");
  track->add_option("automaton", fa)->required();
  track->add_option("depth", depth)->required();
  track->add_option("-o,--output", out, "output file");
  track->callback([&] { emit(dump(to_json(track_stack_top(load_vpa(fa), depth))), out); });

  auto* empty = vpa->add_subcommand("empty", "decide emptiness");
  empty->add_option("automaton", fa)->required();
  empty->callback([&] {
    Vpa v = load_vpa(fa);
    auto r = is_empty(v);
    if (r.empty)
      std::cout << "empty\n";
    else
      std::cout << "nonempty, witness " << format_word(v.alphabet(), *r.witness) << "\n";
  });

  auto* dot = vpa->add_subcommand("dot", "export to DOT");
  dot->add_option("automaton", fa)->required();
  dot->add_option("-o,--output", out, "output file");
  dot->callback([&] { emit(to_dot(load_vpa(fa)), out); });

  std::size_t max_len = 0;
  auto* en = vpa->add_subcommand("enum", "accepted words up to a length, shortlex");
  en->add_option("automaton", fa)->required();
  en->add_option("length", max_len)->required();
  en->callback([&] {
    Vpa v = load_vpa(fa);
    for (const auto& w : enumerate_language(v, max_len)) std::cout << format_word(v.alphabet(), w) << "\n";
  });

  std::string target;
  std::vector<std::string> pairs;
  auto* ren = vpa->add_subcommand("rename", "letter-to-letter renaming");
  ren->add_option("automaton", fa)->required();
  ren->add_option("--target", target, "target alphabet file (default: same alphabet)");
  ren->add_option("--map", pairs, "x->y entries; unmapped letters keep their name")->required();
  ren->add_option("-o,--output", out, "output file");
  ren->callback([&] {
    Vpa v = load_vpa(fa);
    PartitionedAlphabet to = target.empty() ? v.alphabet() : load_alphabet(target).base;
    std::map<std::string, std::string> m;
    for (const auto& p : pairs) {
      auto arrow = p.find("->");
      if (arrow == std::string::npos) throw Error(ErrorCode::ParseError, "map entries are x->y");
      m[p.substr(0, arrow)] = p.substr(arrow + 2);
    }
    emit(dump(to_json(rename(v, Renaming::by_name(v.alphabet(), to, m)))), out);
  });

  std::string side = "right";
  std::vector<std::string> quotient_words;
  auto* quo = vpa->add_subcommand("quotient", "quotient by a finite language");
  quo->add_option("automaton", fa)->required();
  quo->add_option("--side", side)->check(CLI::IsMember({"left", "right"}));
  quo->add_option("--words", quotient_words, "words of the finite language")->required();
  quo->add_option("-o,--output", out, "output file");
  quo->callback([&] {
    Vpa v = load_vpa(fa);
    std::vector<Word> ws;
    for (const auto& s : quotient_words) ws.push_back(parse_word(v.alphabet(), s));
    emit(dump(to_json(quotient_finite(v, ws, side == "left" ? Side::left : Side::right))), out);
  });

  auto* eq = vpa->add_subcommand("equiv", "decide language equality");
  eq->add_option("first", fa)->required();
  eq->add_option("second", fb)->required();
  eq->callback([&] {
    Vpa a = load_vpa(fa), b = load_vpa(fb);
    auto r = equivalent(a, b);
    if (r.equivalent) {
      std::cout << "equivalent\n";
    } else {
      std::cout << "inequivalent, counterexample " << format_word(a.alphabet(), *r.counterexample) << "\n";
      exit_code = 1;
    }
  });

  // ---- cong --------------------------------------------------------------
  auto* cong = app.add_subcommand("cong", "bounded congruence exploration")->require_subcommand(1);
  OracleArgs oracle;
  std::string kind = "equiv";
  std::size_t word_bound = 4, context_bound = 4, max_bound = 6;
  bool csv = false;

  auto* explore = cong->add_subcommand("explore", "classes of admissible words");
  oracle_options(explore, oracle);
  explore->add_option("--kind", kind)->check(CLI::IsMember({"equiv", "sim0", "approx"}));
  explore->add_option("--words", word_bound, "word length bound");
  explore->add_option("--contexts", context_bound, "context length bound");
  explore->callback([&] {
    auto L = make_oracle(oracle);
    auto t = explore_classes(L, kind_of(kind), word_bound, context_bound);
    Json j = Json::object();
    j["kind"] = kind;
    j["word_bound"] = word_bound;
    j["context_bound"] = context_bound;
    j["count"] = t.count();
    Json classes = Json::array();
    for (const auto& c : t.classes) {
      Json members = Json::array();
      for (const auto& w : c) members.push_back(format_word(L.alphabet, w));
      classes.push_back(Json{{"representative", format_word(L.alphabet, c.front())}, {"members", members}});
    }
    j["classes"] = classes;
    Json wit = Json::array();
    for (const auto& [ij, ctx] : t.witnesses)
      wit.push_back(Json{{"classes", {ij.first, ij.second}},
                         {"left", format_word(L.alphabet, ctx.left)},
                         {"right", format_word(L.alphabet, ctx.right)}});
    j["witnesses"] = wit;
    std::cout << dump(j);
  });

  auto* profile = cong->add_subcommand("profile", "class counts for word bounds 1..max");
  oracle_options(profile, oracle);
  profile->add_option("--kind", kind)->check(CLI::IsMember({"equiv", "sim0", "approx"}));
  profile->add_option("--max", max_bound, "largest word bound")->check(CLI::PositiveNumber);
  profile->add_flag("--csv", csv, "emit CSV");
  profile->callback([&] {
    auto p = growth_profile(make_oracle(oracle), kind_of(kind), max_bound);
    if (csv) {
      std::cout << "kind,word_bound,context_bound,classes\n";
      for (std::size_t i = 0; i < p.size(); ++i)
        std::cout << kind << "," << i + 1 << "," << i + 3 << "," << p[i] << "\n";
    } else {
      std::cout << detail::join(p) << "\n";
    }
  });

  // ---- stallings ---------------------------------------------------------
  auto* st = app.add_subcommand("stallings", "core graphs of free-group subgroups")->require_subcommand(1);
  std::string alpha_file, graph_file;
  std::vector<std::string> gens;

  auto* build = st->add_subcommand("build", "core graph of the subgroup generated by words");
  build->add_option("--alphabet", alpha_file, "inverse-closed alphabet file")->required();
  build->add_option("generators", gens)->required();
  build->add_option("-o,--output", out, "output file");
  build->callback([&] {
    auto a = load_alphabet(alpha_file);
    const auto& g = a.require_group();
    std::vector<Word> ws;
    for (const auto& s : gens) ws.push_back(parse_word(g, s));
    std::vector<std::string> warnings;
    auto graph = build_core_graph(g, ws, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    emit(dump(to_json(graph)), out);
  });

  auto* idx = st->add_subcommand("index", "finite-index decision");
  idx->add_option("graph", graph_file)->required();
  idx->callback([&] {
    auto g = core_graph_from_json(load_json_file(graph_file));
    auto v = index(g);
    if (v.finite)
      std::cout << "finite index " << v.index << "\n";
    else
      std::cout << "infinite index, vertex " << v.vertex << " lacks " << g.alphabet().base().name(v.missing) << "\n";
  });

  auto* sdfa = st->add_subcommand("dfa", "permutation DFA of the full preimage");
  sdfa->add_option("graph", graph_file)->required();
  sdfa->add_option("-o,--output", out, "output file");
  sdfa->callback([&] { emit(dump(to_json(preimage_dfa(core_graph_from_json(load_json_file(graph_file))))), out); });

  auto* sdot = st->add_subcommand("dot", "export to DOT");
  sdot->add_option("graph", graph_file)->required();
  sdot->add_option("-o,--output", out, "output file");
  sdot->callback([&] { emit(to_dot(core_graph_from_json(load_json_file(graph_file))), out); });

  auto* wit = st->add_subcommand("witness", "witness language of an infinite-index subgroup");
  wit->add_option("graph", graph_file)->required();
  wit->callback([&] {
    auto g = core_graph_from_json(load_json_file(graph_file));
    auto w = infinite_index_witness_language(g);
    const auto& A = g.alphabet().base();
    std::cout << "w1 = " << format_word(A, w.w1) << "\nw2 = " << format_word(A, w.w2) << "\na = " << A.name(w.a)
              << "\n";
  });

  // ---- wp / rec / partition / lift ---------------------------------------
  auto* wp = app.add_subcommand("wp", "word problems of finite groups")->require_subcommand(1);
  std::string cayley_file, dfa_file;
  auto* wpd = wp->add_subcommand("dfa", "word-problem DFA from a Cayley table");
  wpd->add_option("table", cayley_file)->required();
  wpd->add_option("-o,--output", out, "output file");
  wpd->callback([&] { emit(dump(to_json(wp_dfa_from_cayley(cayley_from_json(load_json_file(cayley_file))))), out); });

  auto* rec = app.add_subcommand("rec", "recognisable sets")->require_subcommand(1);
  auto* dec = rec->add_subcommand("decompose", "coset-union form of a permutation DFA");
  dec->add_option("dfa", dfa_file)->required();
  dec->add_option("--alphabet", alpha_file, "inverse-closed alphabet file")->required();
  dec->callback([&] {
    auto a = load_alphabet(alpha_file);
    auto c = to_coset_representation(dfa_from_json(load_json_file(dfa_file)), a.require_group());
    Json j = Json::object();
    j["normal_subgroup_index"] = c.normal_subgroup_index;
    j["permutation_group_size"] = c.permutation_group_size;
    Json reps = Json::array();
    for (const auto& w : c.coset_representatives) reps.push_back(format_word(c.alphabet, w));
    j["coset_representatives"] = reps;
    std::cout << dump(j);
  });

  auto* part = app.add_subcommand("partition", "partition properties")->require_subcommand(1);
  auto* chk = part->add_subcommand("check", "symmetric-partition check");
  chk->add_option("alphabet", alpha_file)->required();
  chk->callback([&] {
    auto a = load_alphabet(alpha_file);
    const auto& g = a.require_group();
    auto v = is_symmetric_partition(g);
    std::cout << (v.symmetric ? "symmetric" : "not symmetric") << "\n";
    for (const auto& x : v.violations) std::cout << to_string(x.kind) << " " << g.base().name(x.letter) << "\n";
  });

  std::string lift_side = "MR";
  auto* lift = app.add_subcommand("lift", "pad a word into MR or MC without changing its image");
  lift->add_option("alphabet", alpha_file)->required();
  lift->add_option("word", word_text)->required();
  lift->add_option("--side", lift_side)->check(CLI::IsMember({"MR", "MC"}));
  lift->callback([&] {
    auto a = load_alphabet(alpha_file);
    const auto& g = a.require_group();
    Word w = lift_to_matched(g, parse_word(g, word_text), lift_side == "MR" ? MatchSide::mr : MatchSide::mc);
    std::cout << format_word(g, w) << "\n";
  });

  // ---- eqn ---------------------------------------------------------------
  auto* eqn = app.add_subcommand("eqn", "bounded equation solving")->require_subcommand(1);
  std::string eq_text;
  std::vector<std::string> constraint_files;
  auto resolver = [&](const std::string& name) -> Vpa {
    for (const auto& entry : constraint_files) {
      auto eqpos = entry.find('=');
      if (eqpos != std::string::npos && entry.substr(0, eqpos) == name) return load_vpa(entry.substr(eqpos + 1));
    }
    return load_vpa(name);
  };
  auto system = [&] {
    auto a = load_alphabet(alpha_file);
    return parse_equation(eq_text, a.base, a.group, resolver);
  };
  auto print_solutions = [](const EquationSystem& sys) {
    auto s = solve_bounded(sys);
    for (const auto& x : s.assignments) std::cout << format_assignment(sys, x) << "\n";
    std::cout << s.assignments.size() << " solutions up to bound " << s.exhausted_bound << "\n";
  };
  for (auto [name, help] : {std::pair{"solve", "solve up to the bound"},
                            std::pair{"encode", "solve the free-group encoding of a monoid equation"}}) {
    auto* c = eqn->add_subcommand(name, help);
    c->add_option("--alphabet", alpha_file, "alphabet file")->required();
    c->add_option("equation", eq_text, "e.g. \"X a b = a X b ; bound 3\"")->required();
    c->add_option("--vpa", constraint_files, "name=file for @name constraints");
    const bool encode = std::string(name) == "encode";
    c->callback([&, encode] { print_solutions(encode ? encode_monoid_to_group(system()) : system()); });
  }

  // ---- pipeline ----------------------------------------------------------
  auto* pipe = app.add_subcommand("pipeline", "scripted reproduction")->require_subcommand(1);
  std::vector<std::string> scripts;
  auto* prun = pipe->add_subcommand("run", "execute pipeline scripts");
  prun->add_option("scripts", scripts)->required();
  prun->callback([&] {
    for (const auto& s : scripts) {
      auto r = run_pipeline_file(s);
      std::cout << r.text;
      if (!r.ok()) exit_code = 1;
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
