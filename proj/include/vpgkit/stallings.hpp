#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "vpgkit/alphabet.hpp"
#include "vpgkit/dfa.hpp"
#include "vpgkit/error.hpp"

namespace vpgkit {

using Vertex = std::uint32_t;

/// Edge labelled by a positive letter x; read backwards it spells x⁻¹.
struct GraphEdge {
  Vertex source;
  Letter label;
  Vertex target;
  auto operator<=>(const GraphEdge&) const = default;
};

/// Based X-labelled graph. After build_core_graph it is folded, pruned,
/// connected and canonically numbered with the base at vertex 0.
class CoreGraph {
 public:
  static constexpr Vertex none = Vertex(-1);

  CoreGraph() = default;
  CoreGraph(GroupAlphabet alphabet, std::size_t vertices, Vertex base, std::vector<GraphEdge> edges)
      : alphabet_(std::move(alphabet)), num_vertices_(vertices), base_(base), edges_(std::move(edges)) {
    if (base_ >= num_vertices_) throw Error(ErrorCode::SchemaViolation, "base vertex out of range");
    for (const auto& e : edges_) {
      if (e.source >= num_vertices_ || e.target >= num_vertices_)
        throw Error(ErrorCode::SchemaViolation, "edge endpoint out of range");
      if (!alphabet_.is_positive(e.label))
        throw Error(ErrorCode::SchemaViolation, "edge label '" + alphabet_.base().name(e.label) + "' is not a positive letter");
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    build_steps();
  }

  const GroupAlphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t num_vertices() const noexcept { return num_vertices_; }
  Vertex base() const noexcept { return base_; }
  const std::vector<GraphEdge>& edges() const noexcept { return edges_; }
  bool folded() const noexcept { return folded_; }

  /// Unique vertex reached from v along a (forward for x, backward for x⁻¹);
  /// requires a folded graph.
  Vertex step(Vertex v, Letter a) const {
    if (!folded_) throw Error(ErrorCode::InvalidAutomaton, "path tracing needs a folded graph");
    return steps_[v * alphabet_.size() + index(a)];
  }

  Vertex read(Vertex v, const Word& w) const {
    for (Letter a : w) {
      if (v == none) return none;
      v = step(v, a);
    }
    return v;
  }

  bool operator==(const CoreGraph& o) const {
    return alphabet_ == o.alphabet_ && num_vertices_ == o.num_vertices_ && base_ == o.base_ && edges_ == o.edges_;
  }

 private:
  void build_steps() {
    const std::size_t k = alphabet_.size();
    steps_.assign(num_vertices_ * k, none);
    folded_ = true;
    auto put = [&](Vertex v, Letter a, Vertex t) {
      auto& slot = steps_[v * k + index(a)];
      if (slot != none && slot != t) folded_ = false;
      slot = t;
    };
    for (const auto& e : edges_) {
      put(e.source, e.label, e.target);
      put(e.target, alphabet_.inverse(e.label), e.source);
    }
  }

  GroupAlphabet alphabet_;
  std::size_t num_vertices_ = 0;
  Vertex base_ = 0;
  std::vector<GraphEdge> edges_;
  bool folded_ = false;
  std::vector<Vertex> steps_;
};

/// Bouquet of one loop per non-trivial reduced generator. Generators that
/// reduce to ε are skipped and reported in `warnings`.
inline CoreGraph wedge(const GroupAlphabet& g, const std::vector<Word>& generators,
                       std::vector<std::string>* warnings = nullptr) {
  std::vector<GraphEdge> edges;
  Vertex next = 1;
  for (std::size_t i = 0; i < generators.size(); ++i) {
    Word w = free_reduce(g, generators[i]);
    if (w.empty()) {
      if (warnings) warnings->push_back("generator " + std::to_string(i + 1) + " reduces to the empty word; skipped");
      continue;
    }
    Vertex cur = 0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      Vertex to = j + 1 == w.size() ? 0 : next++;
      if (g.is_positive(w[j]))
        edges.push_back({cur, w[j], to});
      else
        edges.push_back({to, g.inverse(w[j]), cur});
      cur = to;
    }
  }
  return CoreGraph(g, next, 0, std::move(edges));
}

/// Identifies edges sharing a label and a source (or a target) until none
/// remain. With a seed, merges are attempted in a shuffled order.
inline CoreGraph fold(const CoreGraph& graph, std::optional<std::uint64_t> seed = std::nullopt) {
  const std::size_t n = graph.num_vertices();
  std::vector<Vertex> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Vertex v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<GraphEdge> edges = graph.edges();
  std::mt19937_64 rng(seed.value_or(0));
  bool changed = true;
  while (changed) {
    changed = false;
    if (seed) std::shuffle(edges.begin(), edges.end(), rng);
    std::map<std::pair<Vertex, Letter>, Vertex> out, in;
    for (const auto& e : edges) {
      Vertex s = find(e.source), t = find(e.target);
      auto [o, fresh_o] = out.emplace(std::make_pair(s, e.label), t);
      if (!fresh_o && find(o->second) != t) {
        parent[std::max(find(o->second), t)] = std::min(find(o->second), t);
        changed = true;
        break;
      }
      auto [i, fresh_i] = in.emplace(std::make_pair(t, e.label), s);
      if (!fresh_i && find(i->second) != s) {
        parent[std::max(find(i->second), s)] = std::min(find(i->second), s);
        changed = true;
        break;
      }
    }
    for (auto& e : edges) e = {find(e.source), e.label, find(e.target)};
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }
  // compact vertex ids
  std::vector<Vertex> id(n, CoreGraph::none);
  Vertex count = 0;
  for (Vertex v = 0; v < n; ++v)
    if (find(v) == v) id[v] = count++;
  for (auto& e : edges) e = {id[e.source], e.label, id[e.target]};
  return CoreGraph(graph.alphabet(), count, id[find(graph.base())], std::move(edges));
}

/// Removes non-base vertices of degree ≤ 1 (a loop counts twice) until none
/// remain.
inline CoreGraph prune(const CoreGraph& graph) {
  const std::size_t n = graph.num_vertices();
  std::vector<GraphEdge> edges = graph.edges();
  std::vector<bool> alive(n, true);
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::size_t> degree(n, 0);
    for (const auto& e : edges) ++degree[e.source], ++degree[e.target];
    for (Vertex v = 0; v < n; ++v)
      if (alive[v] && v != graph.base() && degree[v] <= 1) alive[v] = false, changed = true;
    std::erase_if(edges, [&](const GraphEdge& e) { return !alive[e.source] || !alive[e.target]; });
  }
  std::vector<Vertex> id(n, CoreGraph::none);
  Vertex count = 0;
  for (Vertex v = 0; v < n; ++v)
    if (alive[v]) id[v] = count++;
  for (auto& e : edges) e = {id[e.source], e.label, id[e.target]};
  return CoreGraph(graph.alphabet(), count, id[graph.base()], std::move(edges));
}

/// Breadth-first renumbering from the base, following letters in alphabet
/// order; unreachable vertices are dropped. Requires a folded graph.
inline CoreGraph canonicalize(const CoreGraph& graph) {
  std::vector<Vertex> id(graph.num_vertices(), CoreGraph::none);
  std::vector<Vertex> order{graph.base()};
  id[graph.base()] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (Letter a : graph.alphabet().base().letters()) {
      Vertex t = graph.step(order[i], a);
      if (t != CoreGraph::none && id[t] == CoreGraph::none) {
        id[t] = static_cast<Vertex>(order.size());
        order.push_back(t);
      }
    }
  std::vector<GraphEdge> edges;
  for (const auto& e : graph.edges())
    if (id[e.source] != CoreGraph::none) edges.push_back({id[e.source], e.label, id[e.target]});
  return CoreGraph(graph.alphabet(), order.size(), 0, std::move(edges));
}

inline CoreGraph build_core_graph(const GroupAlphabet& g, const std::vector<Word>& generators,
                                  std::vector<std::string>* warnings = nullptr,
                                  std::optional<std::uint64_t> fold_seed = std::nullopt) {
  for (const auto& w : generators) g.base().check(w);
  return canonicalize(prune(fold(wedge(g, generators, warnings), fold_seed)));
}

inline bool subgroup_membership(const CoreGraph& graph, const Word& w) {
  graph.alphabet().base().check(w);
  return graph.read(graph.base(), free_reduce(graph.alphabet(), w)) == graph.base();
}

struct IndexVerdict {
  bool finite = false;
  std::size_t index = 0;       // finite: number of cosets
  Vertex vertex = 0;           // infinite: vertex lacking an edge
  Letter missing{};            // infinite: letter of Σ with no edge at `vertex`
};

inline IndexVerdict index(const CoreGraph& graph) {
  for (Vertex v = 0; v < graph.num_vertices(); ++v)
    for (Letter a : graph.alphabet().base().letters())
      if (graph.step(v, a) == CoreGraph::none) return {false, 0, v, a};
  return {true, graph.num_vertices(), 0, {}};
}

/// Permutation DFA of the action on cosets; accepts π⁻¹(H).
inline Dfa preimage_dfa(const CoreGraph& graph) {
  auto verdict = index(graph);
  if (!verdict.finite) throw Error(ErrorCode::InfiniteIndex, "subgroup has infinite index");
  const auto& A = graph.alphabet().base();
  Dfa d = Dfa::with_states(A, graph.num_vertices(), graph.base());
  d.accepting[graph.base()] = true;
  for (Vertex v = 0; v < graph.num_vertices(); ++v)
    for (Letter a : A.letters()) d.set(v, a, graph.step(v, a));
  return d;
}

/// Shortlex-least path label from the base to every vertex.
inline std::vector<Word> spanning_paths(const CoreGraph& graph) {
  std::vector<std::optional<Word>> path(graph.num_vertices());
  path[graph.base()] = Word{};
  std::vector<Vertex> queue{graph.base()};
  for (std::size_t i = 0; i < queue.size(); ++i)
    for (Letter a : graph.alphabet().base().letters()) {
      Vertex t = graph.step(queue[i], a);
      if (t != CoreGraph::none && !path[t]) {
        path[t] = *path[queue[i]];
        path[t]->push_back(a);
        queue.push_back(t);
      }
    }
  std::vector<Word> out;
  for (auto& p : path) out.push_back(p.value_or(Word{}));
  return out;
}

struct WitnessLanguage {
  Word w1;  // base → v
  Word w2;  // v → base
  Letter a;  // no a-edge leaves v
};

/// w1 is the shortlex-least path to the witness vertex and w2 = w1⁻¹.
inline WitnessLanguage infinite_index_witness_language(const CoreGraph& graph) {
  auto verdict = index(graph);
  if (verdict.finite) throw Error(ErrorCode::FiniteIndex, "subgroup has finite index " + std::to_string(verdict.index));
  Word w1 = spanning_paths(graph)[verdict.vertex];
  return {w1, graph.alphabet().invert(w1), verdict.missing};
}

}  // namespace vpgkit
