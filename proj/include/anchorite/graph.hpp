#pragma once

// Proximity graphs (cumulant top-k and fixed-radius geometric), hop
// distances, and the hop-count to distance scaling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <queue>
#include <utility>
#include <variant>
#include <vector>

#include "anchorite/core.hpp"
#include "anchorite/error.hpp"
#include "anchorite/estimation.hpp"
#include "anchorite/parallel.hpp"
#include "anchorite/stats.hpp"

namespace anchorite {

struct Edge {
  std::size_t i = 0;  ///< i < j
  std::size_t j = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct CumulantTopK {};
struct GeometricRadius {
  double radius = 0.0;
};

struct ProximityGraph {
  std::size_t n = 0;
  std::vector<Edge> edges;  ///< sorted, unique, no self-loops
  std::size_t k = 0;
  std::variant<CumulantTopK, GeometricRadius> kind;

  [[nodiscard]] std::vector<std::vector<std::size_t>> adjacency() const {
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& e : edges) {
      adj[e.i].push_back(e.j);
      adj[e.j].push_back(e.i);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return adj;
  }

  [[nodiscard]] bool has_edge(std::size_t a, std::size_t b) const {
    const Edge e{std::min(a, b), std::max(a, b)};
    return std::binary_search(edges.begin(), edges.end(), e);
  }
};

namespace detail {

inline std::vector<Edge> symmetrize(const std::vector<std::vector<std::size_t>>& selected) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < selected.size(); ++i)
    for (auto j : selected[i]) edges.push_back({std::min(i, j), std::max(i, j)});
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace detail

/// For each node, the k partners with the largest score (ties: lower index
/// first); an edge exists when either endpoint selected the other.
/// score(i, j) must be symmetric-agnostic: it is only called with i != j.
template <class Score>
ProximityGraph build_topk_graph(std::size_t n, std::size_t k, Score&& score, unsigned threads = 0) {
  detail::require(k >= 1, "proximity graph: k must be positive");
  detail::require(k < n, "proximity graph: k must be smaller than the node count");
  std::vector<std::vector<std::size_t>> selected(n);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::pair<double, std::size_t>> candidates;
    for (std::size_t i = begin; i < end; ++i) {
      candidates.clear();
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) candidates.emplace_back(score(i, j), j);
      auto better = [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); };
      std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end(), better);
      selected[i].resize(k);
      for (std::size_t r = 0; r < k; ++r) selected[i][r] = candidates[r].second;
    }
  });
  ProximityGraph g;
  g.n = n;
  g.k = k;
  g.kind = CumulantTopK{};
  g.edges = detail::symmetrize(selected);
  return g;
}

inline ProximityGraph build_proximity_graph(const CumulantMatrix& cm, std::size_t k, bool use_lagged,
                                            unsigned threads = 0) {
  if (use_lagged) detail::require(cm.has_lagged(), "proximity graph: lagged cumulants were not estimated");
  return build_topk_graph(
      cm.size(), k, [&](std::size_t i, std::size_t j) { return cm.score(i, j, use_lagged); }, threads);
}

/// Edge between every pair closer than `radius`.
inline ProximityGraph build_geometric_graph(const Deployment& d, double radius) {
  detail::require(radius > 0.0, "geometric graph: radius must be positive");
  ProximityGraph g;
  g.n = d.size();
  g.kind = GeometricRadius{radius};
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j)
      if (squared_norm(d.sensors[i] - d.sensors[j]) < r2) g.edges.push_back({i, j});
  return g;
}

/// Hop counts from each source; std::nullopt marks unreachable nodes.
struct HopDistanceTable {
  std::vector<std::size_t> sources;
  std::vector<std::vector<std::optional<std::uint32_t>>> hops;  ///< [source index][node]
};

inline std::vector<std::optional<std::uint32_t>> bfs_hops(const std::vector<std::vector<std::size_t>>& adj,
                                                          std::size_t source) {
  std::vector<std::optional<std::uint32_t>> dist(adj.size());
  std::queue<std::size_t> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    for (auto v : adj[u]) {
      if (!dist[v]) {
        dist[v] = *dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

inline HopDistanceTable hop_distances(const ProximityGraph& g, const std::vector<std::size_t>& sources,
                                      unsigned threads = 0) {
  detail::require(!sources.empty(), "hop_distances: no sources");
  for (auto s : sources) detail::require(s < g.n, "hop_distances: source out of range");
  const auto adj = g.adjacency();
  HopDistanceTable table;
  table.sources = sources;
  table.hops.resize(sources.size());
  parallel_for(sources.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) table.hops[s] = bfs_hops(adj, sources[s]);
  });
  return table;
}

/// Length of one hop, sqrt(k / (pi n)).
inline double hop_scale(std::size_t n, std::size_t k) {
  return std::sqrt(static_cast<double>(k) / (std::numbers::pi * static_cast<double>(n)));
}

/// Distance estimates hops * sqrt(k / (pi n)); unreachable stays empty.
inline std::vector<std::vector<std::optional<double>>> scale_hops(const HopDistanceTable& h, std::size_t n,
                                                                   std::size_t k) {
  detail::require(n >= 1 && k >= 1, "scale_hops: n and k must be positive");
  const double scale = hop_scale(n, k);
  std::vector<std::vector<std::optional<double>>> out(h.hops.size());
  for (std::size_t s = 0; s < h.hops.size(); ++s) {
    out[s].resize(h.hops[s].size());
    for (std::size_t v = 0; v < h.hops[s].size(); ++v)
      if (h.hops[s][v]) out[s][v] = static_cast<double>(*h.hops[s][v]) * scale;
  }
  return out;
}

/// Each node's other nodes ordered by true distance, ties by index.
inline std::vector<std::size_t> distance_order(const Deployment& d, std::size_t i) {
  std::vector<std::pair<double, std::size_t>> others;
  others.reserve(d.size() - 1);
  for (std::size_t j = 0; j < d.size(); ++j)
    if (j != i) others.emplace_back(squared_norm(d.sensors[i] - d.sensors[j]), j);
  std::sort(others.begin(), others.end());
  std::vector<std::size_t> order(others.size());
  for (std::size_t r = 0; r < others.size(); ++r) order[r] = others[r].second;
  return order;
}

/// The Euclidean k-nearest-neighbour graph, symmetrized the same way as the
/// cumulant graph.
inline ProximityGraph true_knn_graph(const Deployment& d, std::size_t k) {
  return build_topk_graph(d.size(), k, [&](std::size_t i, std::size_t j) {
    return -squared_norm(d.sensors[i] - d.sensors[j]);
  });
}

struct KnnQuality {
  double recall = 0.0;       ///< fraction of true kNN edges present
  double median_rank = 0.0;  ///< median 1-based distance rank of graph neighbours
};

inline KnnQuality knn_quality(const ProximityGraph& g, const Deployment& d, std::size_t k, unsigned threads = 0) {
  detail::require(g.n == d.size(), "knn_quality: graph and deployment sizes differ");
  const auto truth = true_knn_graph(d, k);
  std::size_t hits = 0;
  for (const auto& e : truth.edges) hits += g.has_edge(e.i, e.j);
  KnnQuality q;
  q.recall = truth.edges.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.edges.size());

  const auto adj = g.adjacency();
  std::vector<std::vector<double>> ranks(d.size());
  parallel_for(d.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (adj[i].empty()) continue;
      const auto order = distance_order(d, i);
      std::vector<std::size_t> rank_of(d.size(), 0);
      for (std::size_t r = 0; r < order.size(); ++r) rank_of[order[r]] = r + 1;
      for (auto j : adj[i]) ranks[i].push_back(static_cast<double>(rank_of[j]));
    }
  });
  std::vector<double> all;
  for (const auto& r : ranks) all.insert(all.end(), r.begin(), r.end());
  if (!all.empty()) q.median_rank = median(std::move(all));
  return q;
}

}  // namespace anchorite
