#pragma once

// Weighted undirected network measures on connectome matrices. Connection
// length is 1/weight.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "tractconn/connectome.hpp"
#include "tractconn/error.hpp"
#include "tractconn/matrix.hpp"
#include "tractconn/stats/similarity.hpp"

namespace tractconn::graph {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Symmetric nonnegative weights with a zero diagonal.
struct WeightedGraph {
  std::size_t n = 0;
  Matrix<double> weights;
  double max_weight = 0.0;

  bool has_edge(std::size_t i, std::size_t j) const { return weights(i, j) > 0.0; }

  std::size_t degree(std::size_t i) const {
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) k += has_edge(i, j) ? 1 : 0;
    return k;
  }

  double strength(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += weights(i, j);
    return s;
  }

  std::size_t edge_count() const {
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) m += has_edge(i, j) ? 1 : 0;
    return m;
  }
};

/// Copies the matrix and drops self-connections.
template <class T>
WeightedGraph prepare(const Matrix<T>& m) {
  require(m.rows() > 0, Errc::EmptyGraph, "graph has no nodes");
  require(m.is_square(), Errc::NotSquare, "adjacency must be square");
  require(m.is_symmetric(), Errc::NotSymmetric, "adjacency must be symmetric");
  WeightedGraph g{m.rows(), Matrix<double>(m.rows(), m.rows()), 0.0};
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) {
      if (i == j) continue;
      const double w = static_cast<double>(m(i, j));
      require(w >= 0.0 && std::isfinite(w), Errc::NegativeEntry, "weights must be finite and nonnegative");
      g.weights(i, j) = w;
      g.max_weight = std::max(g.max_weight, w);
    }
  return g;
}

inline WeightedGraph prepare(const Connectome& c) { return prepare(c.counts); }

/// All-pairs shortest path lengths (Dijkstra from every node).
inline Matrix<double> shortest_paths(const WeightedGraph& g) {
  Matrix<double> dist(g.n, g.n, kInfinity);
  using Item = std::pair<double, std::size_t>;
  for (std::size_t source = 0; source < g.n; ++source) {
    auto d = dist.row(source);
    std::vector<bool> done(g.n, false);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    d[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
      const auto [du, u] = queue.top();
      queue.pop();
      if (done[u]) continue;
      done[u] = true;
      for (std::size_t v = 0; v < g.n; ++v) {
        if (!g.has_edge(u, v) || done[v]) continue;
        const double candidate = du + 1.0 / g.weights(u, v);
        if (candidate < d[v]) {
          d[v] = candidate;
          queue.emplace(candidate, v);
        }
      }
    }
  }
  return dist;
}

struct PathLength {
  double length = 0.0;
  double infinite_fraction = 0.0;  // share of ordered pairs with no path
};

/// Mean over finite off-diagonal distances.
inline PathLength characteristic_path_length(const WeightedGraph& g) {
  require(g.n >= 2, Errc::InvalidArgument, "path length needs at least two nodes");
  const auto dist = shortest_paths(g);
  double sum = 0.0;
  std::size_t finite = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) {
      if (i == j) continue;
      ++total;
      if (std::isfinite(dist(i, j))) {
        sum += dist(i, j);
        ++finite;
      }
    }
  if (finite == 0) fail(Errc::NoFinitePaths, "graph has no connected pair of nodes");
  return {sum / static_cast<double>(finite), static_cast<double>(total - finite) / static_cast<double>(total)};
}

inline double global_efficiency(const WeightedGraph& g) {
  require(g.n >= 2, Errc::InvalidArgument, "efficiency needs at least two nodes");
  const auto dist = shortest_paths(g);
  double sum = 0.0;
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j)
      if (i != j && std::isfinite(dist(i, j))) sum += 1.0 / dist(i, j);
  return sum / static_cast<double>(g.n * (g.n - 1));
}

/// Onnela weighted clustering with weights scaled by the global maximum,
/// averaged over all nodes (nodes with degree < 2 count as 0).
inline double clustering_coefficient(const WeightedGraph& g) {
  if (g.n == 0 || g.max_weight <= 0.0) return 0.0;
  Matrix<double> cube_root(g.n, g.n);
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) cube_root(i, j) = std::cbrt(g.weights(i, j) / g.max_weight);
  double total = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    const std::size_t k = g.degree(i);
    if (k < 2) continue;
    double cycles = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      if (cube_root(i, j) == 0.0) continue;
      for (std::size_t h = 0; h < g.n; ++h)
        if (h != j) cycles += cube_root(i, j) * cube_root(i, h) * cube_root(j, h);
    }
    total += cycles / static_cast<double>(k * (k - 1));
  }
  return total / static_cast<double>(g.n);
}

/// Mean over nodes of the global efficiency of the subgraph induced by each
/// node's neighbours (0 when a node has fewer than two neighbours).
inline double local_efficiency(const WeightedGraph& g) {
  if (g.n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    std::vector<std::size_t> nbrs;
    for (std::size_t j = 0; j < g.n; ++j)
      if (g.has_edge(i, j)) nbrs.push_back(j);
    if (nbrs.size() < 2) continue;
    WeightedGraph sub{nbrs.size(), Matrix<double>(nbrs.size(), nbrs.size()), 0.0};
    for (std::size_t a = 0; a < nbrs.size(); ++a)
      for (std::size_t b = 0; b < nbrs.size(); ++b) {
        sub.weights(a, b) = a == b ? 0.0 : g.weights(nbrs[a], nbrs[b]);
        sub.max_weight = std::max(sub.max_weight, sub.weights(a, b));
      }
    total += global_efficiency(sub);
  }
  return total / static_cast<double>(g.n);
}

enum class AssortativityMode { Strength, Degree };

/// Pearson correlation of endpoint strengths (or degrees) over every edge,
/// taken in both orientations.
inline double assortativity(const WeightedGraph& g, AssortativityMode mode = AssortativityMode::Strength) {
  std::vector<double> node_value(g.n);
  for (std::size_t i = 0; i < g.n; ++i)
    node_value[i] = mode == AssortativityMode::Strength ? g.strength(i) : static_cast<double>(g.degree(i));
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = i + 1; j < g.n; ++j) {
      if (!g.has_edge(i, j)) continue;
      x.push_back(node_value[i]);
      y.push_back(node_value[j]);
      x.push_back(node_value[j]);
      y.push_back(node_value[i]);
    }
  if (x.size() < 4) fail(Errc::ZeroVariance, "assortativity needs at least two edges");
  return stats::pearson(x, y);
}

}  // namespace tractconn::graph
