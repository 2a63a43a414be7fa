#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "tractconn/error.hpp"
#include "tractconn/graph/metrics.hpp"
#include "tractconn/matrix.hpp"
#include "tractconn/random.hpp"

namespace tractconn::graph {

/// Q = (1/2m) sum_ij (A_ij - s_i s_j / 2m) [c_i == c_j], with 2m = sum_ij A_ij.
/// The diagonal takes part as stored, which keeps Q unchanged under
/// community aggregation.
inline double modularity(const Matrix<double>& adjacency, std::span<const std::size_t> community) {
  const std::size_t n = adjacency.rows();
  require(community.size() == n, Errc::ShapeMismatch, "one community per node is required");
  std::vector<double> strength(n, 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      strength[i] += adjacency(i, j);
      two_m += adjacency(i, j);
    }
  if (!(two_m > 0.0)) fail(Errc::EmptyGraph, "modularity of a graph without edges");
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (community[i] == community[j]) q += adjacency(i, j) - strength[i] * strength[j] / two_m;
  return q / two_m;
}

inline double modularity(const WeightedGraph& g, std::span<const std::size_t> community) {
  return modularity(g.weights, community);
}

struct ModularityResult {
  double q = 0.0;
  std::vector<std::size_t> partition;  // community index per node, numbered from 0
};

namespace detail {

// Greedy local moving on one level; returns true if any node changed community.
inline bool local_moves(const Matrix<double>& a, std::vector<std::size_t>& community, Rng& rng) {
  const std::size_t n = a.rows();
  std::vector<double> strength(n, 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      strength[i] += a(i, j);
      two_m += a(i, j);
    }
  std::vector<double> total(n, 0.0);
  std::vector<std::size_t> members(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    total[community[i]] += strength[i];
    ++members[community[i]];
  }
  std::vector<std::size_t> empty;
  for (std::size_t c = n; c-- > 0;)
    if (members[c] == 0) empty.push_back(c);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<double> link(n, 0.0);
  std::vector<std::size_t> touched;
  bool any = false;
  for (bool moved = true; moved;) {
    moved = false;
    for (auto i : order) {
      const std::size_t own = community[i];
      touched.clear();
      touched.push_back(own);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || a(i, j) == 0.0) continue;
        if (link[community[j]] == 0.0 && community[j] != own) touched.push_back(community[j]);
        link[community[j]] += a(i, j);
      }
      total[own] -= strength[i];
      --members[own];
      std::size_t best = own;
      double best_gain = link[own] - strength[i] * total[own] / two_m;
      for (auto c : touched) {
        const double gain = link[c] - strength[i] * total[c] / two_m;
        if (gain > best_gain + 1e-12 * two_m) {
          best_gain = gain;
          best = c;
        }
      }
      // Standing alone gains 0; only worth it if the node is not alone already.
      if (members[own] > 0 && !empty.empty() && 0.0 > best_gain + 1e-12 * two_m) {
        best = empty.back();
        empty.pop_back();
      }
      if (members[own] == 0 && best != own) empty.push_back(own);
      total[best] += strength[i];
      ++members[best];
      community[i] = best;
      if (best != own) {
        moved = true;
        any = true;
      }
      for (auto c : touched) link[c] = 0.0;
    }
  }
  return any;
}

inline std::size_t renumber(std::vector<std::size_t>& community) {
  std::vector<std::size_t> id(community.size(), SIZE_MAX);
  std::size_t next = 0;
  for (auto& c : community) {
    if (id[c] == SIZE_MAX) id[c] = next++;
    c = id[c];
  }
  return next;
}

// Kernighan-Lin style fine-tuning: each sweep moves every node once, always
// taking the best available move (possibly downhill, possibly to an empty
// community), and keeps the best partition seen. Stops when a sweep finds no
// improvement. Expects communities numbered below n.
inline void kl_refine(const Matrix<double>& a, std::vector<std::size_t>& community) {
  const std::size_t n = a.rows();
  std::vector<double> strength(n, 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      strength[i] += a(i, j);
      two_m += a(i, j);
    }
  const double tolerance = 1e-12;
  Matrix<double> link(n, n);  // link(i, c): weight from node i into community c, self excluded
  for (;;) {
    std::vector<double> total(n, 0.0);
    std::vector<std::size_t> members(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      total[community[i]] += strength[i];
      ++members[community[i]];
    }
    link = Matrix<double>(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) link(i, community[j]) += a(i, j);
    std::vector<std::size_t> active;
    std::vector<std::size_t> vacant;
    for (std::size_t c = 0; c < n; ++c) (members[c] ? active : vacant).push_back(c);

    std::vector<bool> locked(n, false);
    auto best_partition = community;
    double q_change = 0.0;
    double best_change = 0.0;
    for (std::size_t step = 0; step < n; ++step) {
      double move_gain = -std::numeric_limits<double>::infinity();
      std::size_t move_node = n;
      std::size_t move_to = n;
      auto consider = [&](std::size_t i, std::size_t c, double stay) {
        const double gain = 2.0 * (link(i, c) - strength[i] * total[c] / two_m - stay) / two_m;
        if (gain > move_gain) {
          move_gain = gain;
          move_node = i;
          move_to = c;
        }
      };
      for (std::size_t i = 0; i < n; ++i) {
        if (locked[i]) continue;
        const std::size_t own = community[i];
        const double stay = link(i, own) - strength[i] * (total[own] - strength[i]) / two_m;
        for (auto c : active)
          if (c != own) consider(i, c, stay);
        if (members[own] > 1 && !vacant.empty()) consider(i, vacant.back(), stay);
      }
      if (move_node == n) break;
      const std::size_t from = community[move_node];
      if (members[move_to] == 0) {
        vacant.pop_back();
        active.push_back(move_to);
      }
      total[from] -= strength[move_node];
      total[move_to] += strength[move_node];
      ++members[move_to];
      if (--members[from] == 0) {
        active.erase(std::find(active.begin(), active.end(), from));
        vacant.push_back(from);
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (i == move_node) continue;
        link(i, from) -= a(i, move_node);
        link(i, move_to) += a(i, move_node);
      }
      community[move_node] = move_to;
      locked[move_node] = true;
      q_change += move_gain;
      if (q_change > best_change + tolerance) {
        best_change = q_change;
        best_partition = community;
      }
    }
    community = best_partition;
    if (best_change <= tolerance) return;
  }
}

// Tries merging each pair of communities followed by fine-tuning; accepts the
// first candidate that raises Q and starts over. Leaves communities numbered
// from 0.
inline void merge_refine(const Matrix<double>& a, std::vector<std::size_t>& community) {
  std::size_t k = renumber(community);
  double q = modularity(a, community);
  for (bool improved = true; improved;) {
    improved = false;
    for (std::size_t x = 0; x < k && !improved; ++x)
      for (std::size_t y = x + 1; y < k && !improved; ++y) {
        auto candidate = community;
        for (auto& c : candidate)
          if (c == y) c = x;
        kl_refine(a, candidate);
        const double cq = modularity(a, candidate);
        if (cq > q + 1e-12) {
          community = std::move(candidate);
          k = renumber(community);
          q = cq;
          improved = true;
        }
      }
  }
}

// One Louvain pass: local moving plus aggregation until no node moves, then a
// local-move sweep and fine-tuning on the original nodes.
inline std::vector<std::size_t> louvain_once(const WeightedGraph& g, Rng& rng) {
  std::vector<std::size_t> node_community(g.n);
  std::iota(node_community.begin(), node_community.end(), std::size_t{0});
  Matrix<double> level = g.weights;
  for (;;) {
    std::vector<std::size_t> community(level.rows());
    std::iota(community.begin(), community.end(), std::size_t{0});
    if (!local_moves(level, community, rng)) break;
    const std::size_t k = renumber(community);
    for (auto& c : node_community) c = community[c];
    Matrix<double> next(k, k, 0.0);
    for (std::size_t i = 0; i < level.rows(); ++i)
      for (std::size_t j = 0; j < level.cols(); ++j) next(community[i], community[j]) += level(i, j);
    level = std::move(next);
    if (k == 1) break;
  }
  local_moves(g.weights, node_community, rng);
  kl_refine(g.weights, node_community);
  merge_refine(g.weights, node_community);
  return node_community;
}

}  // namespace detail

inline constexpr std::size_t kLouvainRestarts = 8;

/// Best of kLouvainRestarts seeded Louvain runs (each with its own node
/// orders); ties keep the earliest run.
inline ModularityResult modularity_louvain(const WeightedGraph& g, std::uint64_t seed) {
  double total_weight = 0.0;
  for (auto w : g.weights.values()) total_weight += w;
  if (!(total_weight > 0.0)) fail(Errc::EmptyGraph, "modularity of a graph without edges");
  Rng rng(mix_seed(seed, 0x10B));
  ModularityResult best{-std::numeric_limits<double>::infinity(), {}};
  for (std::size_t run = 0; run < kLouvainRestarts; ++run) {
    auto partition = detail::louvain_once(g, rng);
    const double q = modularity(g.weights, partition);
    if (q > best.q) best = {q, std::move(partition)};
  }
  return best;
}

}  // namespace tractconn::graph
