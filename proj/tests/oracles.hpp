#pragma once

// Independent reference implementations used only by tests. These are written
// deliberately differently from the library code they check: brute-force
// enumeration instead of Brandes' accumulation for betweenness, explicit
// pseudo-inverse projectors instead of incremental deflation for the partial
// least squares extractor. Agreement between the two code paths is the
// evidence the fast implementations are right.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

namespace oracles {

// ---------------------------------------------------------------------------
// Graph oracles. Graphs are given as (n, undirected edge list on 0..n-1);
// duplicate edges and self-loops in the list are ignored, matching the
// simple-graph projection the library applies before centrality.
// ---------------------------------------------------------------------------

inline std::vector<std::set<int>> adjacency(
    int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
  for (auto [a, b] : edges) {
    if (a == b) continue;
    adj[static_cast<std::size_t>(a)].insert(b);
    adj[static_cast<std::size_t>(b)].insert(a);
  }
  return adj;
}

// Normalized degree centrality: distinct neighbours / (n-1).
inline std::vector<double> degree_oracle(
    int n, const std::vector<std::pair<int, int>>& edges) {
  auto adj = adjacency(n, edges);
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  if (n <= 1) return out;
  for (int v = 0; v < n; ++v) {
    out[static_cast<std::size_t>(v)] =
        static_cast<double>(adj[static_cast<std::size_t>(v)].size()) /
        static_cast<double>(n - 1);
  }
  return out;
}

namespace detail {

// Enumerates every shortest path between s and t by depth-first search over
// the BFS distance layers, crediting interior vertices.
inline void enumerate_paths(const std::vector<std::set<int>>& adj,
                            const std::vector<int>& dist, int target,
                            std::vector<int>& path, long long& total,
                            std::vector<long long>& through) {
  const int v = path.back();
  if (v == target) {
    ++total;
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
      ++through[static_cast<std::size_t>(path[i])];
    }
    return;
  }
  for (int w : adj[static_cast<std::size_t>(v)]) {
    if (dist[static_cast<std::size_t>(w)] ==
        dist[static_cast<std::size_t>(v)] + 1) {
      path.push_back(w);
      enumerate_paths(adj, dist, target, path, total, through);
      path.pop_back();
    }
  }
}

inline std::vector<int> bfs_dist(const std::vector<std::set<int>>& adj,
                                 int source) {
  std::vector<int> dist(adj.size(), -1);
  std::vector<int> queue{source};
  dist[static_cast<std::size_t>(source)] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int v = queue[head];
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (dist[static_cast<std::size_t>(w)] < 0) {
        dist[static_cast<std::size_t>(w)] =
            dist[static_cast<std::size_t>(v)] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

}  // namespace detail

// Normalized betweenness centrality by exhaustive shortest-path enumeration.
// Every unordered pair {s,t} of distinct reachable vertices contributes
// (#shortest s-t paths through v) / (#shortest s-t paths) to interior v;
// the sum is divided by (n-1)(n-2)/2. Intended for n <= ~10.
inline std::vector<double> betweenness_oracle(
    int n, const std::vector<std::pair<int, int>>& edges) {
  auto adj = adjacency(n, edges);
  std::vector<double> score(static_cast<std::size_t>(n), 0.0);
  if (n < 3) return score;
  for (int s = 0; s < n; ++s) {
    const auto dist = detail::bfs_dist(adj, s);
    for (int t = s + 1; t < n; ++t) {
      if (dist[static_cast<std::size_t>(t)] <= 0) continue;  // unreachable
      long long total = 0;
      std::vector<long long> through(static_cast<std::size_t>(n), 0);
      std::vector<int> path{s};
      detail::enumerate_paths(adj, dist, t, path, total, through);
      if (total == 0) continue;
      for (int v = 0; v < n; ++v) {
        if (v == s || v == t) continue;
        score[static_cast<std::size_t>(v)] +=
            static_cast<double>(through[static_cast<std::size_t>(v)]) /
            static_cast<double>(total);
      }
    }
  }
  const double denom = static_cast<double>(n - 1) *
                       static_cast<double>(n - 2) / 2.0;
  for (auto& s : score) s /= denom;
  return score;
}

// Group centralization of a normalized centrality vector: sum of gaps to the
// maximum, divided by the given theoretical denominator ((n-2) for degree,
// (n-1) for betweenness when centralities are normalized).
inline double centralization_oracle(const std::vector<double>& c,
                                    double denominator) {
  const double mx = *std::max_element(c.begin(), c.end());
  double acc = 0.0;
  for (double v : c) acc += mx - v;
  return acc / denominator;
}

// ---------------------------------------------------------------------------
// Partial least squares oracle (univariate response, SIMPLS construction).
//
// Component a is defined by the residual cross-covariance
//   S_a = (I - P_a P_a^+) X'y,
// where P_a stacks the x-loadings of the first a components and P_a^+ is its
// Moore-Penrose pseudo-inverse (computed here explicitly through a complete
// orthogonal decomposition -- no incremental deflation). The weight vector is
// S_a scaled so its score X w has unit norm.
// ---------------------------------------------------------------------------

struct SimplsOracleResult {
  Eigen::MatrixXd weights;   // m x A, scores have unit norm
  Eigen::MatrixXd scores;    // n x A
  Eigen::VectorXd cov_norm;  // ||S_a|| immediately before each extraction
  int components = 0;
};

inline SimplsOracleResult simpls_oracle(const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y,
                                        int max_components) {
  const Eigen::Index m = X.cols();
  const Eigen::VectorXd s0 = X.transpose() * y;
  const double scale = s0.norm();

  SimplsOracleResult out;
  out.weights.resize(m, max_components);
  out.scores.resize(X.rows(), max_components);
  out.cov_norm.resize(max_components);

  Eigen::MatrixXd loadings(m, 0);
  int a = 0;
  for (; a < max_components; ++a) {
    Eigen::VectorXd s = s0;
    if (loadings.cols() > 0) {
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(loadings);
      s -= loadings * (cod.pseudoInverse() * s0);
    }
    if (s.norm() <= 1e-12 * (scale > 0 ? scale : 1.0)) break;
    out.cov_norm(a) = s.norm();

    Eigen::VectorXd t = X * s;
    const double tn = t.norm();
    if (tn <= 1e-12) break;
    const Eigen::VectorXd w = s / tn;
    t /= tn;
    const Eigen::VectorXd p = X.transpose() * t;

    out.weights.col(a) = w;
    out.scores.col(a) = t;
    loadings.conservativeResize(Eigen::NoChange, loadings.cols() + 1);
    loadings.col(loadings.cols() - 1) = p;
  }
  out.components = a;
  out.weights.conservativeResize(Eigen::NoChange, a);
  out.scores.conservativeResize(Eigen::NoChange, a);
  out.cov_norm.conservativeResize(a);
  return out;
}

}  // namespace oracles
