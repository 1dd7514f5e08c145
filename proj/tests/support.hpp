#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "pairrank/estimators.hpp"
#include "pairrank/graph.hpp"

namespace pairrank::testkit {

// Random spanning tree plus each remaining pair with probability `extra`.
inline ComparisonGraph random_connected_graph(std::size_t n, double extra, std::mt19937_64& rng) {
  std::vector<NodeIndex> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Edge> edges;
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  for (std::size_t k = 1; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    const NodeIndex a = perm[k];
    const NodeIndex b = perm[pick(rng)];
    edges.push_back(canonical_edge(a, b));
    used[a][b] = used[b][a] = true;
  }
  std::bernoulli_distribution coin(extra);
  for (NodeIndex a = 0; a < n; ++a) {
    for (NodeIndex b = 0; b < a; ++b) {
      if (!used[a][b] && coin(rng)) edges.push_back({a, b});
    }
  }
  std::shuffle(edges.begin(), edges.end(), rng);
  return ComparisonGraph(n, std::move(edges));
}

inline std::vector<double> random_vector(std::size_t n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Edge estimates aligned with g's edges carrying the given distances and weights.
inline std::vector<EdgeEstimate> make_estimates(const ComparisonGraph& g, const std::vector<double>& d,
                                                const std::vector<double>& omega) {
  std::vector<EdgeEstimate> out;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    out.push_back({g.edges()[e].i, g.edges()[e].j, 1, 0.5, 0.5, d[e], 1.0, omega[e], false});
  }
  return out;
}

inline std::vector<double> exact_distances(const ComparisonGraph& g, const std::vector<double>& q) {
  std::vector<double> d;
  for (const auto& e : g.edges()) d.push_back(q[e.i] - q[e.j]);
  return d;
}

inline std::int64_t naive_kendall(const std::vector<NodeIndex>& a, const std::vector<NodeIndex>& b) {
  const std::size_t n = a.size();
  std::vector<std::size_t> pos_a(n);
  std::vector<std::size_t> pos_b(n);
  for (std::size_t k = 0; k < n; ++k) {
    pos_a[a[k]] = k;
    pos_b[b[k]] = k;
  }
  std::int64_t count = 0;
  for (NodeIndex x = 0; x < n; ++x) {
    for (NodeIndex y = x + 1; y < n; ++y) {
      if ((pos_a[x] < pos_a[y]) != (pos_b[x] < pos_b[y])) ++count;
    }
  }
  return count;
}

}  // namespace pairrank::testkit
