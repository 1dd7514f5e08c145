#include "pairrank/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "pairrank/errors.hpp"

namespace pairrank {

ComparisonGraph::ComparisonGraph(std::size_t n, std::vector<Edge> edges,
                                 std::vector<std::int64_t> budgets)
    : n_(n), edges_(std::move(edges)), budgets_(std::move(budgets)), adjacency_(n) {
  if (!budgets_.empty() && budgets_.size() != edges_.size()) {
    throw DataError("per-edge budget list does not match the edge list");
  }
  std::set<Edge> seen;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    auto [a, b] = edges_[e];
    if (a >= n_ || b >= n_) {
      throw DataError("edge endpoint out of range: (" + std::to_string(a + 1) + "," +
                      std::to_string(b + 1) + ") with n=" + std::to_string(n_));
    }
    if (a == b) {
      throw DataError("self-loop on object " + std::to_string(a + 1));
    }
    edges_[e] = canonical_edge(a, b);
    if (!seen.insert(edges_[e]).second) {
      throw DataError("duplicate edge (" + std::to_string(edges_[e].i + 1) + "," +
                      std::to_string(edges_[e].j + 1) + ")");
    }
    adjacency_[edges_[e].i].push_back({edges_[e].j, e});
    adjacency_[edges_[e].j].push_back({edges_[e].i, e});
  }
  for (auto b : budgets_) {
    if (b < 0) throw DataError("per-edge budget must be non-negative");
  }
}

std::optional<std::size_t> ComparisonGraph::find_edge(NodeIndex a, NodeIndex b) const {
  if (a >= n_ || b >= n_) return std::nullopt;
  const NodeIndex from = degree(a) <= degree(b) ? a : b;
  const NodeIndex to = from == a ? b : a;
  for (const auto& inc : adjacency_[from]) {
    if (inc.node == to) return inc.edge;
  }
  return std::nullopt;
}

namespace {

std::vector<Edge> complete_edges(std::size_t n) {
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (NodeIndex i = 1; i < n; ++i) {
    for (NodeIndex j = 0; j < i; ++j) edges.push_back({i, j});
  }
  return edges;
}

std::vector<Edge> star_edges(std::size_t n, NodeIndex center) {
  std::vector<Edge> edges;
  for (NodeIndex v = 0; v < n; ++v) {
    if (v != center) edges.push_back(canonical_edge(v, center));
  }
  return edges;
}

std::vector<Edge> wheel_edges(std::size_t n) {
  const NodeIndex hub = n - 1;
  const std::size_t rim = n - 1;
  std::set<Edge> edges;
  for (NodeIndex v = 0; v < rim; ++v) {
    edges.insert(canonical_edge(v, hub));
    if (rim >= 2) {
      const NodeIndex next = (v + 1) % rim;
      if (next != v) edges.insert(canonical_edge(v, next));
    }
  }
  return {edges.begin(), edges.end()};
}

// Hubs are the last N' objects joined by a path. The remaining objects are
// split into N' contiguous groups; group j hangs off hub n-1-j and its members
// only link to each other, keeping every member's degree <= max_degree.
std::vector<Edge> hub_edges(std::size_t n, std::size_t hubs, std::size_t max_degree) {
  if (hubs == 0 || hubs > n) throw ConfigError("hub graph needs 1 <= hubs <= n");
  if (max_degree == 0) throw ConfigError("hub graph needs max_degree >= 1");
  std::vector<Edge> edges;
  const NodeIndex first_hub = n - hubs;
  for (NodeIndex h = first_hub + 1; h < n; ++h) edges.push_back({h, h - 1});

  const std::size_t others = first_hub;
  std::size_t start = 0;
  for (std::size_t group = 0; group < hubs; ++group) {
    const std::size_t size = others / hubs + (group < others % hubs ? 1 : 0);
    const NodeIndex hub = n - 1 - group;
    for (std::size_t k = 0; k < size; ++k) {
      const NodeIndex v = start + k;
      edges.push_back(canonical_edge(hub, v));
      if (k == 0) continue;
      if (max_degree >= 3 || (max_degree == 2 && k % 2 == 1)) {
        edges.push_back(canonical_edge(v, v - 1));
      }
    }
    start += size;
  }
  return edges;
}

bool has_suitable_pair(const std::vector<NodeIndex>& stubs, const std::set<Edge>& edges) {
  std::vector<NodeIndex> nodes(stubs);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      if (!edges.contains(canonical_edge(nodes[a], nodes[b]))) return true;
    }
  }
  return false;
}

// Pairing model: shuffle the open stubs, keep every pair that forms a new
// simple edge, and reshuffle the rest. Fails when no admissible pair remains.
std::optional<std::vector<Edge>> pair_stubs(std::size_t n, std::size_t degree,
                                            std::mt19937_64& rng) {
  std::vector<NodeIndex> open;
  open.reserve(n * degree);
  for (NodeIndex v = 0; v < n; ++v) open.insert(open.end(), degree, v);

  std::set<Edge> edges;
  while (!open.empty()) {
    std::shuffle(open.begin(), open.end(), rng);
    std::vector<NodeIndex> leftover;
    for (std::size_t k = 0; k + 1 < open.size(); k += 2) {
      const NodeIndex u = open[k];
      const NodeIndex v = open[k + 1];
      if (u != v && edges.insert(canonical_edge(u, v)).second) continue;
      leftover.push_back(u);
      leftover.push_back(v);
    }
    if (!leftover.empty() && !has_suitable_pair(leftover, edges)) return std::nullopt;
    open = std::move(leftover);
  }
  return std::vector<Edge>(edges.begin(), edges.end());
}

ComparisonGraph random_regular(std::size_t n, std::size_t degree, std::mt19937_64& rng) {
  if (degree == 0 || degree >= n) {
    throw ConfigError("random regular graph needs 0 < degree < n (degree=" +
                      std::to_string(degree) + ", n=" + std::to_string(n) + ")");
  }
  if ((n * degree) % 2 != 0) {
    throw ConfigError("random regular graph needs n*degree even");
  }
  for (int attempt = 0; attempt < kMaxGraphAttempts; ++attempt) {
    auto edges = pair_stubs(n, degree, rng);
    if (!edges) continue;
    ComparisonGraph g(n, std::move(*edges));
    if (is_connected(g)) return g;
  }
  throw GenerationError("no connected " + std::to_string(degree) + "-regular graph on " +
                        std::to_string(n) + " nodes after " + std::to_string(kMaxGraphAttempts) +
                        " attempts");
}

}  // namespace

ComparisonGraph build_graph(const GraphSpec& spec, std::mt19937_64& rng) {
  const std::size_t n = spec.n;
  if (n < 2) throw ConfigError("a comparison graph needs at least 2 objects");
  switch (spec.kind) {
    case GraphKind::Complete:
      return ComparisonGraph(n, complete_edges(n));
    case GraphKind::Star: {
      const NodeIndex center = spec.center.value_or(n - 1);
      if (center >= n) throw ConfigError("star center out of range");
      return ComparisonGraph(n, star_edges(n, center));
    }
    case GraphKind::RandomRegular:
      return random_regular(n, spec.degree, rng);
    case GraphKind::Hub:
      return ComparisonGraph(n, hub_edges(n, spec.hubs, spec.max_degree));
    case GraphKind::Wheel:
      if (n < 4) throw ConfigError("wheel graph needs n >= 4");
      return ComparisonGraph(n, wheel_edges(n));
    case GraphKind::FromEdges: {
      ComparisonGraph g(n, spec.edges, spec.budgets);
      if (!is_connected(g)) throw ConfigError("supplied edge list is not connected");
      return g;
    }
  }
  throw ConfigError("unknown graph kind");
}

std::vector<std::size_t> connected_components(const ComparisonGraph& g) {
  constexpr auto unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(g.size(), unset);
  std::size_t next = 0;
  std::vector<NodeIndex> stack;
  for (NodeIndex s = 0; s < g.size(); ++s) {
    if (label[s] != unset) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeIndex v = stack.back();
      stack.pop_back();
      for (const auto& inc : g.neighbors(v)) {
        if (label[inc.node] == unset) {
          label[inc.node] = next;
          stack.push_back(inc.node);
        }
      }
    }
    ++next;
  }
  return label;
}

bool is_connected(const ComparisonGraph& g) {
  if (g.size() == 0) return false;
  const auto label = connected_components(g);
  return std::all_of(label.begin(), label.end(), [](std::size_t c) { return c == 0; });
}

SystemMatrices system_matrices(const ComparisonGraph& g, std::span<const double> weights,
                               NodeIndex reference) {
  const std::size_t n = g.size();
  if (weights.size() != g.edge_count()) {
    throw DataError("weight count does not match edge count");
  }
  if (reference >= n) throw ConfigError("reference object out of range");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("edge weights must be positive and finite");
  }
  if (!is_connected(g)) {
    throw NumericalError("graph is disconnected: M would be singular");
  }

  SystemMatrices out;
  out.reference = reference;
  out.generalized_degree = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    out.generalized_degree[static_cast<Eigen::Index>(g.edges()[e].i)] += weights[e];
    out.generalized_degree[static_cast<Eigen::Index>(g.edges()[e].j)] += weights[e];
  }

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> htilde;
  std::vector<Triplet> h;
  std::vector<Triplet> m;
  for (NodeIndex v = 0; v < n; ++v) {
    const auto row = static_cast<Eigen::Index>(v);
    m.emplace_back(row, row, 1.0);
    for (const auto& inc : g.neighbors(v)) {
      const auto col = static_cast<Eigen::Index>(inc.node);
      const double value = weights[inc.edge] / out.generalized_degree[row];
      htilde.emplace_back(row, col, value);
      if (v != reference) {
        h.emplace_back(row, col, value);
        m.emplace_back(row, col, -value);
      }
    }
  }
  const auto dim = static_cast<Eigen::Index>(n);
  out.htilde.resize(dim, dim);
  out.htilde.setFromTriplets(htilde.begin(), htilde.end());
  out.h.resize(dim, dim);
  out.h.setFromTriplets(h.begin(), h.end());
  out.m.resize(dim, dim);
  out.m.setFromTriplets(m.begin(), m.end());
  return out;
}

ComparisonGraph knn_quality_graph(std::span<const double> qhat, std::size_t rho2) {
  const std::size_t n = qhat.size();
  if (n < 2) throw ConfigError("need at least 2 objects");
  if (rho2 >= n) throw ConfigError("rho2 must be smaller than the number of objects");
  std::set<Edge> edges;
  std::vector<NodeIndex> others;
  for (NodeIndex v = 0; v < n; ++v) {
    others.clear();
    for (NodeIndex u = 0; u < n; ++u) {
      if (u != v) others.push_back(u);
    }
    std::stable_sort(others.begin(), others.end(), [&](NodeIndex a, NodeIndex b) {
      return std::abs(qhat[a] - qhat[v]) < std::abs(qhat[b] - qhat[v]);
    });
    for (std::size_t k = 0; k < rho2; ++k) edges.insert(canonical_edge(v, others[k]));
  }
  return ComparisonGraph(n, std::vector<Edge>(edges.begin(), edges.end()));
}

ComparisonGraph graph_union(const ComparisonGraph& g1, const ComparisonGraph& g2) {
  if (g1.size() != g2.size()) {
    throw ConfigError("graph union needs graphs on the same object set");
  }
  std::vector<Edge> edges = g1.edges();
  for (const auto& e : g2.edges()) {
    if (!g1.find_edge(e.i, e.j)) edges.push_back(e);
  }
  return ComparisonGraph(g1.size(), std::move(edges));
}

}  // namespace pairrank
