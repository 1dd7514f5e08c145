#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

namespace pairrank {

/// Zero-based object index. Files and the CLI use one-based indices.
using NodeIndex = std::size_t;

/// Undirected edge stored in canonical orientation: i > j.
struct Edge {
  NodeIndex i;
  NodeIndex j;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Returns the canonical (larger, smaller) orientation of {a, b}.
inline Edge canonical_edge(NodeIndex a, NodeIndex b) { return a > b ? Edge{a, b} : Edge{b, a}; }

/// Neighbor entry of an adjacency list: the other endpoint and the edge id.
struct Incidence {
  NodeIndex node;
  std::size_t edge;
};

/// Undirected comparison graph on n objects. Immutable after construction.
///
/// Edges keep the order in which they were supplied, so per-edge data
/// (budgets, counts, estimates, weights) can be stored in parallel arrays.
class ComparisonGraph {
 public:
  ComparisonGraph() = default;

  /// Validates endpoints, rejects self-loops and duplicates, and stores every
  /// edge with i > j. `budgets`, when non-empty, holds one W per edge.
  ComparisonGraph(std::size_t n, std::vector<Edge> edges, std::vector<std::int64_t> budgets = {});

  std::size_t size() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const Incidence> neighbors(NodeIndex v) const { return adjacency_[v]; }
  std::size_t degree(NodeIndex v) const { return adjacency_[v].size(); }

  bool has_budgets() const { return !budgets_.empty(); }
  const std::vector<std::int64_t>& budgets() const { return budgets_; }

  std::optional<std::size_t> find_edge(NodeIndex a, NodeIndex b) const;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::int64_t> budgets_;
  std::vector<std::vector<Incidence>> adjacency_;
};

enum class GraphKind { Complete, Star, RandomRegular, Hub, Wheel, FromEdges };

struct GraphSpec {
  GraphKind kind = GraphKind::RandomRegular;
  std::size_t n = 0;
  /// RandomRegular degree rho.
  std::size_t degree = 6;
  /// Star center; defaults to the last object.
  std::optional<NodeIndex> center;
  /// Hub graphs: number of hubs N' (the last N' objects) and the maximum
  /// degree Delta of non-hub objects.
  std::size_t hubs = 1;
  std::size_t max_degree = 3;
  /// FromEdges input.
  std::vector<Edge> edges;
  std::vector<std::int64_t> budgets;
};

/// Attempts allowed for rejection sampling of connected regular graphs.
inline constexpr int kMaxGraphAttempts = 1000;

ComparisonGraph build_graph(const GraphSpec& spec, std::mt19937_64& rng);

bool is_connected(const ComparisonGraph& g);

/// Component label per node, labels numbered 0.. in order of lowest member.
std::vector<std::size_t> connected_components(const ComparisonGraph& g);

/// Row-stochastic matrices of the weighted random walk on the graph.
///
/// htilde[i][j] = w_ij / rho_i for neighbours; h is htilde with the reference
/// row zeroed; m = I - h is nonsingular on a connected graph.
struct SystemMatrices {
  Eigen::SparseMatrix<double> htilde;
  Eigen::SparseMatrix<double> h;
  Eigen::SparseMatrix<double> m;
  Eigen::VectorXd generalized_degree;
  NodeIndex reference = 0;
};

SystemMatrices system_matrices(const ComparisonGraph& g, std::span<const double> weights,
                               NodeIndex reference);

/// Connects every object to its `rho2` closest objects by estimated quality.
/// Ties in |q_i - q_j| go to the lower index.
ComparisonGraph knn_quality_graph(std::span<const double> qhat, std::size_t rho2);

/// Edge-set union. Edges of g1 come first, then new edges of g2. Budgets are dropped.
ComparisonGraph graph_union(const ComparisonGraph& g1, const ComparisonGraph& g2);

}  // namespace pairrank
