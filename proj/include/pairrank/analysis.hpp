#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pairrank/estimators.hpp"
#include "pairrank/graph.hpp"

namespace pairrank {

/// Largest graph handled by the dense random-walk diagnostics.
inline constexpr std::size_t kDenseAnalysisCap = 512;

/// Absorbing random walk towards the reference object.
///
/// With T the walk matrix restricted to non-reference objects,
/// theta(j, i) = [(I - T)^{-1}]_{i,j} / rho_j is the expected number of
/// traversals of each edge out of j for a walk started at i. Row and column
/// of the reference are zero.
struct WalkAnalysis {
  ComparisonGraph graph;
  std::vector<double> weights;
  NodeIndex reference = 0;
  Eigen::VectorXd generalized_degree;
  Eigen::MatrixXd theta;
  Eigen::MatrixXd m_inverse;
  /// Largest eigenvalue of C = (M^{-1})^T M^{-1}.
  double lambda_c_max = 0.0;
  double inf_norm_m_inverse = 0.0;
  double rho_inf = 0.0;
};

WalkAnalysis walk_analysis(const ComparisonGraph& g, std::span<const double> weights,
                           NodeIndex reference, std::size_t cap = kDenseAnalysisCap);

/// Directed edge of a per-node DAG. `flow` is w_jl (theta_j - theta_l) and
/// `eta` the probability of taking this edge out of `from`.
struct DagEdge {
  NodeIndex from;
  NodeIndex to;
  std::size_t edge;
  double flow;
  double eta;
};

/// Orientation of the comparison graph seen from one start object: edges into
/// the reference always kept, others point from larger to smaller theta.
struct NodeDAG {
  NodeIndex root = 0;
  NodeIndex reference = 0;
  std::vector<double> theta;
  std::vector<DagEdge> edges;
  std::vector<std::vector<std::size_t>> out_edges;
  std::vector<std::vector<std::size_t>> in_edges;
};

inline constexpr double kThetaTieTolerance = 1e-12;

NodeDAG build_node_dag(const WalkAnalysis& analysis, NodeIndex root,
                       double tie_tolerance = kThetaTieTolerance);

/// Nodes in an order where every edge goes forward; empty if a cycle exists.
std::vector<NodeIndex> topological_order(const NodeDAG& dag);

/// Expected reward of the biased walk from the root, solving
/// q_j = sum_l (q_l + d_jl) eta_{j->l} with q_reference = 0.
/// `d_hat` holds d_ij for every graph edge in its stored (i > j) orientation.
double dag_estimate(const NodeDAG& dag, const ComparisonGraph& g, std::span<const double> d_hat);
double dag_estimate(const NodeDAG& dag, std::span<const EdgeEstimate> estimates);

/// Same quantity written as sum over DAG edges of flow * d_jl.
double dag_flow_estimate(const NodeDAG& dag, const ComparisonGraph& g,
                         std::span<const double> d_hat);

/// Probability that the biased walk from the root passes through each node.
std::vector<double> node_visit_probabilities(const NodeDAG& dag);

/// In-flow sum_l w (theta_l - theta_j) over in-edges, with 1 at the root.
std::vector<double> node_inflow(const NodeDAG& dag);

/// Max over non-reference nodes of |out-flow - in-flow| (in-flow = 1 at the root).
double flow_conservation_check(const NodeDAG& dag, const WalkAnalysis& analysis);

/// Unscaled shape c * lambda_C_max * N / (W * rho_inf) of the LS mean-square
/// error bound; c is an unspecified constant and defaults to 1.
double mse_bound(const WalkAnalysis& analysis, double comparisons_per_edge, double c = 1.0);

}  // namespace pairrank
