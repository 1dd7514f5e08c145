#include "pairrank/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "pairrank/errors.hpp"

namespace pairrank {

WalkAnalysis walk_analysis(const ComparisonGraph& g, std::span<const double> weights,
                           NodeIndex reference, std::size_t cap) {
  const std::size_t n = g.size();
  if (n > cap) {
    throw ConfigError("walk analysis is dense and limited to " + std::to_string(cap) +
                      " objects; sampling-based diagnostics are not provided");
  }
  const SystemMatrices sys = system_matrices(g, weights, reference);

  WalkAnalysis out;
  out.graph = g;
  out.weights.assign(weights.begin(), weights.end());
  out.reference = reference;
  out.generalized_degree = sys.generalized_degree;
  out.rho_inf = sys.generalized_degree.minCoeff();

  const auto dim = static_cast<Eigen::Index>(n);
  const Eigen::MatrixXd m = Eigen::MatrixXd(sys.m);
  out.m_inverse = m.partialPivLu().solve(Eigen::MatrixXd::Identity(dim, dim));
  out.inf_norm_m_inverse = out.m_inverse.cwiseAbs().rowwise().sum().maxCoeff();
  const Eigen::MatrixXd c = out.m_inverse.transpose() * out.m_inverse;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c, Eigen::EigenvaluesOnly);
  out.lambda_c_max = eig.eigenvalues().maxCoeff();

  // The top-left block of M^{-1} is the fundamental matrix (I - T)^{-1}.
  out.theta = Eigen::MatrixXd::Zero(dim, dim);
  const auto ref = static_cast<Eigen::Index>(reference);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (i == ref) continue;
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (j == ref) continue;
      out.theta(j, i) = out.m_inverse(i, j) / sys.generalized_degree[j];
    }
  }
  return out;
}

NodeDAG build_node_dag(const WalkAnalysis& analysis, NodeIndex root, double tie_tolerance) {
  const ComparisonGraph& g = analysis.graph;
  const std::size_t n = g.size();
  if (root >= n) throw ConfigError("DAG root out of range");
  if (root == analysis.reference) throw ConfigError("DAG root must differ from the reference");

  NodeDAG dag;
  dag.root = root;
  dag.reference = analysis.reference;
  dag.theta.resize(n);
  for (NodeIndex j = 0; j < n; ++j) {
    dag.theta[j] = analysis.theta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(root));
  }
  dag.out_edges.resize(n);
  dag.in_edges.resize(n);

  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto [a, b] = g.edges()[e];
    NodeIndex from;
    NodeIndex to;
    if (b == dag.reference || a == dag.reference) {
      to = dag.reference;
      from = a == dag.reference ? b : a;
    } else if (dag.theta[a] - dag.theta[b] > tie_tolerance) {
      from = a;
      to = b;
    } else if (dag.theta[b] - dag.theta[a] > tie_tolerance) {
      from = b;
      to = a;
    } else {
      continue;
    }
    const double flow = analysis.weights[e] * (dag.theta[from] - dag.theta[to]);
    dag.out_edges[from].push_back(dag.edges.size());
    dag.in_edges[to].push_back(dag.edges.size());
    dag.edges.push_back({from, to, e, flow, 0.0});
  }

  for (NodeIndex j = 0; j < n; ++j) {
    const auto& out = dag.out_edges[j];
    if (out.empty()) continue;
    double total = 0.0;
    for (auto k : out) total += dag.edges[k].flow;
    for (auto k : out) {
      dag.edges[k].eta = total > 0.0 ? dag.edges[k].flow / total : 1.0 / static_cast<double>(out.size());
    }
  }
  return dag;
}

std::vector<NodeIndex> topological_order(const NodeDAG& dag) {
  const std::size_t n = dag.theta.size();
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& e : dag.edges) ++indegree[e.to];
  std::vector<NodeIndex> order;
  order.reserve(n);
  for (NodeIndex v = 0; v < n; ++v) {
    if (indegree[v] == 0) order.push_back(v);
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (auto k : dag.out_edges[order[head]]) {
      if (--indegree[dag.edges[k].to] == 0) order.push_back(dag.edges[k].to);
    }
  }
  if (order.size() != n) return {};
  return order;
}

namespace {

double oriented_distance(const ComparisonGraph& g, std::span<const double> d_hat,
                         const DagEdge& e) {
  return g.edges()[e.edge].i == e.from ? d_hat[e.edge] : -d_hat[e.edge];
}

std::vector<NodeIndex> checked_order(const NodeDAG& dag) {
  auto order = topological_order(dag);
  if (order.empty()) throw NumericalError("per-node orientation contains a cycle");
  return order;
}

}  // namespace

double dag_estimate(const NodeDAG& dag, const ComparisonGraph& g, std::span<const double> d_hat) {
  if (d_hat.size() != g.edge_count()) throw DataError("one distance per graph edge required");
  const auto order = checked_order(dag);
  std::vector<double> value(dag.theta.size(), 0.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeIndex j = *it;
    if (j == dag.reference) continue;
    double acc = 0.0;
    for (auto k : dag.out_edges[j]) {
      const auto& e = dag.edges[k];
      acc += (value[e.to] + oriented_distance(g, d_hat, e)) * e.eta;
    }
    value[j] = acc;
  }
  return value[dag.root];
}

double dag_estimate(const NodeDAG& dag, std::span<const EdgeEstimate> estimates) {
  std::vector<Edge> edges;
  std::vector<double> d_hat;
  edges.reserve(estimates.size());
  d_hat.reserve(estimates.size());
  for (const auto& e : estimates) {
    edges.push_back({e.i, e.j});
    d_hat.push_back(e.d_hat);
  }
  return dag_estimate(dag, ComparisonGraph(dag.theta.size(), std::move(edges)), d_hat);
}

double dag_flow_estimate(const NodeDAG& dag, const ComparisonGraph& g,
                         std::span<const double> d_hat) {
  if (d_hat.size() != g.edge_count()) throw DataError("one distance per graph edge required");
  double total = 0.0;
  for (const auto& e : dag.edges) total += e.flow * oriented_distance(g, d_hat, e);
  return total;
}

std::vector<double> node_visit_probabilities(const NodeDAG& dag) {
  const auto order = checked_order(dag);
  std::vector<double> visits(dag.theta.size(), 0.0);
  visits[dag.root] = 1.0;
  for (const NodeIndex j : order) {
    for (auto k : dag.out_edges[j]) visits[dag.edges[k].to] += visits[j] * dag.edges[k].eta;
  }
  return visits;
}

std::vector<double> node_inflow(const NodeDAG& dag) {
  std::vector<double> inflow(dag.theta.size(), 0.0);
  for (const auto& e : dag.edges) inflow[e.to] += e.flow;
  inflow[dag.root] = 1.0;
  return inflow;
}

double flow_conservation_check(const NodeDAG& dag, const WalkAnalysis& analysis) {
  const std::size_t n = analysis.graph.size();
  if (dag.theta.size() != n) throw DataError("DAG and analysis describe different graphs");
  const auto inflow = node_inflow(dag);
  double worst = 0.0;
  for (NodeIndex j = 0; j < n; ++j) {
    if (j == dag.reference) continue;
    double outflow = 0.0;
    for (auto k : dag.out_edges[j]) outflow += dag.edges[k].flow;
    worst = std::max(worst, std::abs(outflow - inflow[j]));
  }
  return worst;
}

double mse_bound(const WalkAnalysis& analysis, double comparisons_per_edge, double c) {
  if (!(comparisons_per_edge >= 1.0)) throw DomainError("W must be at least 1");
  const double n = static_cast<double>(analysis.graph.size());
  return c * analysis.lambda_c_max * n / (comparisons_per_edge * analysis.rho_inf);
}

}  // namespace pairrank
