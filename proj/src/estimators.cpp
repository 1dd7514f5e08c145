#include "pairrank/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include <Eigen/SparseCholesky>

#include "pairrank/errors.hpp"

namespace pairrank {

ComparisonCounts::ComparisonCounts(std::size_t n, std::vector<EdgeCount> entries) : n_(n) {
  std::set<Edge> seen;
  entries_.reserve(entries.size());
  for (auto c : entries) {
    if (c.i >= n || c.j >= n || c.i == c.j) {
      throw DataError("invalid comparison edge (" + std::to_string(c.i + 1) + "," +
                      std::to_string(c.j + 1) + ")");
    }
    if (c.w < 0 || c.k < 0 || c.k > c.w) {
      throw DataError("comparison counts must satisfy 0 <= k <= w");
    }
    if (c.i < c.j) c = {c.j, c.i, c.w, c.w - c.k};
    if (!seen.insert({c.i, c.j}).second) {
      throw DataError("duplicate comparison edge (" + std::to_string(c.i + 1) + "," +
                      std::to_string(c.j + 1) + ")");
    }
    if (c.w == 0) continue;
    entries_.push_back(c);
  }
}

ComparisonGraph ComparisonCounts::graph() const {
  std::vector<Edge> edges;
  std::vector<std::int64_t> budgets;
  edges.reserve(entries_.size());
  budgets.reserve(entries_.size());
  for (const auto& c : entries_) {
    edges.push_back({c.i, c.j});
    budgets.push_back(c.w);
  }
  return ComparisonGraph(n_, std::move(edges), std::move(budgets));
}

void ComparisonCounts::add(NodeIndex a, NodeIndex b, std::int64_t w, std::int64_t wins_for_a) {
  if (a >= n_ || b >= n_ || a == b) throw DataError("invalid comparison edge");
  if (w < 0 || wins_for_a < 0 || wins_for_a > w) {
    throw DataError("comparison counts must satisfy 0 <= k <= w");
  }
  if (w == 0) return;
  const Edge e = canonical_edge(a, b);
  const std::int64_t wins_for_i = e.i == a ? wins_for_a : w - wins_for_a;
  for (auto& c : entries_) {
    if (c.i == e.i && c.j == e.j) {
      c.w += w;
      c.k += wins_for_i;
      return;
    }
  }
  entries_.push_back({e.i, e.j, w, wins_for_i});
}

std::int64_t ComparisonCounts::total_comparisons() const {
  return std::accumulate(entries_.begin(), entries_.end(), std::int64_t{0},
                         [](std::int64_t acc, const EdgeCount& c) { return acc + c.w; });
}

std::string algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::LS:
      return "ls";
    case Algorithm::WLS:
      return "wls";
    case Algorithm::ML:
      return "ml";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "ls") return Algorithm::LS;
  if (lower == "wls") return Algorithm::WLS;
  if (lower == "ml") return Algorithm::ML;
  throw ConfigError("unknown algorithm '" + std::string(name) + "' (expected ls, wls or ml)");
}

std::vector<EdgeEstimate> estimate_distances(std::span<const EdgeCount> counts,
                                             const PreferenceModel& model, double chi) {
  if (!(chi > 0.0 && chi < 0.5)) throw DomainError("chi must lie in (0, 1/2)");
  std::vector<EdgeEstimate> out;
  out.reserve(counts.size());
  for (const auto& c : counts) {
    if (c.w <= 0) {
      throw DataError("edge (" + std::to_string(c.i + 1) + "," + std::to_string(c.j + 1) +
                      ") has no comparisons");
    }
    if (c.k < 0 || c.k > c.w) throw DataError("comparison counts must satisfy 0 <= k <= w");
    EdgeEstimate est{};
    est.i = c.i;
    est.j = c.j;
    est.w = c.w;
    est.p_hat = static_cast<double>(c.k) / static_cast<double>(c.w);
    est.p_tilde = std::clamp(est.p_hat, chi, 1.0 - chi);
    est.clamped = est.p_tilde != est.p_hat;
    est.d_hat = inverse_preference(model, est.p_tilde);
    const double slope = inverse_derivative(model, est.p_tilde);
    est.sigma2_hat = slope * slope * est.p_tilde * (1.0 - est.p_tilde) / static_cast<double>(c.w);
    est.omega = 1.0;
    out.push_back(est);
  }
  return out;
}

void wls_weights(std::span<EdgeEstimate> estimates, const PreferenceModel& model) {
  for (auto& est : estimates) {
    const double slope = inverse_derivative(model, est.p_tilde);
    est.sigma2_hat =
        slope * slope * est.p_tilde * (1.0 - est.p_tilde) / static_cast<double>(est.w);
    est.omega = 1.0 / est.sigma2_hat;
  }
}

void unit_weights(std::span<EdgeEstimate> estimates) {
  for (auto& est : estimates) est.omega = 1.0;
}

SimulationDiagnostics simulation_diagnostics(std::span<const EdgeEstimate> estimates,
                                             std::span<const double> q_true,
                                             const PreferenceModel& model) {
  SimulationDiagnostics out;
  out.y.reserve(estimates.size());
  out.z.reserve(estimates.size());
  for (const auto& est : estimates) {
    const double d = q_true[est.i] - q_true[est.j];
    out.y.push_back(est.p_hat - preference_prob(model, d));
    out.z.push_back(est.d_hat - d);
  }
  return out;
}

namespace {

using Triplet = Eigen::Triplet<double>;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Maps node v to its coordinate in the reduced system without the reference.
Eigen::Index free_index(NodeIndex v, NodeIndex reference) {
  return static_cast<Eigen::Index>(v < reference ? v : v - 1);
}

// Row residual of M q = (H o D) 1, i.e. q_v - sum_u (w_vu / rho_v)(q_u + d_vu).
double normal_equation_residual(const ComparisonGraph& g, std::span<const EdgeEstimate> est,
                                std::span<const double> q, NodeIndex reference) {
  double worst = std::abs(q[reference]);
  for (NodeIndex v = 0; v < g.size(); ++v) {
    if (v == reference) continue;
    double rho = 0.0;
    double acc = 0.0;
    for (const auto& inc : g.neighbors(v)) {
      const auto& e = est[inc.edge];
      const double d = e.i == v ? e.d_hat : -e.d_hat;
      rho += e.omega;
      acc += e.omega * (q[inc.node] + d);
    }
    worst = std::max(worst, std::abs(q[v] - acc / rho));
  }
  return worst;
}

}  // namespace

QualityEstimate ls_solve(const ComparisonGraph& g, std::span<const EdgeEstimate> estimates,
                         NodeIndex reference) {
  const std::size_t n = g.size();
  if (reference >= n) throw ConfigError("reference object out of range");
  if (estimates.size() != g.edge_count()) {
    throw DataError("every graph edge needs exactly one distance estimate");
  }
  for (std::size_t e = 0; e < estimates.size(); ++e) {
    const auto& est = estimates[e];
    if (est.i != g.edges()[e].i || est.j != g.edges()[e].j) {
      throw DataError("distance estimates are not aligned with the graph edges");
    }
    if (!std::isfinite(est.d_hat) || !(est.omega > 0.0) || !std::isfinite(est.omega)) {
      throw DomainError("distance estimates need finite d_hat and positive finite weights");
    }
  }
  if (!is_connected(g)) {
    throw NumericalError("comparison graph is disconnected: least-squares system is singular");
  }

  const auto dim = static_cast<Eigen::Index>(n - 1);
  std::vector<Triplet> triplets;
  triplets.reserve(4 * estimates.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  for (const auto& est : estimates) {
    const bool i_free = est.i != reference;
    const bool j_free = est.j != reference;
    const Eigen::Index a = i_free ? free_index(est.i, reference) : -1;
    const Eigen::Index b = j_free ? free_index(est.j, reference) : -1;
    if (i_free) {
      triplets.emplace_back(a, a, est.omega);
      rhs[a] += est.omega * est.d_hat;
    }
    if (j_free) {
      triplets.emplace_back(b, b, est.omega);
      rhs[b] -= est.omega * est.d_hat;
    }
    if (i_free && j_free) {
      triplets.emplace_back(a, b, -est.omega);
      triplets.emplace_back(b, a, -est.omega);
    }
  }
  SparseMatrix laplacian(dim, dim);
  laplacian.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::SimplicialLDLT<SparseMatrix> solver(laplacian);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("least-squares factorization failed");
  }
  Eigen::VectorXd x = solver.solve(rhs);

  QualityEstimate out;
  out.reference = reference;
  out.q_hat.assign(n, 0.0);
  auto scatter = [&] {
    for (NodeIndex v = 0; v < n; ++v) {
      out.q_hat[v] = v == reference ? 0.0 : x[free_index(v, reference)];
    }
  };
  scatter();
  int iterations = 1;
  double residual = normal_equation_residual(g, estimates, out.q_hat, reference);
  // Iterative refinement for badly scaled weights.
  while (residual > 1e-12 && iterations < 4) {
    Eigen::VectorXd correction = solver.solve(rhs - laplacian * x);
    x += correction;
    scatter();
    ++iterations;
    residual = normal_equation_residual(g, estimates, out.q_hat, reference);
  }

  out.diagnostics.residual_norm = residual;
  out.diagnostics.iterations = iterations;
  out.diagnostics.converged = residual < 1e-10;
  out.diagnostics.clamped_edges = static_cast<std::size_t>(
      std::count_if(estimates.begin(), estimates.end(), [](const auto& e) { return e.clamped; }));
  return out;
}

namespace {

struct Evaluation {
  double psi = 0.0;
  Eigen::VectorXd gradient;
  std::vector<Triplet> hessian;
  bool clamped = false;
};

Evaluation evaluate_likelihood(std::span<const double> q, const ComparisonCounts& counts,
                               const PreferenceModel& model, bool derivatives) {
  if (q.size() != counts.size()) {
    throw DataError("quality vector length does not match the number of objects");
  }
  if (counts.edges().empty()) throw DataError("log-likelihood needs at least one counted edge");
  Evaluation out;
  if (derivatives) {
    out.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q.size()));
    out.hessian.reserve(4 * counts.edges().size());
  }
  for (const auto& c : counts.edges()) {
    auto [p, dp, d2p] = prob_derivatives(model, q[c.i] - q[c.j]);
    if (p < kLikelihoodClamp || p > 1.0 - kLikelihoodClamp) {
      p = std::clamp(p, kLikelihoodClamp, 1.0 - kLikelihoodClamp);
      out.clamped = true;
    }
    const double w = static_cast<double>(c.w);
    const double s = static_cast<double>(c.k) / w;
    if (c.k > 0) out.psi += w * s * std::log(p);
    if (c.k < c.w) out.psi += w * (1.0 - s) * std::log1p(-p);
    if (!derivatives) continue;

    const double var = p * (1.0 - p);
    const double score = (s - p) / var;
    const double curvature = d2p * score - dp * dp * (p * p + s * (1.0 - 2.0 * p)) / (var * var);
    const auto a = static_cast<Eigen::Index>(c.i);
    const auto b = static_cast<Eigen::Index>(c.j);
    out.gradient[a] += w * dp * score;
    out.gradient[b] -= w * dp * score;
    out.hessian.emplace_back(a, a, w * curvature);
    out.hessian.emplace_back(b, b, w * curvature);
    out.hessian.emplace_back(a, b, -w * curvature);
    out.hessian.emplace_back(b, a, -w * curvature);
  }
  return out;
}

double free_gradient_norm(const Eigen::VectorXd& gradient, NodeIndex reference) {
  double worst = 0.0;
  for (Eigen::Index v = 0; v < gradient.size(); ++v) {
    if (static_cast<NodeIndex>(v) != reference) worst = std::max(worst, std::abs(gradient[v]));
  }
  return worst;
}

}  // namespace

double psi_value(std::span<const double> q, const ComparisonCounts& counts,
                 const PreferenceModel& model) {
  return evaluate_likelihood(q, counts, model, false).psi;
}

MlDerivatives ml_derivatives(std::span<const double> q, const ComparisonCounts& counts,
                             const PreferenceModel& model) {
  auto eval = evaluate_likelihood(q, counts, model, true);
  MlDerivatives out;
  const auto n = static_cast<Eigen::Index>(q.size());
  out.gradient = std::move(eval.gradient);
  out.hessian.resize(n, n);
  out.hessian.setFromTriplets(eval.hessian.begin(), eval.hessian.end());
  out.probability_clamped = eval.clamped;
  return out;
}

QualityEstimate ml_estimate(const ComparisonGraph& g, const ComparisonCounts& counts,
                            const PreferenceModel& model, const QualityEstimate& init,
                            const MlOptions& opts) {
  const std::size_t n = g.size();
  const NodeIndex reference = init.reference;
  if (counts.size() != n || init.q_hat.size() != n) {
    throw DataError("graph, counts and initial estimate disagree on the number of objects");
  }
  if (reference >= n) throw ConfigError("reference object out of range");
  if (!is_connected(g)) {
    throw NumericalError("comparison graph is disconnected: likelihood has no unique maximum");
  }

  std::vector<double> q(init.q_hat);
  const double shift = q[reference];
  for (auto& v : q) v -= shift;

  const auto dim = static_cast<Eigen::Index>(n - 1);
  auto eval = evaluate_likelihood(q, counts, model, true);
  bool clamped = eval.clamped;

  QualityEstimate out;
  out.reference = reference;
  out.diagnostics.objective_trace.push_back(eval.psi);
  out.diagnostics.converged = false;

  int iterations = 0;
  int stalled = 0;
  std::vector<double> candidate(n);
  while (true) {
    const double grad_norm = free_gradient_norm(eval.gradient, reference);
    out.diagnostics.residual_norm = grad_norm;
    if (grad_norm < opts.tol) {
      out.diagnostics.converged = true;
      break;
    }
    if (iterations >= opts.max_iter || stalled >= 3) break;

    // Newton system on the free coordinates: (-S + lambda I) step = gradient.
    Eigen::VectorXd gradient(dim);
    for (NodeIndex v = 0; v < n; ++v) {
      if (v != reference) gradient[free_index(v, reference)] = eval.gradient[static_cast<Eigen::Index>(v)];
    }
    std::vector<Triplet> reduced;
    reduced.reserve(eval.hessian.size() + static_cast<std::size_t>(dim));
    for (const auto& t : eval.hessian) {
      const auto r = static_cast<NodeIndex>(t.row());
      const auto c = static_cast<NodeIndex>(t.col());
      if (r == reference || c == reference) continue;
      reduced.emplace_back(free_index(r, reference), free_index(c, reference), -t.value());
    }

    bool accepted = false;
    double previous_psi = eval.psi;
    for (double lambda = opts.damping; !accepted && lambda <= 1e12; lambda *= 10.0) {
      std::vector<Triplet> system(reduced);
      for (Eigen::Index k = 0; k < dim; ++k) system.emplace_back(k, k, lambda);
      SparseMatrix a(dim, dim);
      a.setFromTriplets(system.begin(), system.end());
      Eigen::SimplicialLLT<SparseMatrix> solver(a);
      if (solver.info() != Eigen::Success) continue;
      const Eigen::VectorXd step = solver.solve(gradient);
      if (!step.allFinite()) continue;

      double t = 1.0;
      for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
        for (NodeIndex v = 0; v < n; ++v) {
          candidate[v] = v == reference ? 0.0 : q[v] + t * step[free_index(v, reference)];
        }
        const double psi = evaluate_likelihood(candidate, counts, model, false).psi;
        if (psi >= eval.psi) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;

    q.swap(candidate);
    ++iterations;
    eval = evaluate_likelihood(q, counts, model, true);
    clamped = clamped || eval.clamped;
    out.diagnostics.objective_trace.push_back(eval.psi);
    stalled = eval.psi > previous_psi ? 0 : stalled + 1;
  }

  out.q_hat = std::move(q);
  out.diagnostics.iterations = iterations;
  out.diagnostics.objective = eval.psi;
  out.diagnostics.probability_clamped = clamped;
  return out;
}

QualityEstimate estimate_qualities(const ComparisonCounts& counts, const PreferenceModel& model,
                                   Algorithm algo, const EstimatorOptions& opts) {
  const std::size_t n = counts.size();
  if (n < 2) throw DataError("need at least 2 objects");
  const NodeIndex reference = opts.reference.value_or(n - 1);
  const ComparisonGraph g = counts.graph();

  auto estimates = estimate_distances(counts.edges(), model, opts.chi);
  if (algo == Algorithm::LS) {
    unit_weights(estimates);
  } else {
    wls_weights(estimates, model);
  }
  if (algo != Algorithm::ML) return ls_solve(g, estimates, reference);

  QualityEstimate init;
  try {
    init = ls_solve(g, estimates, reference);
  } catch (const NumericalError&) {
    init.reference = reference;
    init.q_hat.assign(n, 0.0);
  }
  auto out = ml_estimate(g, counts, model, init, opts.ml);
  out.diagnostics.clamped_edges = init.diagnostics.clamped_edges;
  return out;
}

std::vector<NodeIndex> rank_from_qualities(std::span<const double> q_hat) {
  std::vector<NodeIndex> order(q_hat.size());
  std::iota(order.begin(), order.end(), NodeIndex{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeIndex a, NodeIndex b) { return q_hat[a] > q_hat[b]; });
  return order;
}

std::vector<NodeIndex> pivot_order(const ComparisonCounts& counts, NodeIndex pivot) {
  const std::size_t n = counts.size();
  if (pivot >= n) throw ConfigError("pivot out of range");
  std::vector<double> score(n, std::numeric_limits<double>::quiet_NaN());
  score[pivot] = 0.5;
  for (const auto& c : counts.edges()) {
    const double p = static_cast<double>(c.k) / static_cast<double>(c.w);
    if (c.j == pivot) score[c.i] = p;
    if (c.i == pivot) score[c.j] = 1.0 - p;
  }
  for (NodeIndex v = 0; v < n; ++v) {
    if (std::isnan(score[v])) {
      throw DataError("object " + std::to_string(v + 1) + " was never compared with the pivot");
    }
  }
  return rank_from_qualities(score);
}

}  // namespace pairrank
