#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "pairrank/graph.hpp"
#include "pairrank/models.hpp"

namespace pairrank {

/// Observation tally on one edge: w comparisons, k of them won by i (i > j).
struct EdgeCount {
  NodeIndex i;
  NodeIndex j;
  std::int64_t w;
  std::int64_t k;
};

/// Per-edge comparison counts on n objects.
///
/// Entries are stored with i > j; an entry supplied as (j, i) is flipped to
/// (i, j, w, w - k). Edges with w == 0 are treated as absent and dropped.
class ComparisonCounts {
 public:
  ComparisonCounts() = default;
  ComparisonCounts(std::size_t n, std::vector<EdgeCount> entries);

  std::size_t size() const { return n_; }
  std::span<const EdgeCount> edges() const { return entries_; }

  /// Graph whose edge e corresponds to edges()[e], with budgets = w.
  ComparisonGraph graph() const;

  /// Adds w comparisons on {a, b}, `wins_for_a` of them won by a. Creates the
  /// edge when missing.
  void add(NodeIndex a, NodeIndex b, std::int64_t w, std::int64_t wins_for_a);

  std::int64_t total_comparisons() const;

 private:
  std::size_t n_ = 0;
  std::vector<EdgeCount> entries_;
};

/// Per-edge estimate of the quality difference d_ij = q_i - q_j.
struct EdgeEstimate {
  NodeIndex i;
  NodeIndex j;
  std::int64_t w;
  double p_hat;
  double p_tilde;
  double d_hat;
  double sigma2_hat;
  double omega;
  bool clamped;
};

struct SolverDiagnostics {
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = true;
  std::size_t clamped_edges = 0;
  bool probability_clamped = false;
  double objective = 0.0;
  std::vector<double> objective_trace;
};

struct QualityEstimate {
  std::vector<double> q_hat;
  NodeIndex reference = 0;
  SolverDiagnostics diagnostics;
};

/// Probability-error / distance-error pairs, available only in simulation.
struct SimulationDiagnostics {
  std::vector<double> y;
  std::vector<double> z;
};

/// y = p_hat - p and z = d_hat - d for every estimate, given the true qualities.
SimulationDiagnostics simulation_diagnostics(std::span<const EdgeEstimate> estimates,
                                             std::span<const double> q_true,
                                             const PreferenceModel& model);

enum class Algorithm { LS, WLS, ML };

std::string algorithm_name(Algorithm algo);
Algorithm parse_algorithm(std::string_view name);

inline constexpr double kDefaultChi = 1e-4;

/// Clamps K/W into [chi, 1 - chi] and inverts the link. omega starts at 1.
std::vector<EdgeEstimate> estimate_distances(std::span<const EdgeCount> counts,
                                             const PreferenceModel& model, double chi);

/// Sets omega = 1 / sigma2_hat with sigma2_hat = (dF^{-1}/dp)^2 p(1-p) / W at p_tilde.
void wls_weights(std::span<EdgeEstimate> estimates, const PreferenceModel& model);

/// Sets every omega to 1.
void unit_weights(std::span<EdgeEstimate> estimates);

/// Weighted least squares: minimizes sum omega (x_i - x_j - d_hat)^2 with
/// x_reference = 0. estimates[e] must describe g.edges()[e].
QualityEstimate ls_solve(const ComparisonGraph& g, std::span<const EdgeEstimate> estimates,
                         NodeIndex reference);

/// Probability clamp applied inside the log-likelihood and its derivatives.
inline constexpr double kLikelihoodClamp = 1e-12;

/// Log-likelihood sum_e W_e [s log p + (1 - s) log(1 - p)], always <= 0.
double psi_value(std::span<const double> q, const ComparisonCounts& counts,
                 const PreferenceModel& model);

struct MlDerivatives {
  Eigen::VectorXd gradient;
  Eigen::SparseMatrix<double> hessian;
  bool probability_clamped = false;
};

MlDerivatives ml_derivatives(std::span<const double> q, const ComparisonCounts& counts,
                             const PreferenceModel& model);

struct MlOptions {
  int max_iter = 100;
  double tol = 1e-8;
  double damping = 1e-8;
  int max_halvings = 30;
};

/// Damped Newton-Raphson maximization of psi_value with the reference
/// coordinate pinned at 0. Starts from `init`.
QualityEstimate ml_estimate(const ComparisonGraph& g, const ComparisonCounts& counts,
                            const PreferenceModel& model, const QualityEstimate& init,
                            const MlOptions& opts = {});

struct EstimatorOptions {
  double chi = kDefaultChi;
  /// Defaults to the last object when unset.
  std::optional<NodeIndex> reference;
  MlOptions ml;
};

/// Full pipeline from counts to qualities. ML is initialized from WLS and
/// falls back to zeros if the WLS solve fails.
QualityEstimate estimate_qualities(const ComparisonCounts& counts, const PreferenceModel& model,
                                   Algorithm algo, const EstimatorOptions& opts = {});

/// Objects sorted by descending quality; ties keep the lower index first.
std::vector<NodeIndex> rank_from_qualities(std::span<const double> q_hat);

/// Star-graph ranking without inverting F: objects ordered by the empirical
/// probability of beating `pivot`, with the pivot itself placed at 1/2.
std::vector<NodeIndex> pivot_order(const ComparisonCounts& counts, NodeIndex pivot);

}  // namespace pairrank
