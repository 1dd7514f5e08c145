#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "pairrank/estimators.hpp"
#include "pairrank/graph.hpp"
#include "pairrank/models.hpp"

namespace pairrank {

enum class QualitySpec { EquallySpaced, UniformRandom, Explicit };

/// How a budget value is read: comparisons per edge (W) or per object (C/N).
enum class BudgetKind { PerEdge, PerObject };

struct AdaptiveSpec {
  std::size_t rho1 = 6;
  std::size_t rho2 = 6;
  /// Overrides the stage-2 comparisons per edge.
  std::optional<std::int64_t> stage2_w;
  /// Estimate shared edges from stage-2 samples only instead of pooling.
  bool fresh_stage2 = false;
};

struct ExperimentConfig {
  std::size_t n = 50;
  QualitySpec quality = QualitySpec::EquallySpaced;
  std::vector<double> explicit_qualities;
  PreferenceModel model = PreferenceModel::thurstone(0.4);
  /// Graph used by single-stage trials; its `n` is taken from this config.
  GraphSpec graph;
  BudgetKind budget_kind = BudgetKind::PerObject;
  double budget = 100.0;
  double eps = 0.04;
  /// Target confidence; reported alongside curves, not used by the estimators.
  double delta = 0.1;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::vector<Algorithm> algos = {Algorithm::LS, Algorithm::WLS, Algorithm::ML};
  std::optional<AdaptiveSpec> adaptive;
  EstimatorOptions estimator;
  unsigned threads = 1;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

struct RankingOutcome {
  Algorithm algo = Algorithm::LS;
  std::vector<NodeIndex> order;
  bool epsilon_error = false;
  std::int64_t kendall_tau = 0;
  double mse_aligned = 0.0;
  double mse_raw = 0.0;
  std::int64_t spent_budget = 0;
  bool converged = true;
};

struct TrialResult {
  std::size_t trial = 0;
  std::vector<RankingOutcome> outcomes;
};

struct CurvePoint {
  Algorithm algo = Algorithm::LS;
  double budget_per_object = 0.0;
  double error_prob = 0.0;
  double std_error = 0.0;
  double mse_aligned = 0.0;
  double mse_raw = 0.0;
  /// Mean comparisons actually spent per object.
  double spent_per_object = 0.0;
  std::size_t trials = 0;
};

struct SweepResult {
  std::vector<CurvePoint> points;
  /// Per-trial results for every budget, in budget order.
  std::vector<std::vector<TrialResult>> trials;
};

/// Independent stream for trial `trial` of an experiment seeded with `seed`.
std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial);

std::vector<double> draw_qualities(const ExperimentConfig& cfg, std::mt19937_64& rng);

/// Comparisons per edge for a graph with `edge_count` edges under cfg's budget.
std::int64_t resolve_comparisons_per_edge(const ExperimentConfig& cfg, std::size_t edge_count);

/// Samples K ~ Bin(W, F(q_i - q_j)) for every edge. Uses the graph's per-edge
/// budgets when present, otherwise `w` on every edge.
ComparisonCounts sample_counts(const ComparisonGraph& g, std::span<const double> q,
                               const PreferenceModel& model, std::int64_t w, std::mt19937_64& rng);

/// One synthetic single-stage instance scored for every configured algorithm.
TrialResult run_trial(const ExperimentConfig& cfg, std::mt19937_64& rng);

struct TwoStageResult {
  QualityEstimate estimate;
  ComparisonGraph stage1;
  ComparisonGraph stage2;
  ComparisonGraph combined;
  ComparisonCounts counts;
  std::int64_t w1 = 0;
  std::int64_t w2 = 0;
  std::int64_t spent_budget = 0;
};

/// Two-stage adaptive estimation: a random rho1-regular graph, then edges to
/// the rho2 nearest objects by stage-1 estimate, then a final estimate on the
/// union. Requires cfg.adaptive.
TwoStageResult two_stage(const ExperimentConfig& cfg, Algorithm algo, std::span<const double> q_true,
                         std::mt19937_64& rng);

/// One two-stage instance scored for every configured algorithm. Each
/// algorithm sees the same qualities, stage-1 graph and stage-1 samples.
TrialResult run_adaptive_trial(const ExperimentConfig& cfg, std::size_t trial);

/// Runs cfg.trials trials at cfg.budget (adaptive when cfg.adaptive is set).
std::vector<TrialResult> run_trials(const ExperimentConfig& cfg);

std::vector<CurvePoint> summarize(const ExperimentConfig& cfg, std::span<const TrialResult> trials);

/// Error-probability curve over the given budgets, one point per algorithm
/// and budget. Trial t uses the same stream at every budget.
SweepResult sweep(const ExperimentConfig& cfg, std::span<const double> budgets);

}  // namespace pairrank
