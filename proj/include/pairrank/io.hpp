#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pairrank/estimators.hpp"
#include "pairrank/experiments.hpp"
#include "pairrank/graph.hpp"
#include "pairrank/models.hpp"

namespace pairrank {

/// Edge list read from `i,j[,value]` rows with one-based object indices.
/// Rows may list either orientation; `values` is empty without a third column.
struct EdgeList {
  std::size_t n = 0;
  std::vector<Edge> edges;
  std::vector<double> values;
};

/// `n` overrides the object count, which otherwise is the largest index seen.
EdgeList read_edge_list(std::istream& in, std::optional<std::size_t> n = std::nullopt);
EdgeList read_edge_list(const std::string& path, std::optional<std::size_t> n = std::nullopt);

/// Graph from an edge list; a third column becomes per-edge budgets and must
/// then hold positive integers.
ComparisonGraph graph_from_edge_list(const EdgeList& list);

void write_graph_csv(std::ostream& out, const ComparisonGraph& g);

/// `i,j,w,k` rows: w comparisons between i and j, k won by i.
ComparisonCounts read_counts_csv(std::istream& in, std::optional<std::size_t> n = std::nullopt);
ComparisonCounts read_counts_csv(const std::string& path, std::optional<std::size_t> n = std::nullopt);
void write_counts_csv(std::ostream& out, const ComparisonCounts& counts);

/// `object,q_hat,rank`, one-based objects and ranks.
void write_estimate_csv(std::ostream& out, const QualityEstimate& estimate);

/// `algo,budget_per_object,error_prob,stderr,mse_aligned`.
void write_curve_csv(std::ostream& out, std::span<const CurvePoint> points);

/// Curve columns followed by `spent_per_object,stage2_w`; stage2_w is `auto`
/// unless the stage-2 comparisons per edge were fixed.
void write_adaptive_curve_csv(std::ostream& out, std::span<const CurvePoint> points,
                              const AdaptiveSpec& spec);

/// `trial,algo,budget_per_object,eps_error,kendall,mse_aligned,mse_raw`.
void write_trials_csv(std::ostream& out, const ExperimentConfig& cfg, const SweepResult& result);

/// Goals between two teams summed over both fixtures. team_i < team_j.
struct MatchRecord {
  std::string team_i;
  std::string team_j;
  std::int64_t goals_ij = 0;
  std::int64_t goals_ji = 0;
};

/// Reads `home,away,home_goals,away_goals` rows and aggregates each unordered
/// pair. Records come back sorted by (team_i, team_j).
std::vector<MatchRecord> load_matches(std::istream& in);
std::vector<MatchRecord> load_matches(const std::string& path);

/// Counts built from match scores. Objects are teams in name order; teams
/// outside the largest connected component are listed in `dropped`.
struct LeagueCounts {
  ComparisonCounts counts;
  std::vector<std::string> teams;
  std::vector<std::string> dropped;
};

/// K_ij = round(alpha * x_ij + beta) with halves rounded up, W_ij = K_ij + K_ji.
/// Pairs with W_ij = 0 get no edge.
LeagueCounts matches_to_counts(std::span<const MatchRecord> records, double alpha, double beta);

/// Strict final ranking, best first. Accepts `position,team` rows (positions
/// 1..n, any row order) or a single `team` column listed best first.
std::vector<std::string> load_standings(std::istream& in);
std::vector<std::string> load_standings(const std::string& path);

struct RealRanking {
  /// Teams best first according to the estimate.
  std::vector<std::string> order;
  QualityEstimate estimate;
  /// Standings restricted to the ranked teams.
  std::vector<std::string> standings;
  std::int64_t kendall_tau = 0;
};

RealRanking rank_real(const LeagueCounts& league, const PreferenceModel& model, Algorithm algo,
                      std::span<const std::string> standings, const EstimatorOptions& opts = {});

/// Decimal formatting used by every CSV writer (12 significant digits).
std::string format_number(double value);

}  // namespace pairrank
