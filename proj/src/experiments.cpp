#include "pairrank/experiments.hpp"

#include <cmath>
#include <string>
#include <thread>

#include "pairrank/errors.hpp"
#include "pairrank/metrics.hpp"

namespace pairrank {

void ExperimentConfig::validate() const {
  if (n < 2) throw ConfigError("need at least 2 objects");
  if (trials < 1) throw ConfigError("need at least one trial");
  if (!(budget > 0.0) || !std::isfinite(budget)) throw ConfigError("budget must be positive");
  if (!(eps >= 0.0)) throw ConfigError("eps must be non-negative");
  if (algos.empty()) throw ConfigError("no algorithm selected");
  if (quality == QualitySpec::Explicit && explicit_qualities.size() != n) {
    throw ConfigError("explicit qualities must list one value per object");
  }
  if (estimator.reference && *estimator.reference >= n) {
    throw ConfigError("reference object out of range");
  }
  if (adaptive && adaptive->rho1 == 0) throw ConfigError("rho1 must be positive");
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

std::vector<double> draw_qualities(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  std::vector<double> q(cfg.n);
  switch (cfg.quality) {
    case QualitySpec::EquallySpaced:
      for (std::size_t v = 0; v < cfg.n; ++v) {
        q[v] = static_cast<double>(v) / static_cast<double>(cfg.n);
      }
      break;
    case QualitySpec::UniformRandom: {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (auto& x : q) x = unit(rng);
      break;
    }
    case QualitySpec::Explicit:
      q = cfg.explicit_qualities;
      break;
  }
  return q;
}

std::int64_t resolve_comparisons_per_edge(const ExperimentConfig& cfg, std::size_t edge_count) {
  if (edge_count == 0) throw ConfigError("graph has no edges");
  double w = cfg.budget;
  if (cfg.budget_kind == BudgetKind::PerObject) {
    w = std::floor(cfg.budget * static_cast<double>(cfg.n) / static_cast<double>(edge_count));
  }
  const auto resolved = static_cast<std::int64_t>(std::floor(w));
  if (resolved < 1) {
    throw ConfigError("budget " + std::to_string(cfg.budget) +
                      " leaves less than one comparison per edge on " +
                      std::to_string(edge_count) + " edges");
  }
  return resolved;
}

ComparisonCounts sample_counts(const ComparisonGraph& g, std::span<const double> q,
                               const PreferenceModel& model, std::int64_t w, std::mt19937_64& rng) {
  std::vector<EdgeCount> entries;
  entries.reserve(g.edge_count());
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto [i, j] = g.edges()[e];
    const std::int64_t budget = g.has_budgets() ? g.budgets()[e] : w;
    entries.push_back({i, j, budget, sample_comparisons(model, q[i] - q[j], budget, rng)});
  }
  return ComparisonCounts(g.size(), std::move(entries));
}

namespace {

RankingOutcome score(const ExperimentConfig& cfg, Algorithm algo, const QualityEstimate& est,
                     std::span<const double> q_true, std::int64_t spent) {
  RankingOutcome out;
  out.algo = algo;
  out.order = rank_from_qualities(est.q_hat);
  out.epsilon_error = epsilon_error(q_true, out.order, cfg.eps);
  out.kendall_tau = kendall_tau(rank_from_qualities(q_true), out.order);
  out.mse_aligned = aligned_mse(est.q_hat, q_true);
  out.mse_raw = raw_mse(est.q_hat, q_true, est.reference);
  out.spent_budget = spent;
  out.converged = est.diagnostics.converged;
  return out;
}

}  // namespace

TrialResult run_trial(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const auto q = draw_qualities(cfg, rng);
  GraphSpec spec = cfg.graph;
  spec.n = cfg.n;
  const ComparisonGraph g = build_graph(spec, rng);
  const std::int64_t w = g.has_budgets() ? 0 : resolve_comparisons_per_edge(cfg, g.edge_count());
  const ComparisonCounts counts = sample_counts(g, q, cfg.model, w, rng);
  const std::int64_t spent = counts.total_comparisons();

  TrialResult out;
  for (auto algo : cfg.algos) {
    const auto est = estimate_qualities(counts, cfg.model, algo, cfg.estimator);
    out.outcomes.push_back(score(cfg, algo, est, q, spent));
  }
  return out;
}

TwoStageResult two_stage(const ExperimentConfig& cfg, Algorithm algo, std::span<const double> q_true,
                         std::mt19937_64& rng) {
  if (!cfg.adaptive) throw ConfigError("two-stage estimation needs rho1/rho2 settings");
  const AdaptiveSpec& ad = *cfg.adaptive;
  const std::size_t n = cfg.n;
  if (q_true.size() != n) throw ConfigError("quality vector length does not match n");
  if (ad.rho2 >= n) throw ConfigError("rho2 must be smaller than the number of objects");

  TwoStageResult out;
  GraphSpec spec;
  spec.kind = GraphKind::RandomRegular;
  spec.n = n;
  spec.degree = ad.rho1;
  out.stage1 = build_graph(spec, rng);

  const double planned_stage2_edges = std::ceil(static_cast<double>(n * ad.rho2) / 2.0);
  if (cfg.budget_kind == BudgetKind::PerObject) {
    const double total = cfg.budget * static_cast<double>(n);
    out.w1 = static_cast<std::int64_t>(
        std::floor(total / (static_cast<double>(out.stage1.edge_count()) + planned_stage2_edges)));
  } else {
    out.w1 = static_cast<std::int64_t>(std::floor(cfg.budget));
  }
  if (out.w1 < 1) throw ConfigError("budget leaves less than one stage-1 comparison per edge");

  const ComparisonCounts stage1_counts = sample_counts(out.stage1, q_true, cfg.model, out.w1, rng);
  if (ad.rho2 == 0) {
    out.stage2 = ComparisonGraph(n, {});
    out.combined = out.stage1;
    out.counts = stage1_counts;
    out.estimate = estimate_qualities(out.counts, cfg.model, algo, cfg.estimator);
    out.spent_budget = out.counts.total_comparisons();
    return out;
  }

  const auto stage1_estimate = estimate_qualities(stage1_counts, cfg.model, algo, cfg.estimator);
  out.stage2 = knn_quality_graph(stage1_estimate.q_hat, ad.rho2);
  if (ad.stage2_w) {
    out.w2 = *ad.stage2_w;
  } else if (cfg.budget_kind == BudgetKind::PerObject) {
    const double remaining = cfg.budget * static_cast<double>(n) -
                             static_cast<double>(out.w1 * static_cast<std::int64_t>(out.stage1.edge_count()));
    out.w2 = static_cast<std::int64_t>(
        std::floor(remaining / static_cast<double>(out.stage2.edge_count())));
  } else {
    out.w2 = out.w1;
  }
  if (out.w2 < 1) throw ConfigError("budget leaves less than one stage-2 comparison per edge");

  const ComparisonCounts stage2_counts = sample_counts(out.stage2, q_true, cfg.model, out.w2, rng);
  out.combined = graph_union(out.stage1, out.stage2);

  ComparisonCounts pooled(n, {});
  for (const auto& c : stage1_counts.edges()) {
    if (ad.fresh_stage2 && out.stage2.find_edge(c.i, c.j)) continue;
    pooled.add(c.i, c.j, c.w, c.k);
  }
  for (const auto& c : stage2_counts.edges()) pooled.add(c.i, c.j, c.w, c.k);
  out.counts = std::move(pooled);
  out.spent_budget = stage1_counts.total_comparisons() + stage2_counts.total_comparisons();
  out.estimate = estimate_qualities(out.counts, cfg.model, algo, cfg.estimator);
  return out;
}

TrialResult run_adaptive_trial(const ExperimentConfig& cfg, std::size_t trial) {
  cfg.validate();
  TrialResult out;
  out.trial = trial;
  for (auto algo : cfg.algos) {
    auto rng = trial_rng(cfg.seed, trial);
    const auto q = draw_qualities(cfg, rng);
    const auto result = two_stage(cfg, algo, q, rng);
    out.outcomes.push_back(score(cfg, algo, result.estimate, q, result.spent_budget));
  }
  return out;
}

std::vector<TrialResult> run_trials(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<TrialResult> results(cfg.trials);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t t = first; t < cfg.trials; t += stride) {
      if (cfg.adaptive) {
        results[t] = run_adaptive_trial(cfg, t);
      } else {
        auto rng = trial_rng(cfg.seed, t);
        results[t] = run_trial(cfg, rng);
        results[t].trial = t;
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.trials)));
  if (workers == 1) {
    work(0, 1);
    return results;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < workers; ++k) {
      pool.emplace_back([&, k] {
        try {
          work(k, workers);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::vector<CurvePoint> summarize(const ExperimentConfig& cfg, std::span<const TrialResult> trials) {
  std::vector<CurvePoint> points;
  for (std::size_t a = 0; a < cfg.algos.size(); ++a) {
    CurvePoint p;
    p.algo = cfg.algos[a];
    p.budget_per_object = cfg.budget;
    p.trials = trials.size();
    double errors = 0.0;
    double spent = 0.0;
    for (const auto& t : trials) {
      const auto& o = t.outcomes[a];
      errors += o.epsilon_error ? 1.0 : 0.0;
      p.mse_aligned += o.mse_aligned;
      p.mse_raw += o.mse_raw;
      spent += static_cast<double>(o.spent_budget);
    }
    const double count = static_cast<double>(trials.size());
    p.error_prob = errors / count;
    p.std_error = std::sqrt(p.error_prob * (1.0 - p.error_prob) / count);
    p.mse_aligned /= count;
    p.mse_raw /= count;
    p.spent_per_object = spent / count / static_cast<double>(cfg.n);
    if (cfg.budget_kind == BudgetKind::PerEdge) p.budget_per_object = p.spent_per_object;
    points.push_back(p);
  }
  return points;
}

SweepResult sweep(const ExperimentConfig& cfg, std::span<const double> budgets) {
  if (budgets.empty()) throw ConfigError("sweep needs at least one budget");
  SweepResult out;
  for (double b : budgets) {
    ExperimentConfig point = cfg;
    point.budget = b;
    auto trials = run_trials(point);
    auto summary = summarize(point, trials);
    out.points.insert(out.points.end(), summary.begin(), summary.end());
    for (auto& t : trials) {
      for (auto& o : t.outcomes) o.order.clear();
    }
    out.trials.push_back(std::move(trials));
  }
  return out;
}

}  // namespace pairrank
