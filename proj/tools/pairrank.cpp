#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pairrank/analysis.hpp"
#include "pairrank/errors.hpp"
#include "pairrank/estimators.hpp"
#include "pairrank/experiments.hpp"
#include "pairrank/io.hpp"

namespace {

using namespace pairrank;

// Config files are flat key=value lists; keys that are not global options
// belong to the subcommand being run.
class FlatConfig : public CLI::ConfigBase {
 public:
  explicit FlatConfig(const CLI::App* app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    auto items = CLI::ConfigBase::from_config(in);
    const auto subs = app_->get_subcommands();
    if (subs.empty()) return items;
    for (auto& item : items) {
      if (item.parents.empty() && app_->get_option_no_throw("--" + item.name) == nullptr) {
        item.parents = {subs.front()->get_name()};
      }
    }
    return items;
  }

 private:
  const CLI::App* app_;
};

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::string out = "-";
  std::string model = "thurstone";
  double sigma = 0.4;
  double chi = kDefaultChi;
};

struct ExperimentOptions {
  std::size_t n = 50;
  std::string quality = "equal";
  double eps = 0.04;
  double delta = 0.1;
  std::size_t trials = 1000;
  std::vector<std::string> algos = {"ls", "wls", "ml"};
  unsigned threads = 1;
  std::vector<double> budgets;
  std::vector<double> per_edge;
  std::string trials_out;
  std::optional<std::size_t> reference;
};

struct GraphOptions {
  std::string kind = "regular";
  std::size_t degree = 6;
  std::optional<std::size_t> center;
  std::size_t hubs = 1;
  std::size_t max_degree = 3;
};

void add_experiment_options(CLI::App* cmd, ExperimentOptions& o) {
  cmd->add_option("--n", o.n, "Number of objects")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--quality", o.quality, "Qualities: equal (i/N) or uniform")
      ->capture_default_str()
      ->check(CLI::IsMember({"equal", "uniform"}));
  cmd->add_option("--eps", o.eps, "Quality gap counted as an error")->capture_default_str();
  cmd->add_option("--delta", o.delta, "Target confidence reported with the curve")->capture_default_str();
  cmd->add_option("--trials", o.trials, "Trials per budget")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--algos", o.algos, "Subset of ls,wls,ml")->delimiter(',')->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  auto* budgets = cmd->add_option("--budgets", o.budgets, "Comparisons per object C/N")->delimiter(',');
  cmd->add_option("--w", o.per_edge, "Comparisons per edge W")->delimiter(',')->excludes(budgets);
  cmd->add_option("--trials-out", o.trials_out, "Per-trial CSV path");
  cmd->add_option("--reference", o.reference, "Reference object (1-based, default n)")
      ->check(CLI::PositiveNumber);
}

void add_graph_options(CLI::App* cmd, GraphOptions& o) {
  cmd->add_option("--graph", o.kind, "complete, star, regular, hub, wheel or file:<path>")
      ->capture_default_str()
      ->check(CLI::Validator(
          [](std::string& v) -> std::string {
            for (const char* k : {"complete", "star", "regular", "hub", "wheel"}) {
              if (v == k) return {};
            }
            if (v.rfind("file:", 0) == 0 && v.size() > 5) return {};
            return "unknown graph '" + v + "'";
          },
          "GRAPH"));
  cmd->add_option("--degree", o.degree, "Degree of the random regular graph")->capture_default_str();
  cmd->add_option("--center", o.center, "Star center (1-based)")->check(CLI::PositiveNumber);
  cmd->add_option("--hubs", o.hubs, "Hub count")->capture_default_str();
  cmd->add_option("--max-degree", o.max_degree, "Max degree of non-hub objects")->capture_default_str();
}

PreferenceModel make_model(const GlobalOptions& g) { return PreferenceModel::parse(g.model, g.sigma); }

ExperimentConfig make_config(const GlobalOptions& g, const ExperimentOptions& o) {
  ExperimentConfig cfg;
  cfg.n = o.n;
  cfg.quality = o.quality == "uniform" ? QualitySpec::UniformRandom : QualitySpec::EquallySpaced;
  cfg.model = make_model(g);
  cfg.eps = o.eps;
  cfg.delta = o.delta;
  cfg.trials = o.trials;
  cfg.seed = g.seed;
  cfg.threads = o.threads;
  cfg.algos.clear();
  for (const auto& a : o.algos) cfg.algos.push_back(parse_algorithm(a));
  cfg.estimator.chi = g.chi;
  if (o.reference) cfg.estimator.reference = *o.reference - 1;
  cfg.budget_kind = o.per_edge.empty() ? BudgetKind::PerObject : BudgetKind::PerEdge;
  return cfg;
}

std::vector<double> budget_grid(const ExperimentOptions& o) {
  if (!o.per_edge.empty()) return o.per_edge;
  if (!o.budgets.empty()) return o.budgets;
  return {50, 100, 200, 400};
}

GraphSpec make_graph_spec(const GraphOptions& o, std::size_t n) {
  GraphSpec spec;
  spec.n = n;
  spec.degree = o.degree;
  spec.hubs = o.hubs;
  spec.max_degree = o.max_degree;
  if (o.center) spec.center = *o.center - 1;
  if (o.kind == "complete") {
    spec.kind = GraphKind::Complete;
  } else if (o.kind == "star") {
    spec.kind = GraphKind::Star;
  } else if (o.kind == "hub") {
    spec.kind = GraphKind::Hub;
  } else if (o.kind == "wheel") {
    spec.kind = GraphKind::Wheel;
  } else if (o.kind.rfind("file:", 0) == 0) {
    const auto list = read_edge_list(o.kind.substr(5), n);
    const auto g = graph_from_edge_list(list);
    spec.kind = GraphKind::FromEdges;
    spec.edges = g.edges();
    spec.budgets = g.budgets();
  } else {
    spec.kind = GraphKind::RandomRegular;
  }
  return spec;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("failed writing " + path);
}

void write_trials_if_requested(const ExperimentOptions& o, const ExperimentConfig& cfg,
                               const SweepResult& result) {
  if (o.trials_out.empty()) return;
  std::ostringstream s;
  write_trials_csv(s, cfg, result);
  emit(o.trials_out, s.str());
}

int exit_code(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 1;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 2;
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ranking from noisy pairwise comparisons"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value file mirroring the command-line flags");
  app.config_formatter(std::make_shared<FlatConfig>(&app));
  app.allow_config_extras(CLI::config_extras_mode::error);

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Master seed")->capture_default_str();
  app.add_option("--out", global.out, "Output CSV path, - for stdout")->capture_default_str();
  app.add_option("--model", global.model, "thurstone or btl")
      ->capture_default_str()
      ->transform(CLI::IsMember({"thurstone", "btl"}, CLI::ignore_case));
  app.add_option("--sigma", global.sigma, "Thurstone noise standard deviation")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--chi", global.chi, "Probability clamp for LS/WLS")
      ->capture_default_str()
      ->check(CLI::Range(1e-300, 0.4999999999));

  ExperimentOptions sim_opts;
  GraphOptions graph_opts;
  auto* simulate = app.add_subcommand("simulate", "Error-probability curve on synthetic data");
  add_experiment_options(simulate, sim_opts);
  add_graph_options(simulate, graph_opts);

  ExperimentOptions ad_opts;
  AdaptiveSpec ad_spec;
  auto* adaptive = app.add_subcommand("adaptive", "Two-stage adaptive scheme on synthetic data");
  add_experiment_options(adaptive, ad_opts);
  adaptive->add_option("--rho1", ad_spec.rho1, "Stage-1 regular degree")->capture_default_str();
  adaptive->add_option("--rho2", ad_spec.rho2, "Stage-2 nearest neighbours")->capture_default_str();
  adaptive->add_option("--stage2-w", ad_spec.stage2_w, "Stage-2 comparisons per edge")
      ->check(CLI::PositiveNumber);
  adaptive->add_flag("--fresh-stage2", ad_spec.fresh_stage2,
                     "Estimate shared edges from stage-2 samples only");

  std::string counts_path;
  std::string algo_name = "wls";
  std::optional<std::size_t> est_reference;
  std::optional<std::size_t> est_n;
  auto* estimate = app.add_subcommand("estimate", "Estimate qualities from a counts CSV");
  estimate->add_option("--counts", counts_path, "Counts CSV i,j,w,k")->required();
  estimate->add_option("--algo", algo_name, "ls, wls or ml")->capture_default_str();
  estimate->add_option("--reference", est_reference, "Reference object (1-based, default n)")
      ->check(CLI::PositiveNumber);
  estimate->add_option("--n", est_n, "Number of objects (default: largest index)");

  std::string analyze_graph;
  std::optional<std::size_t> an_reference;
  double an_w = 1.0;
  auto* analyze = app.add_subcommand("analyze", "Random-walk diagnostics of a comparison graph");
  analyze->add_option("--graph", analyze_graph, "Edge list i,j[,weight]")->required();
  analyze->add_option("--reference", an_reference, "Reference object (1-based, default n)")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--w", an_w, "Comparisons per edge for the MSE bound")->capture_default_str();

  std::string matches_path;
  std::string teams_out;
  double alpha = 1.0;
  double beta = 1.0;
  auto* ingest = app.add_subcommand("ingest", "Convert match scores into comparison counts");
  ingest->add_option("--matches", matches_path, "CSV home,away,home_goals,away_goals")->required();
  ingest->add_option("--alpha", alpha, "Comparisons per goal")->capture_default_str();
  ingest->add_option("--beta", beta, "Comparisons added to every pair")->capture_default_str();
  ingest->add_option("--teams-out", teams_out, "CSV object,team index map");

  std::string standings_path;
  auto* rank_real_cmd = app.add_subcommand("rank-real", "Rank teams and compare with the final table");
  rank_real_cmd->add_option("--matches", matches_path, "CSV home,away,home_goals,away_goals")->required();
  rank_real_cmd->add_option("--standings", standings_path, "CSV position,team")->required();
  rank_real_cmd->add_option("--alpha", alpha, "Comparisons per goal")->capture_default_str();
  rank_real_cmd->add_option("--beta", beta, "Comparisons added to every pair")->capture_default_str();
  rank_real_cmd->add_option("--algo", algo_name, "ls, wls or ml")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    std::ostringstream out;
    if (simulate->parsed()) {
      ExperimentConfig cfg = make_config(global, sim_opts);
      cfg.graph = make_graph_spec(graph_opts, cfg.n);
      const auto budgets = budget_grid(sim_opts);
      const auto result = sweep(cfg, budgets);
      write_curve_csv(out, result.points);
      write_trials_if_requested(sim_opts, cfg, result);
    } else if (adaptive->parsed()) {
      ExperimentConfig cfg = make_config(global, ad_opts);
      cfg.adaptive = ad_spec;
      const auto budgets = budget_grid(ad_opts);
      const auto result = sweep(cfg, budgets);
      write_adaptive_curve_csv(out, result.points, ad_spec);
      write_trials_if_requested(ad_opts, cfg, result);
    } else if (estimate->parsed()) {
      const auto counts = read_counts_csv(counts_path, est_n);
      EstimatorOptions opts;
      opts.chi = global.chi;
      if (est_reference) opts.reference = *est_reference - 1;
      const auto result = estimate_qualities(counts, make_model(global), parse_algorithm(algo_name), opts);
      if (!result.diagnostics.converged) {
        std::cerr << "warning: solver did not reach its tolerance (residual "
                  << format_number(result.diagnostics.residual_norm) << ")\n";
      }
      if (result.diagnostics.clamped_edges > 0) {
        std::cerr << "note: " << result.diagnostics.clamped_edges
                  << " edge probabilities clamped to [chi, 1 - chi]\n";
      }
      write_estimate_csv(out, result);
    } else if (analyze->parsed()) {
      const auto list = read_edge_list(analyze_graph);
      const ComparisonGraph g(list.n, list.edges);
      std::vector<double> weights = list.values;
      if (weights.empty()) weights.assign(g.edge_count(), 1.0);
      const NodeIndex reference = an_reference ? *an_reference - 1 : g.size() - 1;
      const auto wa = walk_analysis(g, weights, reference);
      const double bound = mse_bound(wa, an_w);
      out << "node,theta_row_sum,generalized_degree,lambda_c_max,inf_norm_minv,rho_inf,mse_bound\n";
      for (NodeIndex v = 0; v < g.size(); ++v) {
        out << v + 1 << ',' << format_number(wa.theta.col(static_cast<Eigen::Index>(v)).sum()) << ','
            << format_number(wa.generalized_degree[static_cast<Eigen::Index>(v)]) << ','
            << format_number(wa.lambda_c_max) << ',' << format_number(wa.inf_norm_m_inverse) << ','
            << format_number(wa.rho_inf) << ',' << format_number(bound) << '\n';
      }
    } else if (ingest->parsed()) {
      const auto records = load_matches(matches_path);
      const auto league = matches_to_counts(records, alpha, beta);
      for (const auto& t : league.dropped) {
        std::cerr << "warning: dropped " << t << " (outside the largest connected component)\n";
      }
      write_counts_csv(out, league.counts);
      if (!teams_out.empty()) {
        std::ostringstream teams;
        teams << "object,team\n";
        for (std::size_t v = 0; v < league.teams.size(); ++v) teams << v + 1 << ',' << league.teams[v] << '\n';
        emit(teams_out, teams.str());
      }
    } else if (rank_real_cmd->parsed()) {
      const auto records = load_matches(matches_path);
      const auto league = matches_to_counts(records, alpha, beta);
      for (const auto& t : league.dropped) {
        std::cerr << "warning: dropped " << t << " (outside the largest connected component)\n";
      }
      const auto standings = load_standings(standings_path);
      EstimatorOptions opts;
      opts.chi = global.chi;
      const auto result = rank_real(league, make_model(global), parse_algorithm(algo_name), standings, opts);
      out << "rank,team,q_hat,final_position\n";
      for (std::size_t r = 0; r < result.order.size(); ++r) {
        const auto& team = result.order[r];
        const auto team_index = static_cast<std::size_t>(
            std::find(league.teams.begin(), league.teams.end(), team) - league.teams.begin());
        const auto position = static_cast<std::size_t>(
            std::find(result.standings.begin(), result.standings.end(), team) - result.standings.begin());
        out << r + 1 << ',' << team << ',' << format_number(result.estimate.q_hat[team_index]) << ','
            << position + 1 << '\n';
      }
      std::cerr << "kendall_tau=" << result.kendall_tau << '\n';
    }
    emit(global.out, out.str());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
