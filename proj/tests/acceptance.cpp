#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include <Eigen/Dense>

#include "pairrank/analysis.hpp"
#include "pairrank/experiments.hpp"
#include "pairrank/io.hpp"
#include "pairrank/metrics.hpp"
#include "support.hpp"

using namespace pairrank;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& id, const std::string& status, const std::string& detail) {
  if (status == "FAIL") ++failures;
  std::cout << "[" << status << "] " << id << ": " << detail << std::endl;
}

void verdict(const std::string& id, bool ok, const std::string& detail) {
  report(id, ok ? "PASS" : "FAIL", detail);
}

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(4);
  out << x;
  return out.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

std::vector<double> pinned(std::span<const double> q, NodeIndex ref) {
  std::vector<double> out(q.begin(), q.end());
  for (auto& x : out) x -= q[ref];
  return out;
}

// BTL with q_i = log a_i gives F(q_i - q_j) = a_i / (a_i + a_j), so integer
// counts K = a_i, W = a_i + a_j are noiseless.
void noiseless_recovery() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    std::uniform_int_distribution<std::size_t> size(2, 50);
    const std::size_t n = size(rng);
    const auto g = testkit::random_connected_graph(n, 4.0 / n, rng);
    std::uniform_int_distribution<std::int64_t> strength(1, 40);
    std::vector<std::int64_t> a(n);
    std::vector<double> q(n);
    for (std::size_t v = 0; v < n; ++v) {
      a[v] = strength(rng);
      q[v] = std::log(static_cast<double>(a[v]));
    }
    std::uniform_int_distribution<NodeIndex> pick(0, n - 1);
    const NodeIndex ref = pick(rng);
    const auto truth = pinned(q, ref);

    std::vector<EdgeCount> entries;
    for (const auto& e : g.edges()) entries.push_back({e.i, e.j, a[e.i] + a[e.j], a[e.i]});
    const ComparisonCounts counts(n, entries);
    EstimatorOptions opts;
    opts.reference = ref;
    for (auto algo : {Algorithm::LS, Algorithm::WLS, Algorithm::ML}) {
      const auto est = estimate_qualities(counts, PreferenceModel::btl(), algo, opts);
      worst = std::max(worst, max_abs_diff(est.q_hat, truth));
    }

    const auto d = testkit::exact_distances(g, q);
    const auto omega = testkit::random_vector(g.edge_count(), 0.1, 10.0, rng);
    for (const auto& w : {std::vector<double>(g.edge_count(), 1.0), omega}) {
      const auto est = ls_solve(g, testkit::make_estimates(g, d, w), ref);
      worst = std::max(worst, max_abs_diff(est.q_hat, truth));
    }
  }
  const double elapsed = seconds_since(start);
  verdict("C1 noiseless_recovery", worst < 1e-9 && elapsed < 10.0,
          "max inf-error " + fmt(worst) + " (< 1e-9), " + fmt(elapsed) + " s (< 10 s)");
}

void dag_oracle_and_flow() {
  std::mt19937_64 rng(202);
  double worst_estimate = 0.0;
  double worst_flow = 0.0;
  bool acyclic = true;
  for (int rep = 0; rep < 100; ++rep) {
    std::uniform_int_distribution<std::size_t> size(2, 12);
    const std::size_t n = size(rng);
    const auto g = testkit::random_connected_graph(n, 0.35, rng);
    const auto w = testkit::random_vector(g.edge_count(), 0.1, 5.0, rng);
    const auto d = testkit::random_vector(g.edge_count(), -2.0, 2.0, rng);
    std::uniform_int_distribution<NodeIndex> pick(0, n - 1);
    const NodeIndex ref = pick(rng);
    const auto wa = walk_analysis(g, w, ref);
    const auto ls = ls_solve(g, testkit::make_estimates(g, d, w), ref);
    for (NodeIndex root = 0; root < n; ++root) {
      if (root == ref) continue;
      const auto dag = build_node_dag(wa, root);
      if (topological_order(dag).empty()) {
        acyclic = false;
        continue;
      }
      worst_estimate = std::max(worst_estimate, std::abs(dag_estimate(dag, g, d) - ls.q_hat[root]));
      worst_flow = std::max(worst_flow, flow_conservation_check(dag, wa));
    }
  }
  verdict("C2 dag_equals_ls", acyclic && worst_estimate < 1e-9,
          "max |dag - ls| " + fmt(worst_estimate) + " (< 1e-9)" + (acyclic ? "" : ", cycle found"));
  verdict("C3 flow_conservation", acyclic && worst_flow < 1e-9, "max violation " + fmt(worst_flow) + " (< 1e-9)");
}

void complete_graph_closed_form() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (std::size_t n : {4u, 10u, 20u}) {
    std::vector<Edge> edges;
    for (NodeIndex i = 1; i < n; ++i) {
      for (NodeIndex j = 0; j < i; ++j) edges.push_back({i, j});
    }
    const ComparisonGraph g(n, edges);
    const auto dvec = testkit::random_vector(g.edge_count(), -1.0, 1.0, rng);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      d(g.edges()[e].i, g.edges()[e].j) = dvec[e];
      d(g.edges()[e].j, g.edges()[e].i) = -dvec[e];
    }
    const std::size_t last = n - 1;
    std::vector<double> formula(n, 0.0);
    for (std::size_t i = 0; i < last; ++i) {
      double acc = 2.0 / n * d(i, last);
      for (std::size_t j = 0; j < last; ++j) {
        if (j != i) acc += (d(i, j) + d(j, last)) / n;
      }
      formula[i] = acc;
    }
    const auto est = ls_solve(g, testkit::make_estimates(g, dvec, std::vector<double>(g.edge_count(), 1.0)), last);
    worst = std::max(worst, max_abs_diff(est.q_hat, formula));
  }
  verdict("C4 complete_graph_closed_form", worst < 1e-12, "max diff " + fmt(worst) + " (< 1e-12) for N in {4,10,20}");
}

void gradient_check() {
  std::mt19937_64 rng(404);
  double worst_rel = 0.0;
  double worst_asym = 0.0;
  double max_psi = -INFINITY;
  for (int rep = 0; rep < 50; ++rep) {
    const auto model = rep % 2 ? PreferenceModel::btl() : PreferenceModel::thurstone(0.4);
    std::uniform_int_distribution<std::size_t> size(2, 8);
    const std::size_t n = size(rng);
    const auto g = testkit::random_connected_graph(n, 0.5, rng);
    const auto q = testkit::random_vector(n, 0.0, 1.0, rng);
    std::uniform_int_distribution<std::int64_t> wdist(1, 50);
    auto counts = sample_counts(g, q, model, wdist(rng), rng);
    const auto x = testkit::random_vector(n, -0.5, 1.5, rng);
    const auto der = ml_derivatives(x, counts, model);
    const Eigen::MatrixXd hess(der.hessian);
    worst_asym = std::max(worst_asym, (hess - hess.transpose()).cwiseAbs().maxCoeff());
    max_psi = std::max(max_psi, psi_value(x, counts, model));
    const double h = 1e-6;
    Eigen::VectorXd fd(n);
    for (std::size_t v = 0; v < n; ++v) {
      auto plus = x;
      auto minus = x;
      plus[v] += h;
      minus[v] -= h;
      const double pp = psi_value(plus, counts, model);
      const double pm = psi_value(minus, counts, model);
      max_psi = std::max({max_psi, pp, pm});
      fd[static_cast<Eigen::Index>(v)] = (pp - pm) / (2 * h);
    }
    const double scale = std::max(der.gradient.cwiseAbs().maxCoeff(), 1e-300);
    worst_rel = std::max(worst_rel, (der.gradient - fd).cwiseAbs().maxCoeff() / scale);
  }
  verdict("C5 gradient_correctness", worst_rel < 1e-6 && worst_asym <= 1e-12 && max_psi <= 0.0,
          "max relative gradient error " + fmt(worst_rel) + " (< 1e-6), Hessian asymmetry " + fmt(worst_asym) +
              " (<= 1e-12), max psi " + fmt(max_psi) + " (<= 0)");
}

ExperimentConfig regime(double budget, BudgetKind kind) {
  ExperimentConfig cfg;
  cfg.n = 50;
  cfg.model = PreferenceModel::thurstone(0.4);
  cfg.quality = QualitySpec::EquallySpaced;
  cfg.graph = {.kind = GraphKind::RandomRegular, .degree = 6};
  cfg.budget_kind = kind;
  cfg.budget = budget;
  cfg.eps = 0.04;
  cfg.seed = 20240601;
  cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  return cfg;
}

void mse_scaling() {
  const auto start = std::chrono::steady_clock::now();
  auto cfg = regime(32, BudgetKind::PerEdge);
  cfg.trials = 2000;
  cfg.algos = {Algorithm::LS, Algorithm::WLS};
  const std::vector<double> budgets = {32, 64};
  const auto result = sweep(cfg, budgets);
  std::string detail;
  bool ok = true;
  for (std::size_t a = 0; a < cfg.algos.size(); ++a) {
    const double ratio = result.points[cfg.algos.size() + a].mse_aligned / result.points[a].mse_aligned;
    ok = ok && std::abs(ratio - 0.5) <= 0.15 * 0.5;
    detail += algorithm_name(cfg.algos[a]) + " mse(64)/mse(32) = " + fmt(ratio) + "; ";
  }
  verdict("C6 mse_inverse_w_scaling", ok,
          detail + "target 0.5 within 15%, 2000 trials, " + fmt(seconds_since(start)) + " s");
}

double diff_stderr(const CurvePoint& a, const CurvePoint& b) {
  return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

void regime_trends() {
  const auto start = std::chrono::steady_clock::now();
  auto cfg = regime(50, BudgetKind::PerObject);
  cfg.trials = 1000;
  const std::vector<double> budgets = {50, 100, 200, 400};
  const auto result = sweep(cfg, budgets);
  const std::size_t na = cfg.algos.size();
  auto at = [&](std::size_t b, std::size_t a) -> const CurvePoint& { return result.points[b * na + a]; };

  std::string curve;
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    curve += fmt(budgets[b]) + ":";
    for (std::size_t a = 0; a < na; ++a) curve += " " + algorithm_name(cfg.algos[a]) + "=" + fmt(at(b, a).error_prob);
    curve += b + 1 < budgets.size() ? "; " : "";
  }

  bool monotone = true;
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t b = 0; b + 1 < budgets.size(); ++b) {
      if (at(b + 1, a).error_prob > at(b, a).error_prob + 2 * diff_stderr(at(b, a), at(b + 1, a))) monotone = false;
    }
  }
  bool wls_le_ls = true;
  double max_gap = 0.0;
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    const auto& ls = at(b, 0);
    const auto& wls = at(b, 1);
    const auto& ml = at(b, 2);
    if (wls.error_prob > ls.error_prob + 2 * diff_stderr(ls, wls)) wls_le_ls = false;
    max_gap = std::max(max_gap, std::abs(wls.error_prob - ml.error_prob));
  }
  const std::string timing = " (" + fmt(seconds_since(start)) + " s, 1000 trials/point)";
  verdict("C7a error_nonincreasing_in_budget", monotone, curve + timing);
  verdict("C7b wls_not_worse_than_ls", wls_le_ls, "WLS <= LS + 2 stderr at every budget");
  verdict("C7c wls_ml_gap", max_gap <= 0.05, "max |WLS - ML| = " + fmt(max_gap) + " (<= 0.05)");
}

// Budget (log-interpolated) at which the error curve first reaches `target`.
std::optional<double> budget_to_reach(const std::vector<double>& spent, const std::vector<double>& err,
                                      double target) {
  if (err.front() <= target) return spent.front();
  for (std::size_t k = 1; k < err.size(); ++k) {
    if (err[k] <= target) {
      const double t = (err[k - 1] - target) / (err[k - 1] - err[k]);
      return std::exp(std::log(spent[k - 1]) + t * (std::log(spent[k]) - std::log(spent[k - 1])));
    }
  }
  return std::nullopt;
}

void two_stage_gain() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> budgets = {100, 200, 300, 400, 600, 800, 1000, 1200, 1600, 2400};
  auto single = regime(50, BudgetKind::PerObject);
  single.trials = 1000;
  single.algos = {Algorithm::WLS};
  auto adaptive = single;
  adaptive.adaptive = AdaptiveSpec{.rho1 = 6, .rho2 = 6};
  const auto s = sweep(single, budgets);
  const auto t = sweep(adaptive, budgets);

  std::vector<double> s_spent, s_err, t_spent, t_err;
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    s_spent.push_back(s.points[b].spent_per_object);
    s_err.push_back(s.points[b].error_prob);
    t_spent.push_back(t.points[b].spent_per_object);
    t_err.push_back(t.points[b].error_prob);
  }
  std::string curve;
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    curve += fmt(budgets[b]) + ": single " + fmt(s_err[b]) + " two-stage " + fmt(t_err[b]) + "; ";
  }

  const auto b_single = budget_to_reach(s_spent, s_err, 0.1);
  const auto b_two = budget_to_reach(t_spent, t_err, 0.1);
  bool reduction_ok = false;
  std::string reduction_detail;
  if (b_single && b_two) {
    const double reduction = 1.0 - *b_two / *b_single;
    reduction_ok = reduction >= 0.40;
    reduction_detail = "spent C/N to reach error 0.1: single " + fmt(*b_single) + ", two-stage " + fmt(*b_two) +
                       ", reduction " + fmt(100 * reduction) + "% (>= 40%)";
  } else {
    reduction_detail = "error 0.1 not reached on the budget grid";
  }

  // Mid-range: the grid budget closest (in log scale) to where single-stage crosses 0.1.
  std::size_t mid = budgets.size() / 2;
  if (b_single) {
    double best = INFINITY;
    for (std::size_t b = 0; b < budgets.size(); ++b) {
      const double dist = std::abs(std::log(budgets[b]) - std::log(*b_single));
      if (dist < best) {
        best = dist;
        mid = b;
      }
    }
  }
  const double gap = s_err[mid] - t_err[mid];
  const double se = diff_stderr(s.points[mid], t.points[mid]);
  const bool gap_ok = gap > 2 * se;
  verdict("C8a two_stage_error_gap", gap_ok,
          "at C/N = " + fmt(budgets[mid]) + ": single " + fmt(s_err[mid]) + " vs two-stage " + fmt(t_err[mid]) +
              ", gap " + fmt(gap) + " (> 2 stderr = " + fmt(2 * se) + ")");
  verdict("C8b two_stage_budget_reduction", reduction_ok,
          reduction_detail + " | " + curve + fmt(seconds_since(start)) + " s");
}

void real_data() {
  // Synthetic transitive league: always runs.
  std::ostringstream league;
  league << "home,away,home_goals,away_goals\n";
  for (int a = 0; a < 20; ++a) {
    for (int b = 0; b < 20; ++b) {
      if (a != b) league << "T" << 100 + a << ",T" << 100 + b << "," << (a < b ? 3 : 1) << "," << (a < b ? 1 : 3) << "\n";
    }
  }
  std::istringstream league_in(league.str());
  const auto records = load_matches(league_in);
  std::vector<std::string> truth;
  for (int a = 0; a < 20; ++a) truth.push_back("T" + std::to_string(100 + a));
  std::int64_t synthetic_worst = 0;
  for (const auto& model : {PreferenceModel::thurstone(0.4), PreferenceModel::btl()}) {
    const auto counts = matches_to_counts(records, 1.0, 1.0);
    synthetic_worst = std::max(synthetic_worst, rank_real(counts, model, Algorithm::WLS, truth).kendall_tau);
  }
  verdict("C9a transitive_league", synthetic_worst == 0, "kendall tau " + std::to_string(synthetic_worst) + " (= 0)");

  const fs::path dir = fs::path(PAIRRANK_DATA_DIR) / "epl";
  const std::vector<std::string> seasons = {"2012-13", "2014-15"};
  std::string detail;
  bool any = false;
  std::int64_t worst = 0;
  for (const auto& season : seasons) {
    const auto matches = dir / (season + "_matches.csv");
    const auto standings = dir / (season + "_standings.csv");
    if (!fs::exists(matches) || !fs::exists(standings)) continue;
    any = true;
    const auto recs = load_matches(matches.string());
    const auto table = load_standings(standings.string());
    for (const auto& [alpha, beta] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}}) {
      const auto counts = matches_to_counts(recs, alpha, beta);
      for (const auto& model : {PreferenceModel::thurstone(0.4), PreferenceModel::btl()}) {
        EstimatorOptions opts;
        opts.chi = 1e-4;
        const auto tau = rank_real(counts, model, Algorithm::WLS, table, opts).kendall_tau;
        worst = std::max(worst, tau);
        detail += season + " a=" + fmt(alpha) + " b=" + fmt(beta) + " " + model.name() + " tau=" +
                  std::to_string(tau) + "; ";
      }
    }
  }
  if (!any) {
    report("C9b real_data_kendall", "SKIP", "season files missing under " + dir.string());
    return;
  }
  verdict("C9b real_data_kendall", worst <= 20, detail + "max " + std::to_string(worst) + " (<= 20)");
}

struct CliRun {
  int status = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(PAIRRANK_CLI) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism() {
  const auto dir = fs::temp_directory_path() / ("pairrank_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::vector<std::string> invocations = {
      "--seed 7 simulate --n 30 --trials 50 --budgets 40,80 --threads 4",
      "--seed 7 --model btl simulate --n 20 --graph hub --hubs 2 --trials 40 --w 8,16",
      "--seed 9 simulate --n 16 --graph star --trials 40 --budgets 30 --quality uniform",
      "--seed 3 adaptive --n 30 --rho1 4 --rho2 4 --trials 30 --budgets 60,120 --threads 3",
      "--seed 3 adaptive --n 30 --rho1 4 --rho2 6 --trials 30 --budgets 120 --fresh-stage2 --stage2-w 5",
  };
  bool ok = true;
  std::size_t k = 0;
  for (const auto& args : invocations) {
    std::string outputs[2];
    std::string trials[2];
    for (int rep = 0; rep < 2; ++rep) {
      const auto out = dir / ("run" + std::to_string(k) + "_" + std::to_string(rep) + ".csv");
      const auto tr = dir / ("trials" + std::to_string(k) + "_" + std::to_string(rep) + ".csv");
      const auto r = run_cli("--out " + out.string() + " " + args + " --trials-out " + tr.string());
      if (r.status != 0) ok = false;
      outputs[rep] = slurp(out);
      trials[rep] = slurp(tr);
    }
    if (outputs[0].empty() || outputs[0] != outputs[1] || trials[0].empty() || trials[0] != trials[1]) ok = false;
    ++k;
  }
  fs::remove_all(dir);
  verdict("C10 cli_determinism", ok,
          std::to_string(invocations.size()) + " simulate/adaptive invocations run twice, curve and trial CSVs compared bytewise");
}

}  // namespace

int main() {
  std::cout << "pairrank acceptance" << std::endl;
  const auto checks = {noiseless_recovery, dag_oracle_and_flow, complete_graph_closed_form, gradient_check,
                       mse_scaling, regime_trends, two_stage_gain, real_data, determinism};
  for (const auto& check : checks) {
    try {
      check();
    } catch (const std::exception& e) {
      report("error", "FAIL", e.what());
    }
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
