#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pairrank/analysis.hpp"
#include "pairrank/errors.hpp"
#include "pairrank/estimators.hpp"
#include "pairrank/experiments.hpp"
#include "pairrank/io.hpp"
#include "pairrank/metrics.hpp"

namespace py = pybind11;
using namespace pairrank;

namespace {

using CountTuple = std::tuple<std::size_t, std::size_t, std::int64_t, std::int64_t>;

ComparisonCounts to_counts(std::size_t n, const std::vector<CountTuple>& rows) {
  std::vector<EdgeCount> entries;
  entries.reserve(rows.size());
  for (const auto& [i, j, w, k] : rows) entries.push_back({i, j, w, k});
  return ComparisonCounts(n, std::move(entries));
}

std::vector<std::pair<std::size_t, std::size_t>> edge_pairs(const ComparisonGraph& g) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& e : g.edges()) out.emplace_back(e.i, e.j);
  return out;
}

ComparisonGraph from_pairs(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<Edge> list;
  for (const auto& [a, b] : edges) list.push_back(canonical_edge(a, b));
  return ComparisonGraph(n, std::move(list));
}

GraphKind parse_graph_kind(const std::string& kind) {
  if (kind == "complete") return GraphKind::Complete;
  if (kind == "star") return GraphKind::Star;
  if (kind == "regular") return GraphKind::RandomRegular;
  if (kind == "hub") return GraphKind::Hub;
  if (kind == "wheel") return GraphKind::Wheel;
  throw ConfigError("unknown graph kind '" + kind + "'");
}

py::dict estimate_to_dict(const QualityEstimate& est) {
  py::dict d;
  d["q_hat"] = est.q_hat;
  d["reference"] = est.reference;
  d["converged"] = est.diagnostics.converged;
  d["iterations"] = est.diagnostics.iterations;
  d["residual_norm"] = est.diagnostics.residual_norm;
  d["clamped_edges"] = est.diagnostics.clamped_edges;
  return d;
}

}  // namespace

PYBIND11_MODULE(_pairrank, m) {
  m.doc() = "Quality estimation and ranking from noisy pairwise comparisons";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<GenerationError>(m, "GenerationError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<PreferenceModel>(m, "PreferenceModel")
      .def_static("thurstone", &PreferenceModel::thurstone, py::arg("sigma") = 0.4)
      .def_static("btl", &PreferenceModel::btl)
      .def_static("parse", &PreferenceModel::parse, py::arg("kind"), py::arg("sigma") = 0.4)
      .def_property_readonly("sigma", &PreferenceModel::sigma)
      .def_property_readonly("name", &PreferenceModel::name)
      .def("__repr__", [](const PreferenceModel& p) { return "PreferenceModel(" + p.name() + ")"; });

  m.def("preference_prob", &preference_prob, py::arg("model"), py::arg("delta"));
  m.def("inverse_preference", &inverse_preference, py::arg("model"), py::arg("p"));

  m.def(
      "estimate",
      [](std::size_t n, const std::vector<CountTuple>& counts, const PreferenceModel& model,
         const std::string& algo, double chi, std::optional<std::size_t> reference) {
        EstimatorOptions opts;
        opts.chi = chi;
        opts.reference = reference;
        return estimate_to_dict(estimate_qualities(to_counts(n, counts), model, parse_algorithm(algo), opts));
      },
      py::arg("n"), py::arg("counts"), py::arg("model"), py::arg("algo") = "wls",
      py::arg("chi") = kDefaultChi, py::arg("reference") = py::none(),
      "Estimates qualities from (i, j, w, k) tuples with zero-based objects.");

  m.def(
      "psi",
      [](const std::vector<double>& q, const std::vector<CountTuple>& counts, const PreferenceModel& model) {
        return psi_value(q, to_counts(q.size(), counts), model);
      },
      py::arg("q"), py::arg("counts"), py::arg("model"));

  m.def("rank_from_qualities", [](const std::vector<double>& q) { return rank_from_qualities(q); },
        py::arg("q_hat"));

  m.def(
      "build_graph",
      [](const std::string& kind, std::size_t n, std::size_t degree, std::uint64_t seed, std::size_t hubs,
         std::size_t max_degree) {
        GraphSpec spec;
        spec.kind = parse_graph_kind(kind);
        spec.n = n;
        spec.degree = degree;
        spec.hubs = hubs;
        spec.max_degree = max_degree;
        std::mt19937_64 rng(seed);
        return edge_pairs(build_graph(spec, rng));
      },
      py::arg("kind"), py::arg("n"), py::arg("degree") = 6, py::arg("seed") = 1, py::arg("hubs") = 1,
      py::arg("max_degree") = 3, "Edge list (i, j) with i > j, zero-based.");

  m.def(
      "walk_analysis",
      [](std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
         std::optional<std::vector<double>> weights, std::optional<std::size_t> reference) {
        const auto g = from_pairs(n, edges);
        const auto w = weights.value_or(std::vector<double>(g.edge_count(), 1.0));
        const auto wa = walk_analysis(g, w, reference.value_or(n - 1));
        py::dict d;
        d["theta"] = wa.theta;
        d["m_inverse"] = wa.m_inverse;
        d["lambda_c_max"] = wa.lambda_c_max;
        d["inf_norm_m_inverse"] = wa.inf_norm_m_inverse;
        d["rho_inf"] = wa.rho_inf;
        return d;
      },
      py::arg("n"), py::arg("edges"), py::arg("weights") = py::none(), py::arg("reference") = py::none());

  m.def(
      "kendall_tau",
      [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) { return kendall_tau(a, b); },
      py::arg("order_a"), py::arg("order_b"));
  m.def(
      "epsilon_error",
      [](const std::vector<double>& q, const std::vector<std::size_t>& order, double eps) {
        return epsilon_error(q, order, eps);
      },
      py::arg("q_true"), py::arg("order"), py::arg("eps"));
  m.def(
      "aligned_mse",
      [](const std::vector<double>& q_hat, const std::vector<double>& q_true) { return aligned_mse(q_hat, q_true); },
      py::arg("q_hat"), py::arg("q_true"));

  m.def(
      "sweep",
      [](std::size_t n, const std::vector<double>& budgets, const PreferenceModel& model, const std::string& graph,
         std::size_t degree, std::size_t trials, std::uint64_t seed, const std::vector<std::string>& algos,
         double eps, bool per_edge, std::optional<std::pair<std::size_t, std::size_t>> adaptive,
         unsigned threads) {
        ExperimentConfig cfg;
        cfg.n = n;
        cfg.model = model;
        cfg.graph.kind = parse_graph_kind(graph);
        cfg.graph.degree = degree;
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.eps = eps;
        cfg.threads = threads;
        cfg.budget_kind = per_edge ? BudgetKind::PerEdge : BudgetKind::PerObject;
        cfg.algos.clear();
        for (const auto& a : algos) cfg.algos.push_back(parse_algorithm(a));
        if (adaptive) cfg.adaptive = AdaptiveSpec{adaptive->first, adaptive->second, std::nullopt, false};
        const auto result = sweep(cfg, budgets);
        py::list points;
        for (const auto& p : result.points) {
          py::dict d;
          d["algo"] = algorithm_name(p.algo);
          d["budget_per_object"] = p.budget_per_object;
          d["error_prob"] = p.error_prob;
          d["stderr"] = p.std_error;
          d["mse_aligned"] = p.mse_aligned;
          d["spent_per_object"] = p.spent_per_object;
          points.append(d);
        }
        return points;
      },
      py::arg("n"), py::arg("budgets"), py::arg("model") = PreferenceModel::thurstone(0.4),
      py::arg("graph") = "regular", py::arg("degree") = 6, py::arg("trials") = 100, py::arg("seed") = 1,
      py::arg("algos") = std::vector<std::string>{"ls", "wls", "ml"}, py::arg("eps") = 0.04,
      py::arg("per_edge") = false, py::arg("adaptive") = py::none(), py::arg("threads") = 1u);

  m.def(
      "rank_real",
      [](const std::string& matches, const std::string& standings, const PreferenceModel& model,
         const std::string& algo, double alpha, double beta, double chi) {
        const auto league = matches_to_counts(load_matches(matches), alpha, beta);
        EstimatorOptions opts;
        opts.chi = chi;
        const auto r = rank_real(league, model, parse_algorithm(algo), load_standings(standings), opts);
        py::dict d;
        d["order"] = r.order;
        d["kendall_tau"] = r.kendall_tau;
        d["dropped"] = league.dropped;
        return d;
      },
      py::arg("matches"), py::arg("standings"), py::arg("model") = PreferenceModel::thurstone(0.4),
      py::arg("algo") = "wls", py::arg("alpha") = 1.0, py::arg("beta") = 1.0, py::arg("chi") = kDefaultChi);
}
