#include "pairrank/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "pairrank/errors.hpp"
#include "pairrank/metrics.hpp"

namespace pairrank {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

struct Row {
  std::size_t line;
  std::vector<std::string> fields;
};

std::optional<std::int64_t> try_int(const std::string& s) {
  std::int64_t value = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return value;
}

std::optional<double> try_double(const std::string& s) {
  double value = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty() || !std::isfinite(value)) return std::nullopt;
  return value;
}

[[noreturn]] void bad_row(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

std::int64_t parse_int(const Row& row, std::size_t col) {
  const auto v = try_int(row.fields[col]);
  if (!v) bad_row(row.line, "expected an integer, got '" + row.fields[col] + "'");
  return *v;
}

double parse_double(const Row& row, std::size_t col) {
  const auto v = try_double(row.fields[col]);
  if (!v) bad_row(row.line, "expected a number, got '" + row.fields[col] + "'");
  return *v;
}

// Reads non-empty, non-comment rows. Numeric files may start with a header,
// recognised by a non-numeric first field; text files always have one.
std::vector<Row> read_rows(std::istream& in, std::vector<std::string>* header, bool numeric_first) {
  std::vector<Row> rows;
  std::string line;
  std::size_t number = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split_fields(t);
    if (first) {
      first = false;
      if (!numeric_first) {
        *header = std::move(fields);
        continue;
      }
      if (!try_double(fields.front())) continue;
    }
    rows.push_back({number, std::move(fields)});
  }
  if (in.bad()) throw DataError("read failure");
  return rows;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

NodeIndex parse_object(const Row& row, std::size_t col) {
  const auto v = parse_int(row, col);
  if (v < 1) bad_row(row.line, "object indices are one-based");
  return static_cast<NodeIndex>(v - 1);
}

std::size_t resolve_n(std::optional<std::size_t> n, std::size_t largest_seen) {
  if (!n) return largest_seen;
  if (*n < largest_seen) {
    throw DataError("object index " + std::to_string(largest_seen) + " exceeds n = " +
                    std::to_string(*n));
  }
  return *n;
}

}  // namespace

std::string format_number(double value) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(12) << value;
  return s.str();
}

EdgeList read_edge_list(std::istream& in, std::optional<std::size_t> n) {
  const auto rows = read_rows(in, nullptr, true);
  EdgeList out;
  std::size_t largest = 0;
  std::optional<bool> has_values;
  for (const auto& row : rows) {
    if (row.fields.size() != 2 && row.fields.size() != 3) bad_row(row.line, "expected i,j[,value]");
    const bool with_value = row.fields.size() == 3;
    if (has_values && *has_values != with_value) bad_row(row.line, "inconsistent column count");
    has_values = with_value;
    const NodeIndex a = parse_object(row, 0);
    const NodeIndex b = parse_object(row, 1);
    largest = std::max({largest, a + 1, b + 1});
    out.edges.push_back(canonical_edge(a, b));
    if (with_value) out.values.push_back(parse_double(row, 2));
  }
  out.n = resolve_n(n, largest);
  return out;
}

EdgeList read_edge_list(const std::string& path, std::optional<std::size_t> n) {
  auto in = open_input(path);
  return read_edge_list(in, n);
}

ComparisonGraph graph_from_edge_list(const EdgeList& list) {
  std::vector<std::int64_t> budgets;
  for (double v : list.values) {
    if (!(v >= 1.0) || v != std::floor(v)) {
      throw DataError("per-edge budgets must be positive integers");
    }
    budgets.push_back(static_cast<std::int64_t>(v));
  }
  return ComparisonGraph(list.n, list.edges, std::move(budgets));
}

void write_graph_csv(std::ostream& out, const ComparisonGraph& g) {
  out << (g.has_budgets() ? "i,j,w\n" : "i,j\n");
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    out << g.edges()[e].i + 1 << ',' << g.edges()[e].j + 1;
    if (g.has_budgets()) out << ',' << g.budgets()[e];
    out << '\n';
  }
}

ComparisonCounts read_counts_csv(std::istream& in, std::optional<std::size_t> n) {
  const auto rows = read_rows(in, nullptr, true);
  std::vector<EdgeCount> entries;
  std::size_t largest = 0;
  for (const auto& row : rows) {
    if (row.fields.size() != 4) bad_row(row.line, "expected i,j,w,k");
    const NodeIndex a = parse_object(row, 0);
    const NodeIndex b = parse_object(row, 1);
    largest = std::max({largest, a + 1, b + 1});
    entries.push_back({a, b, parse_int(row, 2), parse_int(row, 3)});
  }
  return ComparisonCounts(resolve_n(n, largest), std::move(entries));
}

ComparisonCounts read_counts_csv(const std::string& path, std::optional<std::size_t> n) {
  auto in = open_input(path);
  return read_counts_csv(in, n);
}

void write_counts_csv(std::ostream& out, const ComparisonCounts& counts) {
  out << "i,j,w,k\n";
  for (const auto& c : counts.edges()) {
    out << c.i + 1 << ',' << c.j + 1 << ',' << c.w << ',' << c.k << '\n';
  }
}

void write_estimate_csv(std::ostream& out, const QualityEstimate& estimate) {
  const auto order = rank_from_qualities(estimate.q_hat);
  std::vector<std::size_t> rank(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;
  out << "object,q_hat,rank\n";
  for (std::size_t v = 0; v < estimate.q_hat.size(); ++v) {
    out << v + 1 << ',' << format_number(estimate.q_hat[v]) << ',' << rank[v] << '\n';
  }
}

void write_curve_csv(std::ostream& out, std::span<const CurvePoint> points) {
  out << "algo,budget_per_object,error_prob,stderr,mse_aligned\n";
  for (const auto& p : points) {
    out << algorithm_name(p.algo) << ',' << format_number(p.budget_per_object) << ','
        << format_number(p.error_prob) << ',' << format_number(p.std_error) << ','
        << format_number(p.mse_aligned) << '\n';
  }
}

void write_adaptive_curve_csv(std::ostream& out, std::span<const CurvePoint> points,
                              const AdaptiveSpec& spec) {
  out << "algo,budget_per_object,error_prob,stderr,mse_aligned,spent_per_object,stage2_w\n";
  const std::string w2 = spec.stage2_w ? std::to_string(*spec.stage2_w) : "auto";
  for (const auto& p : points) {
    out << algorithm_name(p.algo) << ',' << format_number(p.budget_per_object) << ','
        << format_number(p.error_prob) << ',' << format_number(p.std_error) << ','
        << format_number(p.mse_aligned) << ',' << format_number(p.spent_per_object) << ',' << w2
        << '\n';
  }
}

void write_trials_csv(std::ostream& out, const ExperimentConfig& cfg, const SweepResult& result) {
  out << "trial,algo,budget_per_object,eps_error,kendall,mse_aligned,mse_raw\n";
  const std::size_t algos = cfg.algos.size();
  for (std::size_t b = 0; b < result.trials.size(); ++b) {
    for (const auto& t : result.trials[b]) {
      for (std::size_t a = 0; a < t.outcomes.size(); ++a) {
        const auto& o = t.outcomes[a];
        const double budget = result.points[b * algos + a].budget_per_object;
        out << t.trial << ',' << algorithm_name(o.algo) << ',' << format_number(budget) << ','
            << (o.epsilon_error ? 1 : 0) << ',' << o.kendall_tau << ','
            << format_number(o.mse_aligned) << ',' << format_number(o.mse_raw) << '\n';
      }
    }
  }
}

std::vector<MatchRecord> load_matches(std::istream& in) {
  std::vector<std::string> header;
  const auto rows = read_rows(in, &header, false);
  const std::vector<std::string> expected = {"home", "away", "home_goals", "away_goals"};
  if (header != expected) throw DataError("match file must start with home,away,home_goals,away_goals");

  std::map<std::pair<std::string, std::string>, MatchRecord> pairs;
  std::map<std::pair<std::string, std::string>, int> legs;
  std::set<std::pair<std::string, std::string>> fixtures;
  for (const auto& row : rows) {
    if (row.fields.size() != 4) bad_row(row.line, "expected home,away,home_goals,away_goals");
    const std::string& home = row.fields[0];
    const std::string& away = row.fields[1];
    if (home.empty() || away.empty()) bad_row(row.line, "empty team name");
    if (home == away) bad_row(row.line, "a team cannot play itself");
    const auto hg = parse_int(row, 2);
    const auto ag = parse_int(row, 3);
    if (hg < 0 || ag < 0) bad_row(row.line, "goals must be non-negative");
    if (!fixtures.insert({home, away}).second) {
      bad_row(row.line, "duplicate fixture " + home + " vs " + away);
    }
    const bool home_first = home < away;
    const auto key = home_first ? std::pair{home, away} : std::pair{away, home};
    if (++legs[key] > 2) bad_row(row.line, key.first + " and " + key.second + " meet more than twice");
    auto& rec = pairs[key];
    rec.team_i = key.first;
    rec.team_j = key.second;
    rec.goals_ij += home_first ? hg : ag;
    rec.goals_ji += home_first ? ag : hg;
  }
  std::vector<MatchRecord> out;
  out.reserve(pairs.size());
  for (auto& [key, rec] : pairs) out.push_back(std::move(rec));
  return out;
}

std::vector<MatchRecord> load_matches(const std::string& path) {
  auto in = open_input(path);
  return load_matches(in);
}

LeagueCounts matches_to_counts(std::span<const MatchRecord> records, double alpha, double beta) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be non-negative");

  std::set<std::string> names;
  for (const auto& r : records) {
    if (r.team_i == r.team_j) throw DataError("match record with identical teams");
    if (r.goals_ij < 0 || r.goals_ji < 0) throw DataError("negative goal count");
    names.insert(r.team_i);
    names.insert(r.team_j);
  }
  std::vector<std::string> teams(names.begin(), names.end());
  auto index_of = [&](const std::string& t) {
    return static_cast<NodeIndex>(std::lower_bound(teams.begin(), teams.end(), t) - teams.begin());
  };
  auto to_count = [&](std::int64_t goals) {
    return static_cast<std::int64_t>(std::floor(alpha * static_cast<double>(goals) + beta + 0.5));
  };

  std::vector<EdgeCount> entries;
  for (const auto& r : records) {
    const std::int64_t k_ij = to_count(r.goals_ij);
    const std::int64_t k_ji = to_count(r.goals_ji);
    if (k_ij + k_ji == 0) continue;
    entries.push_back({index_of(r.team_i), index_of(r.team_j), k_ij + k_ji, k_ij});
  }
  ComparisonCounts all(teams.size(), std::move(entries));

  LeagueCounts out;
  const auto labels = connected_components(all.graph());
  std::vector<std::size_t> sizes;
  for (auto l : labels) {
    if (l >= sizes.size()) sizes.resize(l + 1, 0);
    ++sizes[l];
  }
  if (sizes.size() <= 1) {
    out.counts = std::move(all);
    out.teams = std::move(teams);
    return out;
  }
  const std::size_t keep =
      static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<NodeIndex> remap(teams.size(), 0);
  for (std::size_t v = 0; v < teams.size(); ++v) {
    if (labels[v] == keep) {
      remap[v] = out.teams.size();
      out.teams.push_back(teams[v]);
    } else {
      out.dropped.push_back(teams[v]);
    }
  }
  std::vector<EdgeCount> kept;
  for (const auto& c : all.edges()) {
    if (labels[c.i] == keep) kept.push_back({remap[c.i], remap[c.j], c.w, c.k});
  }
  out.counts = ComparisonCounts(out.teams.size(), std::move(kept));
  return out;
}

std::vector<std::string> load_standings(std::istream& in) {
  std::vector<std::string> header;
  const auto rows = read_rows(in, &header, false);
  std::vector<std::string> order;
  if (header == std::vector<std::string>{"position", "team"}) {
    std::vector<std::pair<std::int64_t, std::string>> listed;
    for (const auto& row : rows) {
      if (row.fields.size() != 2) bad_row(row.line, "expected position,team");
      listed.emplace_back(parse_int(row, 0), row.fields[1]);
    }
    std::sort(listed.begin(), listed.end());
    for (std::size_t k = 0; k < listed.size(); ++k) {
      if (listed[k].first != static_cast<std::int64_t>(k + 1)) {
        throw DataError("standings positions must be 1..n without ties or gaps");
      }
      order.push_back(listed[k].second);
    }
  } else if (header == std::vector<std::string>{"team"}) {
    for (const auto& row : rows) {
      if (row.fields.size() != 1) bad_row(row.line, "expected a single team column");
      order.push_back(row.fields[0]);
    }
  } else {
    throw DataError("standings file must start with position,team or team");
  }
  std::set<std::string> seen;
  for (const auto& t : order) {
    if (t.empty()) throw DataError("empty team name in standings");
    if (!seen.insert(t).second) throw DataError("team listed twice in standings: " + t);
  }
  return order;
}

std::vector<std::string> load_standings(const std::string& path) {
  auto in = open_input(path);
  return load_standings(in);
}

RealRanking rank_real(const LeagueCounts& league, const PreferenceModel& model, Algorithm algo,
                      std::span<const std::string> standings, const EstimatorOptions& opts) {
  const std::size_t n = league.teams.size();
  std::map<std::string, NodeIndex> index;
  for (std::size_t v = 0; v < n; ++v) index[league.teams[v]] = v;
  const std::set<std::string> dropped(league.dropped.begin(), league.dropped.end());

  RealRanking out;
  std::vector<NodeIndex> truth;
  for (const auto& t : standings) {
    if (const auto it = index.find(t); it != index.end()) {
      truth.push_back(it->second);
      out.standings.push_back(t);
    } else if (!dropped.contains(t)) {
      throw DataError("standings team without matches: " + t);
    }
  }
  if (truth.size() != n) throw DataError("standings do not cover every ranked team");

  out.estimate = estimate_qualities(league.counts, model, algo, opts);
  const auto order = rank_from_qualities(out.estimate.q_hat);
  for (auto v : order) out.order.push_back(league.teams[v]);
  out.kendall_tau = kendall_tau(truth, order);
  return out;
}

}  // namespace pairrank
