#include "pairrank/metrics.hpp"

#include <algorithm>
#include <limits>

#include "pairrank/errors.hpp"

namespace pairrank {

namespace {

void require_permutation(std::span<const NodeIndex> order, std::size_t n) {
  if (order.size() != n) throw DataError("ranking length does not match the number of objects");
  std::vector<bool> seen(n, false);
  for (auto v : order) {
    if (v >= n || seen[v]) throw DataError("ranking is not a permutation");
    seen[v] = true;
  }
}

// Counts inversions of `seq` in [lo, hi) while merge-sorting it.
std::int64_t count_inversions(std::vector<std::size_t>& seq, std::vector<std::size_t>& scratch,
                              std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t total = count_inversions(seq, scratch, lo, mid) + count_inversions(seq, scratch, mid, hi);
  std::size_t a = lo;
  std::size_t b = mid;
  std::size_t out = lo;
  while (a < mid && b < hi) {
    if (seq[a] <= seq[b]) {
      scratch[out++] = seq[a++];
    } else {
      total += static_cast<std::int64_t>(mid - a);
      scratch[out++] = seq[b++];
    }
  }
  while (a < mid) scratch[out++] = seq[a++];
  while (b < hi) scratch[out++] = seq[b++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            seq.begin() + static_cast<std::ptrdiff_t>(lo));
  return total;
}

}  // namespace

bool epsilon_error(std::span<const double> q_true, std::span<const NodeIndex> order, double eps) {
  if (!(eps >= 0.0)) throw DomainError("eps must be non-negative");
  require_permutation(order, q_true.size());
  // Scan from the bottom keeping the best quality ranked below the cursor.
  double best_below = -std::numeric_limits<double>::infinity();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const double q = q_true[*it];
    if (best_below - q > eps + kEpsilonSlack) return true;
    best_below = std::max(best_below, q);
  }
  return false;
}

std::int64_t kendall_tau(std::span<const NodeIndex> order_a, std::span<const NodeIndex> order_b) {
  if (order_a.size() != order_b.size()) throw DataError("rankings have different lengths");
  const std::size_t n = order_a.size();
  require_permutation(order_a, n);
  require_permutation(order_b, n);
  std::vector<std::size_t> position_in_b(n);
  for (std::size_t k = 0; k < n; ++k) position_in_b[order_b[k]] = k;
  std::vector<std::size_t> seq(n);
  for (std::size_t k = 0; k < n; ++k) seq[k] = position_in_b[order_a[k]];
  std::vector<std::size_t> scratch(n);
  return count_inversions(seq, scratch, 0, n);
}

double aligned_mse(std::span<const double> q_hat, std::span<const double> q_true) {
  if (q_hat.size() != q_true.size()) throw DataError("quality vectors have different lengths");
  if (q_hat.empty()) return 0.0;
  double shift = 0.0;
  for (std::size_t k = 0; k < q_hat.size(); ++k) shift += q_true[k] - q_hat[k];
  shift /= static_cast<double>(q_hat.size());
  double total = 0.0;
  for (std::size_t k = 0; k < q_hat.size(); ++k) {
    const double r = q_hat[k] + shift - q_true[k];
    total += r * r;
  }
  return total;
}

double raw_mse(std::span<const double> q_hat, std::span<const double> q_true, NodeIndex reference) {
  if (q_hat.size() != q_true.size()) throw DataError("quality vectors have different lengths");
  if (reference >= q_true.size()) throw ConfigError("reference object out of range");
  double total = 0.0;
  for (std::size_t k = 0; k < q_hat.size(); ++k) {
    const double r = q_hat[k] - (q_true[k] - q_true[reference]);
    total += r * r;
  }
  return total;
}

}  // namespace pairrank
