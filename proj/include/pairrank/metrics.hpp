#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pairrank/graph.hpp"

namespace pairrank {

/// Quality gaps within this distance of eps count as equal to eps.
inline constexpr double kEpsilonSlack = 1e-12;

/// True when some pair with q_i > q_j + eps has j ranked ahead of i.
/// `order` lists objects best first.
bool epsilon_error(std::span<const double> q_true, std::span<const NodeIndex> order, double eps);

/// Number of object pairs ordered differently by the two rankings.
std::int64_t kendall_tau(std::span<const NodeIndex> order_a, std::span<const NodeIndex> order_b);

/// min over c of ||q_hat + c 1 - q_true||^2.
double aligned_mse(std::span<const double> q_hat, std::span<const double> q_true);

/// ||q_hat - (q_true - q_true[reference] 1)||^2, the error of the
/// reference-pinned estimate without realignment.
double raw_mse(std::span<const double> q_hat, std::span<const double> q_true, NodeIndex reference);

}  // namespace pairrank
