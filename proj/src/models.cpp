#include "pairrank/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "pairrank/errors.hpp"

namespace pairrank {

namespace {

void require_finite(double delta) {
  if (!std::isfinite(delta)) {
    throw DomainError("quality difference must be finite");
  }
}

// Gaussian density of the difference noise, i.e. F'(x) for Thurstone.
double thurstone_density(double x, double sigma) {
  const double z = x / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

PreferenceModel PreferenceModel::thurstone(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("Thurstone sigma must be a positive finite number");
  }
  return PreferenceModel(ModelKind::Thurstone, sigma);
}

PreferenceModel PreferenceModel::btl() { return PreferenceModel(ModelKind::BTL, 1.0); }

PreferenceModel PreferenceModel::parse(std::string_view kind, double sigma) {
  std::string lower(kind);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "thurstone") return thurstone(sigma);
  if (lower == "btl") return btl();
  throw ConfigError("unknown preference model '" + std::string(kind) +
                    "' (expected thurstone or btl)");
}

std::string PreferenceModel::name() const {
  return kind_ == ModelKind::Thurstone ? "thurstone" : "btl";
}

double preference_prob(const PreferenceModel& model, double delta) {
  require_finite(delta);
  if (model.kind() == ModelKind::Thurstone) {
    return 0.5 * std::erfc(-delta / (model.sigma() * std::numbers::sqrt2));
  }
  if (delta >= 0.0) {
    return 1.0 / (1.0 + std::exp(-delta));
  }
  const double e = std::exp(delta);
  return e / (1.0 + e);
}

double inverse_preference(const PreferenceModel& model, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("inverse_preference requires 0 < p < 1");
  }
  if (p == 0.5) return 0.0;
  if (model.kind() == ModelKind::Thurstone) {
    return -model.sigma() * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
  }
  return std::log(p) - std::log1p(-p);
}

ProbDerivatives prob_derivatives(const PreferenceModel& model, double delta) {
  require_finite(delta);
  const double p = preference_prob(model, delta);
  if (model.kind() == ModelKind::Thurstone) {
    const double sigma = model.sigma();
    const double dp = thurstone_density(delta, sigma);
    return {p, dp, -delta / (sigma * sigma) * dp};
  }
  // p(1-p) written in terms of e^{-|x|} so it stays positive in the tails.
  const double e = std::exp(-std::abs(delta));
  const double dp = e / ((1.0 + e) * (1.0 + e));
  return {p, dp, -std::tanh(0.5 * delta) * dp};
}

double inverse_derivative(const PreferenceModel& model, double p) {
  if (model.kind() == ModelKind::BTL) {
    if (!(p > 0.0 && p < 1.0)) {
      throw DomainError("inverse_derivative requires 0 < p < 1");
    }
    return 1.0 / (p * (1.0 - p));
  }
  const double x = inverse_preference(model, p);
  return 1.0 / thurstone_density(x, model.sigma());
}

std::int64_t sample_comparisons(const PreferenceModel& model, double delta,
                                std::int64_t comparisons, std::mt19937_64& rng) {
  if (comparisons < 0) {
    throw DomainError("number of comparisons must be non-negative");
  }
  if (comparisons == 0) return 0;
  std::binomial_distribution<std::int64_t> draw(comparisons, preference_prob(model, delta));
  return draw(rng);
}

}  // namespace pairrank
