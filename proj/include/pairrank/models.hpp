#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace pairrank {

enum class ModelKind { Thurstone, BTL };

/// Link function F mapping a quality difference q_i - q_j to the probability
/// that i is preferred to j.
///
/// Thurstone: F(x) = Phi(x / sigma), the CDF of the zero-mean Gaussian
/// difference noise with standard deviation sigma.
/// BTL: F(x) = e^x / (1 + e^x).
class PreferenceModel {
 public:
  static PreferenceModel thurstone(double sigma);
  static PreferenceModel btl();

  /// Parses "thurstone" / "btl" (case-insensitive). sigma is ignored for BTL.
  static PreferenceModel parse(std::string_view kind, double sigma = 0.4);

  ModelKind kind() const { return kind_; }
  double sigma() const { return sigma_; }
  std::string name() const;

  friend bool operator==(const PreferenceModel&, const PreferenceModel&) = default;

 private:
  PreferenceModel(ModelKind kind, double sigma) : kind_(kind), sigma_(sigma) {}

  ModelKind kind_;
  double sigma_;
};

/// F(delta) together with its first two derivatives.
struct ProbDerivatives {
  double p;
  double dp;
  double d2p;
};

double preference_prob(const PreferenceModel& model, double delta);

/// F^{-1}(p). Throws DomainError unless 0 < p < 1.
double inverse_preference(const PreferenceModel& model, double p);

ProbDerivatives prob_derivatives(const PreferenceModel& model, double delta);

/// dF^{-1}/dp evaluated at p, i.e. 1 / F'(F^{-1}(p)).
double inverse_derivative(const PreferenceModel& model, double p);

/// Number of wins for the first object out of `comparisons` independent
/// judgments, K ~ Binomial(W, F(delta)).
std::int64_t sample_comparisons(const PreferenceModel& model, double delta,
                                std::int64_t comparisons, std::mt19937_64& rng);

}  // namespace pairrank
