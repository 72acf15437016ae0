#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ocf/dataset.hpp"

namespace ocf::synthetic {

/// Simulation designs over six independent covariates: W1, W3, W5 ~ N(0, 1)
/// and W2, W4, W6 ~ Bernoulli(0.4), coefficients (1, 1, 1/2, 1/2, 0, 0),
/// standard logistic latent error.
///   design 1: g(w) = w'beta
///   design 2: g(w) = sum_j sin(2 w_j) beta_j
///   design 3: g(w) = 2 sin(w'beta)
enum class Design { one = 1, two = 2, three = 3 };

inline constexpr std::size_t kCovariates = 6;
inline constexpr int kClasses = 3;
inline constexpr std::array<double, kCovariates> kBeta{1.0, 1.0, 0.5, 0.5, 0.0, 0.0};
inline constexpr std::array<double, 2> kThresholdQuantiles{0.33, 0.66};
inline constexpr std::size_t kThresholdDraws = 1'000'000;

Design design_from_int(int id);

/// True for the normally distributed (continuous) covariates W1, W3, W5.
constexpr bool is_continuous(std::size_t j) { return j % 2 == 0; }

double regression_function(Design design, std::span<const double> w);

/// Partial derivative of g with respect to w_j.
double regression_gradient(Design design, std::span<const double> w, std::size_t j);

double logistic_cdf(double x);
double logistic_pdf(double x);

struct Thresholds {
  double zeta1 = 0.0;
  double zeta2 = 0.0;
};

/// Empirical 0.33 and 0.66 quantiles (order statistic at ceil(q N)) of
/// `draws` simulated latent outcomes.
Thresholds compute_thresholds(Design design, std::uint64_t seed, std::size_t draws = kThresholdDraws);

/// Type-1 empirical quantile: the ceil(q N)-th smallest value (1-based).
double empirical_quantile(std::vector<double> values, double q);

/// Observed class of a latent outcome.
int discretize(double latent, const Thresholds& thresholds);

/// Simulated sample of size n; deterministic given seed. Throws DataError if
/// a class happens to be absent.
Dataset simulate_sample(Design design, const Thresholds& thresholds, std::size_t n, std::uint64_t seed);

/// Latent outcomes matching simulate_sample (same seed, same draws).
std::vector<double> simulate_latent(Design design, std::size_t n, std::uint64_t seed, Matrix* covariates = nullptr);

/// Exact choice probabilities and marginal effects of a design.
class TruthOracle {
 public:
  TruthOracle(Design design, Thresholds thresholds) : design_(design), thresholds_(thresholds) {}

  Design design() const { return design_; }
  const Thresholds& thresholds() const { return thresholds_; }

  /// p_m = F(zeta_m - g) - F(zeta_{m-1} - g).
  std::array<double, kClasses> probabilities(std::span<const double> w) const;

  /// Continuous covariates: analytic derivative. Discrete covariates:
  /// p(ceil w_j) - p(floor w_j).
  std::array<double, kClasses> marginal_effect(std::size_t j, std::span<const double> w) const;

  /// Exact p(w | w_j = up) - p(w | w_j = down).
  std::array<double, kClasses> contrast(std::size_t j, std::span<const double> w, double up, double down) const;

  /// Probabilities for every row (rows x 3).
  Matrix probabilities(const Matrix& points) const;

 private:
  Design design_;
  Thresholds thresholds_;
};

}  // namespace ocf::synthetic
