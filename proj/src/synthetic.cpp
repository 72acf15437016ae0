#include "ocf/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "ocf/rng.hpp"

namespace ocf::synthetic {

namespace {

constexpr double kBernoulliP = 0.4;

double dot_beta(std::span<const double> w) {
  double s = 0.0;
  for (std::size_t j = 0; j < kCovariates; ++j) s += w[j] * kBeta[j];
  return s;
}

void check_dimension(std::span<const double> w) {
  if (w.size() != kCovariates) {
    throw DataError("design points have " + std::to_string(kCovariates) + " covariates, got " +
                    std::to_string(w.size()));
  }
}

}  // namespace

Design design_from_int(int id) {
  if (id < 1 || id > 3) throw DataError("design must be 1, 2 or 3");
  return static_cast<Design>(id);
}

double regression_function(Design design, std::span<const double> w) {
  check_dimension(w);
  switch (design) {
    case Design::one: return dot_beta(w);
    case Design::two: {
      double s = 0.0;
      for (std::size_t j = 0; j < kCovariates; ++j) s += std::sin(2.0 * w[j]) * kBeta[j];
      return s;
    }
    case Design::three: return 2.0 * std::sin(dot_beta(w));
  }
  return 0.0;
}

double regression_gradient(Design design, std::span<const double> w, std::size_t j) {
  check_dimension(w);
  switch (design) {
    case Design::one: return kBeta[j];
    case Design::two: return 2.0 * std::cos(2.0 * w[j]) * kBeta[j];
    case Design::three: return 2.0 * std::cos(dot_beta(w)) * kBeta[j];
  }
  return 0.0;
}

double logistic_cdf(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logistic_pdf(double x) {
  const double f = logistic_cdf(x);
  return f * (1.0 - f);
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("quantile of an empty sample");
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  const auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

std::vector<double> simulate_latent(Design design, std::size_t n, std::uint64_t seed, Matrix* covariates) {
  Rng rng(seed);
  std::vector<double> latent(n);
  std::array<double, kCovariates> w{};
  if (covariates) *covariates = Matrix(n, kCovariates);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < kCovariates; ++j) {
      w[j] = is_continuous(j) ? rng.normal() : (rng.uniform() < kBernoulliP ? 1.0 : 0.0);
    }
    const double u = rng.uniform_open();
    latent[i] = regression_function(design, w) + std::log(u / (1.0 - u));
    if (covariates) std::copy(w.begin(), w.end(), covariates->row(i).begin());
  }
  return latent;
}

Thresholds compute_thresholds(Design design, std::uint64_t seed, std::size_t draws) {
  auto latent = simulate_latent(design, draws, seed);
  Thresholds t;
  t.zeta1 = empirical_quantile(latent, kThresholdQuantiles[0]);
  t.zeta2 = empirical_quantile(std::move(latent), kThresholdQuantiles[1]);
  return t;
}

int discretize(double latent, const Thresholds& thresholds) {
  if (latent <= thresholds.zeta1) return 1;
  if (latent <= thresholds.zeta2) return 2;
  return 3;
}

Dataset simulate_sample(Design design, const Thresholds& thresholds, std::size_t n, std::uint64_t seed) {
  Matrix covariates;
  const auto latent = simulate_latent(design, n, seed, &covariates);
  std::vector<int> outcome(n);
  for (std::size_t i = 0; i < n; ++i) outcome[i] = discretize(latent[i], thresholds);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < kCovariates; ++j) names.push_back("W" + std::to_string(j + 1));
  return make_dataset(std::move(covariates), std::move(outcome), std::move(names), kClasses);
}

std::array<double, kClasses> TruthOracle::probabilities(std::span<const double> w) const {
  const double g = regression_function(design_, w);
  const double f1 = logistic_cdf(thresholds_.zeta1 - g);
  const double f2 = logistic_cdf(thresholds_.zeta2 - g);
  return {f1, f2 - f1, 1.0 - f2};
}

std::array<double, kClasses> TruthOracle::contrast(std::size_t j, std::span<const double> w, double up,
                                                   double down) const {
  check_dimension(w);
  std::array<double, kCovariates> at{};
  std::copy(w.begin(), w.end(), at.begin());
  at[j] = up;
  const auto p_up = probabilities(at);
  at[j] = down;
  const auto p_down = probabilities(at);
  return {p_up[0] - p_down[0], p_up[1] - p_down[1], p_up[2] - p_down[2]};
}

std::array<double, kClasses> TruthOracle::marginal_effect(std::size_t j, std::span<const double> w) const {
  check_dimension(w);
  if (j >= kCovariates) throw DataError("covariate index out of range");
  if (!is_continuous(j)) return contrast(j, w, std::ceil(w[j]), std::floor(w[j]));
  const double g = regression_function(design_, w);
  const double dg = regression_gradient(design_, w, j);
  const double f1 = logistic_pdf(thresholds_.zeta1 - g);
  const double f2 = logistic_pdf(thresholds_.zeta2 - g);
  // Densities at zeta_0 = -inf and zeta_3 = +inf vanish.
  return {(0.0 - f1) * dg, (f1 - f2) * dg, (f2 - 0.0) * dg};
}

Matrix TruthOracle::probabilities(const Matrix& points) const {
  Matrix out(points.rows(), kClasses);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto p = probabilities(points.row(i));
    std::copy(p.begin(), p.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace ocf::synthetic
