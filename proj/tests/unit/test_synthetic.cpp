#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "helpers.hpp"
#include "ocf/synthetic.hpp"

using namespace ocf;
using namespace ocf::synthetic;

TEST_SUITE("synthetic") {

TEST_CASE("regression functions") {
  const std::vector<double> zero(6, 0.0);
  CHECK(regression_function(Design::one, zero) == 0.0);
  CHECK(regression_function(Design::two, zero) == 0.0);
  // w'beta = pi / 2 through the first coordinate.
  std::vector<double> w(6, 0.0);
  w[0] = std::numbers::pi / 2.0;
  CHECK(regression_function(Design::three, w) == doctest::Approx(2.0));
  const std::vector<double> ones(6, 1.0);
  CHECK(regression_function(Design::one, ones) == doctest::Approx(3.0));
  CHECK(regression_function(Design::two, ones) == doctest::Approx(3.0 * std::sin(2.0)));
  const std::vector<double> short_w(5, 0.0);
  CHECK_THROWS(regression_function(Design::one, short_w));
  CHECK_THROWS(design_from_int(4));
}

TEST_CASE("thresholds hit the target quantiles") {
  const auto latent = simulate_latent(Design::two, kThresholdDraws, 99);
  const auto t = compute_thresholds(Design::two, 99);
  CHECK(t.zeta1 < t.zeta2);
  const auto below = std::count_if(latent.begin(), latent.end(), [&](double v) { return v <= t.zeta1; });
  const double ecdf = static_cast<double>(below) / static_cast<double>(latent.size());
  CHECK(ecdf >= 0.3299);
  CHECK(ecdf <= 0.3301);
  CHECK(compute_thresholds(Design::two, 99).zeta2 == t.zeta2);
  CHECK(empirical_quantile({5, 1, 4, 2, 3}, 0.4) == 2.0);
  CHECK(empirical_quantile({5, 1, 4, 2, 3}, 0.41) == 3.0);
}

TEST_CASE("fresh samples reproduce the class shares") {
  for (auto d : {Design::one, Design::two, Design::three}) {
    const auto t = compute_thresholds(d, 7);
    const auto latent = simulate_latent(d, kThresholdDraws, 8);
    std::array<double, 3> shares{};
    for (double v : latent) shares[static_cast<std::size_t>(discretize(v, t) - 1)] += 1.0;
    for (auto& s : shares) s /= static_cast<double>(latent.size());
    CHECK(std::abs(shares[0] - 0.33) <= 0.01);
    CHECK(std::abs(shares[1] - 0.33) <= 0.01);
    CHECK(std::abs(shares[2] - 0.34) <= 0.01);
  }
}

TEST_CASE("discretization and sampling") {
  const Thresholds t{-1.0, 1.0};
  CHECK(discretize(-1.0, t) == 1);
  CHECK(discretize(0.0, t) == 2);
  CHECK(discretize(1.5, t) == 3);
  const auto a = simulate_sample(Design::one, t, 200, 4);
  const auto b = simulate_sample(Design::one, t, 200, 4);
  CHECK(a.covariates == b.covariates);
  CHECK(a.outcome == b.outcome);
  CHECK(a.columns[0].name == "W1");
  CHECK(a.columns[0].kind == CovariateKind::continuous);
  CHECK(a.columns[1].kind == CovariateKind::discrete);
  Matrix cov;
  const auto latent = simulate_latent(Design::one, 200, 4, &cov);
  CHECK(cov == a.covariates);
  for (std::size_t i = 0; i < 200; ++i) CHECK(a.outcome[i] == discretize(latent[i], t));
}

TEST_CASE("truth oracle probabilities") {
  const TruthOracle oracle(Design::one, {-1.0, 1.0});
  const std::vector<double> zero(6, 0.0);
  const auto p = oracle.probabilities(zero);
  CHECK(p[0] == doctest::Approx(0.268941).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(0.462117).epsilon(1e-6));
  CHECK(p[2] == doctest::Approx(0.268941).epsilon(1e-6));
  std::vector<double> big(6, 0.0);
  big[0] = 60.0;
  const auto q = oracle.probabilities(big);
  CHECK(q[2] == doctest::Approx(1.0));
  CHECK(q[0] < 1e-20);
  CHECK(logistic_cdf(-800.0) == 0.0);
  CHECK(logistic_cdf(800.0) == 1.0);
}

TEST_CASE("truth oracle marginal effects") {
  const TruthOracle oracle(Design::one, {-1.0, 1.0});
  const std::vector<double> zero(6, 0.0);
  const auto me = oracle.marginal_effect(0, zero);
  CHECK(me[0] == doctest::Approx(-0.196612).epsilon(1e-6));
  CHECK(me[0] + me[1] + me[2] == doctest::Approx(0.0).epsilon(1e-15));

  for (auto d : {Design::one, Design::two, Design::three}) {
    const TruthOracle o(d, {-0.5, 0.7});
    const auto w = std::vector<double>{0.3, 1.0, -0.2, 0.0, 1.1, 1.0};
    for (std::size_t j : {4UL, 5UL}) {
      const auto e = o.marginal_effect(j, w);
      for (double v : e) CHECK(v == 0.0);
    }
    // Discrete covariate at an integer value: ceil == floor, no change.
    const auto flat = o.marginal_effect(1, w);
    for (double v : flat) CHECK(v == 0.0);
    std::vector<double> mid(w);
    mid[1] = 0.4;
    const auto step = o.marginal_effect(1, mid);
    const auto c = o.contrast(1, mid, 1.0, 0.0);
    for (std::size_t m = 0; m < 3; ++m) CHECK(step[m] == c[m]);
  }
}

TEST_CASE("analytic derivatives match central differences") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = design_from_int(1 + static_cast<int>(rng.below(3)));
    const TruthOracle o(d, {-0.4, 0.9});
    std::vector<double> w(6);
    for (std::size_t j = 0; j < 6; ++j) w[j] = is_continuous(j) ? rng.normal() : static_cast<double>(rng.below(2));
    const std::size_t j = 2 * rng.below(3);
    const auto analytic = o.marginal_effect(j, w);
    const double h = 1e-6;
    const auto numeric = o.contrast(j, w, w[j] + h, w[j] - h);
    for (std::size_t m = 0; m < 3; ++m) CHECK(std::abs(numeric[m] / (2.0 * h) - analytic[m]) < 1e-6);
  }
}

}  // TEST_SUITE
