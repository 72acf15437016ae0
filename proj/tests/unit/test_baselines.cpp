#include <doctest.h>

#include <numeric>

#include "helpers.hpp"
#include "ocf/baselines.hpp"

using namespace ocf;

TEST_SUITE("baselines") {

TEST_CASE("probability transforms") {
  const std::vector<double> cum{0.3, 0.2};
  auto p = baseline_probabilities(BaselineKind::ordered_cumulative, 3, cum);
  CHECK(p.probabilities[0] == doctest::Approx(0.3 / 1.1));
  CHECK(p.probabilities[1] == 0.0);
  CHECK(p.probabilities[2] == doctest::Approx(0.8 / 1.1));
  CHECK_FALSE(p.uniform_fallback);

  const std::vector<double> monotone{0.2, 0.7};
  p = baseline_probabilities(BaselineKind::ordered_cumulative, 3, monotone);
  CHECK(p.probabilities[0] == doctest::Approx(0.2));
  CHECK(p.probabilities[1] == doctest::Approx(0.5));
  CHECK(p.probabilities[2] == doctest::Approx(0.3));

  const std::vector<double> simplex{0.25, 0.25, 0.5};
  p = baseline_probabilities(BaselineKind::multinomial, 3, simplex);
  CHECK(p.probabilities == simplex);

  const std::vector<double> zero{0.0, 0.0, 0.0};
  p = baseline_probabilities(BaselineKind::multinomial, 3, zero);
  CHECK(p.uniform_fallback);
  CHECK(p.probabilities[1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("forest counts and targets") {
  const auto data = testing::design_sample(300, 2);
  const auto params = testing::small_params(5);
  const auto mrf = fit_baseline(data, BaselineKind::multinomial, params, 1);
  REQUIRE(mrf.ensemble.forests.size() == 3);
  CHECK(mrf.ensemble.forests[2].target == ForestTarget{TargetKind::class_indicator, 3});
  CHECK(mrf.ensemble.kind == EstimatorKind::multinomial);
  const auto orf = fit_baseline(data, BaselineKind::ordered_cumulative, params, 1);
  REQUIRE(orf.ensemble.forests.size() == 2);
  CHECK(orf.ensemble.forests[1].target == ForestTarget{TargetKind::cumulative, 2});
  CHECK(baseline_kind(EstimatorKind::ordered_cumulative) == BaselineKind::ordered_cumulative);
  CHECK_THROWS_AS(baseline_kind(EstimatorKind::ocf), ParamError);
}

TEST_CASE("binary outcome: ordered p2 is one minus the cumulative forest") {
  const auto data = testing::random_dataset(300, 4, 2, 8);
  auto params = testing::small_params(20);
  params.normalize = false;
  const auto orf = fit_baseline(data, BaselineKind::ordered_cumulative, params, 1);
  REQUIRE(orf.ensemble.forests.size() == 1);
  const auto points = testing::random_points(15, 4, 2);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const double mu = orf.ensemble.forests[0].predict(points.row(i));
    const auto p = predict_baseline(orf, points.row(i)).probabilities;
    CHECK(p[0] == doctest::Approx(mu));
    CHECK(p[1] == doctest::Approx(1.0 - mu));
  }
}

TEST_CASE("class-1 trees match between the correlation and regression criteria") {
  // For m = 1 the lower indicator is identically zero, so both criteria score
  // the same indicator and the same stream draws the same subsample.
  const auto data = testing::design_sample(500, 6);
  const auto params = testing::small_params(10);
  const auto ocf_model = fit(data, params, 1);
  const auto mrf = fit_baseline(data, BaselineKind::multinomial, params, 1);
  const auto& a = ocf_model.forest(1).trees;
  const auto& b = mrf.ensemble.forests[0].trees;
  for (std::size_t t = 0; t < a.size(); ++t) {
    REQUIRE(a[t].nodes.size() == b[t].nodes.size());
    CHECK(a[t].grown_on == b[t].grown_on);
    for (std::size_t i = 0; i < a[t].nodes.size(); ++i) {
      CHECK(a[t].nodes[i].feature == b[t].nodes[i].feature);
      CHECK(a[t].nodes[i].threshold == b[t].nodes[i].threshold);
    }
  }
  // Other classes use a different indicator pair: both must simply be valid.
  for (const auto& tree : mrf.ensemble.forests[1].trees) CHECK(!tree.nodes.empty());
  for (const auto& tree : ocf_model.forest(2).trees) CHECK(!tree.nodes.empty());
}

TEST_CASE("batch predictions lie on the simplex") {
  const auto data = testing::design_sample(400, 7);
  for (auto kind : {BaselineKind::multinomial, BaselineKind::ordered_cumulative}) {
    for (double honest : {0.0, 0.5}) {
      auto params = testing::small_params(10);
      params.honest_fraction = honest;
      const auto model = fit_baseline(data, kind, params, 2);
      const auto points = testing::random_points(30, 6, 3);
      const auto p = predict_baseline(model, points, 2);
      for (std::size_t i = 0; i < p.rows(); ++i) {
        const auto row = p.row(i);
        CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0));
        for (double v : row) CHECK(v >= 0.0);
        CHECK(predict_baseline(model, points.row(i)).probabilities == std::vector<double>(row.begin(), row.end()));
      }
    }
  }
}

}  // TEST_SUITE
