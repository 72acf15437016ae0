#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "helpers.hpp"
#include "ocf/inference.hpp"
#include "ocf/synthetic.hpp"

using namespace ocf;

namespace {

ColumnMeta continuous_column(std::string name, double lo = -5.0, double hi = 5.0, double sd = 1.0) {
  ColumnMeta c;
  c.name = std::move(name);
  c.kind = CovariateKind::continuous;
  c.observed_min = lo;
  c.observed_max = hi;
  c.std_dev = sd;
  return c;
}

ColumnMeta discrete_column(std::string name, double lo, double hi) {
  ColumnMeta c;
  c.name = std::move(name);
  c.kind = CovariateKind::discrete;
  c.observed_min = lo;
  c.observed_max = hi;
  c.std_dev = 0.5;
  return c;
}

Tree root_leaf() {
  Tree t;
  t.nodes.resize(1);
  return t;
}

Tree stump(double threshold) {
  Tree t;
  t.nodes.resize(3);
  t.nodes[0].feature = 0;
  t.nodes[0].threshold = threshold;
  t.nodes[0].left = 1;
  t.nodes[0].right = 2;
  return t;
}

// Hand-built honest model over one covariate. `x` holds the honest rows'
// covariate values, `y` their outcomes; every class forest uses `shapes`.
OcfModel hand_model(const std::vector<double>& x, const std::vector<int>& y, int M, const std::vector<Tree>& shapes,
                    bool normalize = false) {
  OcfModel model;
  auto& e = model.ensemble;
  e.params.normalize = normalize;
  e.params.honest_fraction = 0.5;
  e.n_classes = M;
  e.columns = {continuous_column("x")};
  e.estimation_outcomes = y;
  Matrix cov(x.size(), 1);
  std::vector<std::uint32_t> positions(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    cov(i, 0) = x[i];
    positions[i] = static_cast<std::uint32_t>(i);
  }
  e.estimation_rows = positions;
  e.split.honest = positions;
  for (int m = 1; m <= M; ++m) {
    ClassForest forest{{TargetKind::ordered_class, m}, shapes};
    std::vector<std::uint8_t> targets;
    for (int v : y) targets.push_back(v == m ? 1 : 0);
    for (auto& tree : forest.trees) fill_leaves(tree, positions, positions, cov, targets);
    e.forests.push_back(std::move(forest));
  }
  return model;
}

OcfModel fitted(std::size_t n, std::size_t trees, bool normalize, std::uint64_t seed = 3) {
  const auto data = testing::design_sample(n, seed);
  auto params = testing::small_params(trees);
  params.normalize = normalize;
  return fit(data, params, 1);
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("honest_variance") {
  const std::vector<double> x{0.5, 0.0};
  CHECK(honest_variance(x) == doctest::Approx(0.25));
  const std::vector<double> constant(4, 0.25);
  CHECK(honest_variance(constant) == 0.0);
  const std::vector<double> zeros(5, 0.0);
  CHECK(honest_variance(zeros) == 0.0);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(honest_variance(one), InferenceError);
}

TEST_CASE("variance_probability on two honest rows") {
  const auto model = hand_model({0.0, 1.0}, {1, 2}, 2, {root_leaf()});
  const std::vector<double> w{0.3};
  const auto r = variance_probability(model, 1, w);
  CHECK(r.estimate == doctest::Approx(0.5));
  CHECK(r.se == doctest::Approx(0.5));
  CHECK(r.m == 1);

  const auto pure = hand_model({0.0, 1.0, 2.0}, {1, 1, 1}, 2, {root_leaf()});
  // Class 2 is absent here, so the model is not realistic; only class 1 matters.
  CHECK(variance_probability(pure, 1, w).se == doctest::Approx(0.0).epsilon(1e-12));

  // All weight on a row with indicator 0.
  const auto split = hand_model({-1.0, 1.0}, {2, 1}, 2, {stump(0.0)});
  const std::vector<double> left{-2.0};
  CHECK(variance_probability(split, 1, left).se == 0.0);
}

TEST_CASE("variance requires an honest model") {
  auto model = hand_model({0.0, 1.0}, {1, 2}, 2, {root_leaf()});
  model.ensemble.params.honest_fraction = 0.0;
  const std::vector<double> w{0.0};
  CHECK_THROWS_WITH_AS(variance_probability(model, 1, w), "variance requires honest fit", InferenceError);
  CHECK_THROWS_AS(variance_marginal_effect(model, 1, 0, w, 0.1), InferenceError);
  CHECK_THROWS_AS(marginal_effects(model, w, "point", 0.1, 0.95), InferenceError);
}

TEST_CASE("contrast points") {
  const auto c = continuous_column("c", -1.0, 1.0, 2.0);
  auto p = contrast_points(c, 0.0, 0.1);
  CHECK(p.up == doctest::Approx(0.2));
  CHECK(p.down == doctest::Approx(-0.2));
  CHECK(p.denominator() == doctest::Approx(0.4));
  p = contrast_points(c, 0.9, 0.1);  // clamped at the top
  CHECK(p.up == 1.0);
  CHECK(p.denominator() == doctest::Approx(0.3));
  CHECK_THROWS_AS(contrast_points(continuous_column("z", 1.0, 1.0, 0.0), 1.0, 0.1), InferenceError);
  CHECK_THROWS_AS(contrast_points(c, 0.0, 0.0), InferenceError);

  const auto d = discrete_column("d", 0.0, 3.0);
  p = contrast_points(d, 0.4, 0.1);
  CHECK(p.up == 1.0);
  CHECK(p.down == 0.0);
  CHECK(p.denominator() == 1.0);
  p = contrast_points(d, 2.0, 0.1);
  CHECK(p.up == 2.0);
  CHECK(p.down == 1.0);
  p = contrast_points(d, 0.0, 0.1);
  CHECK(p.up == 1.0);
  CHECK(p.down == 0.0);
}

TEST_CASE("marginal effect of a hand-built forest") {
  // Two trees: a stump at 0 and a single leaf. Up (0.1) and down (-0.1)
  // land on opposite sides of the stump.
  const auto model = hand_model({-1.0, 1.0}, {1, 1}, 2, {stump(0.0), root_leaf()});
  const std::vector<double> w{0.0};
  const auto alpha = me_weights(model, 1, 0, w, 0.1);
  REQUIRE(alpha.size() == 2);
  CHECK(alpha[0] == doctest::Approx(-0.5));
  CHECK(alpha[1] == doctest::Approx(0.5));
  CHECK(variance_marginal_effect(model, 1, 0, w, 0.1) == doctest::Approx(5.0));

  // Identical leaves on both sides: weights cancel.
  const auto flat = hand_model({-1.0, 1.0}, {1, 2}, 2, {root_leaf()});
  const auto zero = me_weights(flat, 1, 0, w, 0.1);
  CHECK(std::all_of(zero.begin(), zero.end(), [](double a) { return a == 0.0; }));
  CHECK(variance_marginal_effect(flat, 1, 0, w, 0.1) == 0.0);
  CHECK(marginal_effect(flat, 0, w, 0.1).effects == std::vector<double>{0.0, 0.0});
}

TEST_CASE("continuous effect divides by the clamped width") {
  // p(up) - p(down) = 1 - 0 for class 1 over a width of 0.2.
  const auto model = hand_model({-1.0, 1.0}, {2, 1}, 2, {stump(0.0)});
  const std::vector<double> w{0.0};
  const auto me = marginal_effect(model, 0, w, 0.1);
  CHECK(me.points.up == doctest::Approx(0.1));
  CHECK(me.effects[0] == doctest::Approx(5.0));
  CHECK(me.effects[1] == doctest::Approx(-5.0));
}

TEST_CASE("confidence intervals") {
  auto ci = confidence_interval(0.5, 0.0, 0.95);
  CHECK(ci.lo == 0.5);
  CHECK(ci.hi == 0.5);
  ci = confidence_interval(0.0, 1.0, 0.95);
  CHECK(ci.hi == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(ci.lo == doctest::Approx(-1.959964).epsilon(1e-6));
  ci = confidence_interval(1.0, 2.0, 0.5);
  CHECK(ci.hi - 1.0 == doctest::Approx(2.0 * 0.674490).epsilon(1e-6));
  ci = confidence_interval(0.3, 4.0, 0.0);
  CHECK(ci.lo == 0.3);
  CHECK(ci.hi == 0.3);
  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, 1.0), InferenceError);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(normal_p_value(1.959964) == doctest::Approx(0.05).epsilon(1e-5));
}

TEST_CASE("effects equal the transformed-weight sums") {
  const auto model = fitted(600, 40, false);
  Rng rng(21);
  const auto& columns = model.ensemble.columns;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> w(6);
    for (std::size_t j = 0; j < 6; ++j) {
      w[j] = synthetic::is_continuous(j) ? rng.normal() * 0.8 : static_cast<double>(rng.below(2));
    }
    const auto j = static_cast<std::size_t>(rng.below(6));
    const auto me = marginal_effect(model, j, w, 0.1);
    const double denom = contrast_points(columns[j], w[j], 0.1).denominator();
    for (int m = 1; m <= 3; ++m) {
      const auto alpha = me_weights(model, m, j, w, 0.1);
      double sum = 0.0, total = 0.0;
      for (std::size_t i = 0; i < alpha.size(); ++i) {
        total += alpha[i];
        if (model.ensemble.estimation_outcomes[i] == m) sum += alpha[i];
      }
      CHECK(std::abs(total) < 1e-12);
      CHECK(std::abs(sum / denom - me.effects[static_cast<std::size_t>(m - 1)]) < 1e-12);
    }
  }
}

TEST_CASE("normalized effects sum to zero across classes") {
  const auto model = fitted(600, 40, true);
  const auto points = testing::random_points(20, 6, 9);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto w = std::vector<double>(points.row(i).begin(), points.row(i).end());
    for (std::size_t j = 0; j < 6; ++j) w[j] = j % 2 ? (w[j] > 0 ? 1.0 : 0.0) : 0.5 * w[j];
    for (std::size_t j = 0; j < 6; ++j) {
      const auto me = marginal_effect(model, j, w, 0.1);
      CHECK(std::abs(std::accumulate(me.effects.begin(), me.effects.end(), 0.0)) < 1e-10);
    }
  }
}

TEST_CASE("se does not depend on honest-row order") {
  const std::vector<double> x{0.1, -0.3, 0.25, 0.0, 0.05};
  std::vector<double> y(x.rbegin(), x.rend());
  CHECK(honest_variance(x) == doctest::Approx(honest_variance(y)).epsilon(1e-14));
}

TEST_CASE("marginal effects table") {
  const auto model = fitted(800, 30, true);
  const auto data = testing::design_sample(800, 3);
  const auto w = evaluation_point(data, PointKind::mean);
  const auto table = marginal_effects(model, w, "mean", 0.1, 0.95);
  CHECK(table.rows.size() == 18);
  CHECK(table.evaluated_at == "mean");
  for (const auto& r : table.rows) {
    CHECK(r.se >= 0.0);
    CHECK(r.ci.hi - r.effect == doctest::Approx(1.959964 * r.se).epsilon(1e-6));
    CHECK(r.covariate == model.ensemble.columns[r.j].name);
  }
  std::ostringstream out;
  write_margins(out, table);
  const auto text = out.str();
  CHECK(text.rfind("covariate,class,effect,se,z,p_value,ci_lo,ci_hi,eval_up,eval_down\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 19);
}

TEST_CASE("average marginal effects") {
  const auto model = fitted(500, 20, true);
  const auto points = testing::random_points(15, 6, 4);
  const auto rows = average_marginal_effects(model, points, 0.1, 2);
  CHECK(rows.size() == 18);
  // Mean over rows of single-point effects.
  double expected = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) expected += marginal_effect(model, 0, points.row(i), 0.1).effects[1];
  CHECK(rows[1].j == 0);
  CHECK(rows[1].m == 2);
  CHECK(rows[1].mean == doctest::Approx(expected / 15.0).epsilon(1e-12));
  std::ostringstream out;
  write_average_effects(out, rows);
  CHECK(out.str().rfind("covariate,class,mean_effect,median_effect\n", 0) == 0);
}

}  // TEST_SUITE
