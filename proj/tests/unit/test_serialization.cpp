#include <doctest.h>

#include "helpers.hpp"
#include "ocf/baselines.hpp"
#include "ocf/inference.hpp"
#include "ocf/serialization.hpp"

using namespace ocf;
using testing::TempDir;

namespace {

void check_same_ensemble(const ForestEnsemble& a, const ForestEnsemble& b) {
  CHECK(a.kind == b.kind);
  CHECK(a.params == b.params);
  CHECK(a.n_classes == b.n_classes);
  CHECK(a.columns == b.columns);
  CHECK(a.split == b.split);
  CHECK(a.estimation_rows == b.estimation_rows);
  CHECK(a.estimation_outcomes == b.estimation_outcomes);
  REQUIRE(a.forests.size() == b.forests.size());
  for (std::size_t f = 0; f < a.forests.size(); ++f) {
    CHECK(a.forests[f].target == b.forests[f].target);
    REQUIRE(a.forests[f].trees.size() == b.forests[f].trees.size());
    for (std::size_t t = 0; t < a.forests[f].trees.size(); ++t) {
      const auto &x = a.forests[f].trees[t], &y = b.forests[f].trees[t];
      CHECK(x.rows == y.rows);
      CHECK(x.grown_on == y.grown_on);
      REQUIRE(x.nodes.size() == y.nodes.size());
      for (std::size_t i = 0; i < x.nodes.size(); ++i) {
        CHECK(x.nodes[i].threshold == y.nodes[i].threshold);
        CHECK(x.nodes[i].positives == y.nodes[i].positives);
        CHECK(x.nodes[i].value_node == y.nodes[i].value_node);
        CHECK(x.nodes[i].parent == y.nodes[i].parent);
      }
    }
  }
}

}  // namespace

TEST_SUITE("serialization") {

TEST_CASE("honest and adaptive forests round trip") {
  TempDir dir("model");
  const auto data = testing::design_sample(300, 5);
  for (double honest : {0.5, 0.0}) {
    auto params = testing::small_params(6);
    params.honest_fraction = honest;
    params.alpha = 0.1;
    const auto model = fit(data, params, 1);
    save_model(dir / "m.json", model.ensemble);
    const OcfModel back{load_model(dir / "m.json")};
    check_same_ensemble(model.ensemble, back.ensemble);
    const auto points = testing::random_points(30, 6, 1);
    CHECK(predict(model, points) == predict(back, points));
    if (honest > 0.0) {
      const std::vector<double> w(6, 0.2);
      CHECK(variance_probability(model, 2, w).se == variance_probability(back, 2, w).se);
    }
  }
}

TEST_CASE("baselines round trip") {
  TempDir dir("model");
  const auto data = testing::design_sample(300, 6);
  for (auto kind : {BaselineKind::multinomial, BaselineKind::ordered_cumulative}) {
    const auto model = fit_baseline(data, kind, testing::small_params(5), 1);
    save_model(dir / "b.json", model.ensemble);
    const BaselineModel back{kind, load_model(dir / "b.json")};
    check_same_ensemble(model.ensemble, back.ensemble);
    const auto points = testing::random_points(20, 6, 2);
    CHECK(predict_baseline(model, points) == predict_baseline(back, points));
  }
}

TEST_CASE("params json") {
  ForestParams p;
  p.n_trees = 7;
  p.mtry = 2;
  p.omega = 0.25;
  p.stratify_honest = true;
  p.seed = 0xFFFFFFFFFFFFFFFFULL;
  CHECK(params_from_json(params_to_json(p)) == p);
}

TEST_CASE("malformed model files") {
  TempDir dir("model");
  const auto data = testing::design_sample(200, 7);
  const auto model = fit(data, testing::small_params(3), 1);
  auto doc = model_to_json(model.ensemble);
  CHECK(doc["format"] == "ocf-model");
  CHECK(doc["version"] == kModelFormatVersion);

  auto future = doc;
  future["version"] = kModelFormatVersion + 1;
  CHECK_THROWS_WITH_AS(model_from_json(future), doctest::Contains("version"), ModelFormatError);

  auto wrong = doc;
  wrong["format"] = "something-else";
  CHECK_THROWS_AS(model_from_json(wrong), ModelFormatError);

  auto broken = doc;
  broken["forests"][0]["trees"][0]["left"][0] = 100000;
  CHECK_THROWS_AS(model_from_json(broken), ModelFormatError);

  auto missing = doc;
  missing.erase("columns");
  CHECK_THROWS_AS(model_from_json(missing), ModelFormatError);

  auto kind = doc;
  kind["columns"][0]["kind"] = "categorical";
  CHECK_THROWS_AS(model_from_json(kind), ModelFormatError);

  testing::write_text(dir / "junk.json", "{not json");
  CHECK_THROWS_AS(load_model(dir / "junk.json"), ModelFormatError);
  CHECK_THROWS_AS(load_model(dir / "absent.json"), ModelFormatError);
}

}  // TEST_SUITE
