#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "helpers.hpp"
#include "ocf/dataset.hpp"

using testing::TempDir;

namespace {

struct Result {
  int status = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.status = ocf::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Simulated sample plus a fitted honest model in `dir`.
void prepare(const TempDir& dir) {
  REQUIRE(run({"simulate", "--design", "1", "--n", "400", "--seed", "3", "--threshold-draws", "20000", "--output",
               (dir / "d.csv").string()})
              .status == 0);
  REQUIRE(run({"--threads", "2", "fit", (dir / "d.csv").string(), "--outcome", "y", "--trees", "20", "--seed", "7",
               "--output", (dir / "m.json").string()})
              .status == 0);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate writes data and metadata") {
  TempDir dir("cli");
  const auto r = run({"simulate", "--design", "2", "--n", "150", "--seed", "9", "--threshold-draws", "20000",
                      "--output", (dir / "s.csv").string()});
  REQUIRE(r.status == 0);
  const auto data = ocf::load_csv(dir / "s.csv", "y");
  CHECK(data.n() == 150);
  CHECK(data.k() == 6);
  const auto meta = nlohmann::json::parse(testing::read_text(dir / "s.meta.json"));
  CHECK(meta["design"] == 2);
  CHECK(meta["seed"] == 9);
  CHECK(meta["thresholds"].size() == 2);
  CHECK(!std::filesystem::exists(dir / "s.csv.partial"));
}

TEST_CASE("fit, predict and inspect") {
  TempDir dir("cli");
  prepare(dir);
  auto r = run({"predict", (dir / "m.json").string(), (dir / "d.csv").string()});
  REQUIRE(r.status == 0);
  auto rows = lines(r.out);
  REQUIRE(rows.size() == 401);
  CHECK(rows[0] == "p1,p2,p3");
  const auto table = [&] {
    testing::write_text(dir / "p.csv", r.out);
    return ocf::read_csv_table(dir / "p.csv");
  }();
  for (std::size_t i = 0; i < table.values.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t m = 0; m < 3; ++m) sum += table.values(i, m);
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }

  // A second fit with the same seed and another thread count predicts identically.
  REQUIRE(run({"--threads", "1", "fit", (dir / "d.csv").string(), "--outcome", "y", "--trees", "20", "--seed", "7",
               "--output", (dir / "m2.json").string()})
              .status == 0);
  CHECK(run({"predict", (dir / "m2.json").string(), (dir / "d.csv").string()}).out == r.out);

  r = run({"predict", (dir / "m.json").string(), (dir / "d.csv").string(), "--se", "--output",
           (dir / "se.csv").string()});
  REQUIRE(r.status == 0);
  rows = lines(testing::read_text(dir / "se.csv"));
  CHECK(rows[0] == "p1,p2,p3,se1,se2,se3");
  CHECK(rows.size() == 401);

  r = run({"inspect", (dir / "m.json").string()});
  REQUIRE(r.status == 0);
  CHECK(r.out.find("W1") != std::string::npos);
  CHECK(r.out.find("honest") != std::string::npos);
}

TEST_CASE("predict names mismatched columns") {
  TempDir dir("cli");
  prepare(dir);
  testing::write_text(dir / "bad.csv", "W1,W2,W3,W4,W5,Z\n0,1,0,1,0,1\n");
  auto r = run({"predict", (dir / "m.json").string(), (dir / "bad.csv").string()});
  CHECK(r.status == 1);
  CHECK(r.err.find("'W6'") != std::string::npos);
  testing::write_text(dir / "extra.csv", "W1,W2,W3,W4,W5,W6,Z\n0,1,0,1,0,1,3\n");
  r = run({"predict", (dir / "m.json").string(), (dir / "extra.csv").string()});
  CHECK(r.status == 1);
  CHECK(r.err.find("'Z'") != std::string::npos);
}

TEST_CASE("adaptive models refuse standard errors") {
  TempDir dir("cli");
  prepare(dir);
  REQUIRE(run({"fit", (dir / "d.csv").string(), "--outcome", "y", "--trees", "5", "--honest-fraction", "0",
               "--output", (dir / "a.json").string()})
              .status == 0);
  const auto r = run({"predict", (dir / "a.json").string(), (dir / "d.csv").string(), "--se"});
  CHECK(r.status == 1);
  CHECK(r.err.find("variance requires honest fit") != std::string::npos);
  CHECK(run({"margins", (dir / "a.json").string()}).status == 1);
}

TEST_CASE("margins") {
  TempDir dir("cli");
  prepare(dir);
  auto r = run({"margins", (dir / "m.json").string(), "--at", "mean", "--level", "0.95"});
  REQUIRE(r.status == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 19);
  // columns: covariate, class, effect, se, z, p_value, ci_lo, ci_hi, eval_up, eval_down
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::vector<double> v;
    std::istringstream in(rows[i].substr(rows[i].find(',') + 1));
    for (std::string cell; std::getline(in, cell, ',');) v.push_back(std::stod(cell));
    REQUIRE(v.size() == 9);
    CHECK(v[6] - v[1] == doctest::Approx(1.959964 * v[2]).epsilon(1e-6));
  }

  r = run({"margins", (dir / "m.json").string(), "--at", "point", "--point", "0,1,0,0,0,1"});
  CHECK(r.status == 0);
  r = run({"margins", (dir / "m.json").string(), "--at", "point", "--point", "0,1"});
  CHECK(r.status != 0);
  r = run({"margins", (dir / "m.json").string(), "--average", (dir / "d.csv").string()});
  REQUIRE(r.status == 0);
  CHECK(lines(r.out).size() == 19);
}

TEST_CASE("usage errors and warnings") {
  TempDir dir("cli");
  prepare(dir);
  CHECK(run({"fit", (dir / "d.csv").string()}).status == 2);
  CHECK(run({"fit", (dir / "d.csv").string(), "--outcome", "y", "--bogus"}).status == 2);
  CHECK(run({"fit", (dir / "d.csv").string(), "--outcome", "y", "--trees", "0"}).status == 2);
  CHECK(run({"nonsense"}).status == 2);
  const auto r = run({"fit", (dir / "d.csv").string(), "--outcome", "y", "--trees", "3", "--alpha", "0.3",
                      "--output", (dir / "w.json").string()});
  CHECK(r.status == 0);
  CHECK(r.err.find("alpha exceeds 0.2 asymptotic requirement") != std::string::npos);
  CHECK(run({"fit", (dir / "missing.csv").string(), "--outcome", "y"}).status == 1);
  CHECK(run({"predict", (dir / "missing.json").string(), (dir / "d.csv").string()}).status == 1);
}

TEST_CASE("benchmark is deterministic") {
  TempDir dir("cli");
  std::vector<std::string> args{"benchmark", "--design", "1", "--n", "150", "--reps", "2", "--validation-n", "200",
                                "--threshold-draws", "20000", "--trees", "5", "--seed", "1", "--estimators",
                                "OCF_H,ORF"};
  auto first = args, second = args;
  first.insert(first.end(), {"--output", (dir / "a.json").string(), "--emit-svg", (dir / "svg").string()});
  second.insert(second.end(), {"--output", (dir / "b.json").string()});
  const auto r = run(first);
  REQUIRE(r.status == 0);
  CHECK(r.out.find("OCF_H") != std::string::npos);
  REQUIRE(run(second).status == 0);
  const auto a = nlohmann::json::parse(testing::read_text(dir / "a.json"));
  const auto b = nlohmann::json::parse(testing::read_text(dir / "b.json"));
  CHECK(a == b);
  CHECK(a["records"].size() == 6);
  CHECK(std::filesystem::exists(dir / "svg" / "monte_carlo_mse.svg"));
}

TEST_CASE("coverage and crossval") {
  TempDir dir("cli");
  prepare(dir);
  auto r = run({"coverage", "--design", "1", "--n", "200", "--reps", "2", "--threshold-draws", "20000", "--trees",
                "10", "--output", (dir / "c.json").string()});
  REQUIRE(r.status == 0);
  const auto cov = nlohmann::json::parse(testing::read_text(dir / "c.json"));
  CHECK(cov["records"].size() == 2);
  CHECK(r.out.find("median") != std::string::npos);

  r = run({"crossval", (dir / "d.csv").string(), "--outcome", "y", "--folds", "4", "--repeats", "2", "--trees", "5",
           "--estimators", "OCF_H,MRF", "--output", (dir / "cv.json").string()});
  REQUIRE(r.status == 0);
  const auto cv = nlohmann::json::parse(testing::read_text(dir / "cv.json"));
  CHECK(cv["records"].size() == 6);
  CHECK(cv["records"][0]["values"].size() == 8);
}

}  // TEST_SUITE
