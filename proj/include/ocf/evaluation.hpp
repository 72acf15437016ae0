#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ocf/dataset.hpp"
#include "ocf/forest.hpp"
#include "ocf/synthetic.hpp"

namespace ocf {

struct Metrics {
  double mse = 0.0;
  double mae = 0.0;
  double rps = 0.0;
};

/// Accuracy against known probabilities. Rows of both matrices must lie on
/// the simplex within 1e-6.
Metrics metrics_synthetic(const Matrix& truth, const Matrix& estimate);

/// Accuracy against observed labels (indicator targets in place of the truth).
Metrics metrics_observed(std::span<const int> outcomes, const Matrix& estimate);

enum class EstimatorId { ocf_honest, ocf_adaptive, mrf, orf, mrf_honest, orf_honest, external };

/// An estimator in a comparison. External estimators read precomputed
/// probabilities from files named by `path_template`, whose placeholders
/// ({design}, {n}, {rep} or {repeat}, {fold}) are filled per run.
struct EstimatorSpec {
  std::string name;
  EstimatorId id = EstimatorId::ocf_honest;
  std::string path_template;
};

/// "OCF_H", "OCF_A", "MRF", "ORF", "MRF_H", "ORF_H" or "NAME=path-template".
EstimatorSpec parse_estimator(const std::string& text);
std::vector<EstimatorSpec> parse_estimators(const std::string& comma_separated);

/// Fits a built-in estimator on `train` and returns probabilities at `points`.
/// Honest variants use params.honest_fraction (0.5 when it is zero), adaptive
/// variants force it to zero.
Matrix fit_predict(const EstimatorSpec& spec, const Dataset& train, const Matrix& points, ForestParams params,
                   std::size_t threads = 1);

/// Replaces every {key} in `text`.
std::string expand_template(std::string text, const std::map<std::string, std::string>& values);

/// Reads an external prediction file: header line, `rows` rows of
/// `n_classes` probabilities, each on the simplex within 1e-6.
Matrix read_prediction_file(const std::filesystem::path& path, std::size_t rows, int n_classes);

struct Failure {
  std::size_t id = 0;  // replication, or repeat * folds + fold
  std::string message;
};

/// Metric values of one estimator in one scenario, one entry per successful
/// replication or fold.
struct CellResult {
  nlohmann::json scenario;  // e.g. {"design": 1, "n": 1000}
  std::string estimator;
  std::vector<std::size_t> ids;
  std::vector<Metrics> values;
  std::vector<Failure> failures;

  Metrics mean() const;
};

struct MetricReport {
  std::string kind;  // "monte_carlo" or "crossval"
  nlohmann::json settings;
  std::vector<CellResult> cells;

  const CellResult* find(const std::string& estimator, const nlohmann::json& scenario) const;
};

struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

/// Five-number summary with linearly interpolated quartiles.
BoxStats box_stats(std::vector<double> values);

struct MonteCarloConfig {
  std::vector<int> designs{1};
  std::vector<std::size_t> sample_sizes{1000};
  std::vector<EstimatorSpec> estimators;
  std::size_t replications = 100;
  std::size_t replication_offset = 0;  // first replication index, for splitting runs
  std::size_t validation_n = 10'000;
  std::size_t threshold_draws = synthetic::kThresholdDraws;
  std::uint64_t seed = 1;
  ForestParams params;
  std::size_t threads = 0;
  std::optional<std::filesystem::path> export_dir;  // writes validation and training samples
};

/// Per scenario (design x n): one validation sample with oracle truths, then
/// for every replication a fresh training sample on which each estimator is
/// fitted and scored. Replication r always uses the same substreams, so runs
/// with different offsets can be pooled.
MetricReport monte_carlo(const MonteCarloConfig& config);

struct EffectSummary {
  std::size_t j = 0;
  int m = 1;
  double squared_bias = 0.0;
  double variance = 0.0;
  double coverage = 0.0;
};

struct CoverageCell {
  int design = 1;
  std::size_t n = 0;
  std::string point;  // "mean" or "median"
  std::size_t replications = 0;  // successful ones
  double squared_bias = 0.0;     // averaged over effects
  double variance = 0.0;
  double coverage = 0.0;
  std::vector<EffectSummary> effects;
  std::vector<Failure> failures;
};

struct CoverageReport {
  nlohmann::json settings;
  std::vector<CoverageCell> cells;

  const CoverageCell* find(std::size_t n, const std::string& point) const;
};

struct CoverageConfig {
  int design = 1;
  std::vector<std::size_t> sample_sizes{500};
  std::size_t replications = 100;
  std::size_t replication_offset = 0;
  std::size_t threshold_draws = synthetic::kThresholdDraws;
  std::uint64_t seed = 1;
  ForestParams params;  // honest_fraction 0 is replaced by 0.5
  double level = 0.95;
  std::size_t threads = 0;
};

/// Per replication: simulate, fit an honest forest, estimate every marginal
/// effect with its interval at the sample mean and median, and compare with
/// the exact effect (for discrete covariates the exact contrast between the
/// same two values the estimator used).
CoverageReport coverage_study(const CoverageConfig& config);

struct CrossValConfig {
  std::size_t folds = 10;
  std::size_t repeats = 10;
  std::vector<EstimatorSpec> estimators;
  std::uint64_t seed = 1;
  ForestParams params;
  std::size_t threads = 0;
  std::string label = "data";
  std::optional<std::filesystem::path> export_dir;  // writes the fold assignments
};

/// Fold index of every row: a shuffled permutation cut into `folds` chunks
/// whose sizes differ by at most one (the first n % folds are larger).
std::vector<std::uint32_t> assign_folds(std::size_t n, std::size_t folds, std::uint64_t seed);

/// Repeated k-fold cross-validation scored against the held-out labels.
/// Partitions are re-drawn (up to 100 times) until every training complement
/// contains all classes.
MetricReport cross_validate(const Dataset& data, const CrossValConfig& config);

/// One record per scenario x estimator x metric.
nlohmann::json report_to_json(const MetricReport& report);
nlohmann::json report_to_json(const CoverageReport& report);

void write_table(std::ostream& out, const MetricReport& report);
void write_table(std::ostream& out, const CoverageReport& report);

/// One box-plot SVG per scenario and metric. Returns the files written.
std::vector<std::filesystem::path> write_svg_boxplots(const std::filesystem::path& dir, const MetricReport& report);

}  // namespace ocf
