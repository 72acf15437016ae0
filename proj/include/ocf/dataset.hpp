#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ocf {

/// Raised for malformed input data or violated dataset invariants.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const;
  const std::vector<double>& values() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class CovariateKind { continuous, discrete };

const char* to_string(CovariateKind kind);
CovariateKind covariate_kind_from_string(const std::string& text);

/// Per-column metadata. `mean` and `median` are kept so that evaluation
/// points can be rebuilt from a saved model without the original data.
struct ColumnMeta {
  std::string name;
  CovariateKind kind = CovariateKind::continuous;
  double observed_min = 0.0;
  double observed_max = 0.0;
  double std_dev = 0.0;
  double mean = 0.0;
  double median = 0.0;

  bool operator==(const ColumnMeta&) const = default;
};

inline constexpr std::size_t kDefaultMaxDiscreteLevels = 10;

/// Covariates plus ordered outcome labels in 1..n_classes.
struct Dataset {
  Matrix covariates;
  std::vector<int> outcome;
  int n_classes = 0;
  std::vector<ColumnMeta> columns;

  std::size_t n() const { return outcome.size(); }
  std::size_t k() const { return covariates.cols(); }

  /// Number of rows per class; index 0 holds class 1.
  std::vector<std::size_t> class_counts() const;

  /// Rows in `rows` order. Column metadata is copied, not recomputed.
  /// Throws DataError if a class 1..n_classes is absent from the subset.
  Dataset subset(std::span<const std::uint32_t> rows) const;
};

/// Builds a dataset, checks every invariant and infers column kinds.
/// n_classes defaults to the largest label; labels must then cover 1..M.
Dataset make_dataset(Matrix covariates, std::vector<int> outcome, std::vector<std::string> names = {},
                     std::optional<int> n_classes = std::nullopt,
                     std::size_t max_discrete_levels = kDefaultMaxDiscreteLevels);

/// Throws DataError when an invariant of `data` does not hold.
void validate(const Dataset& data);

/// Reads a comma-separated file with a header row. Every column except
/// `outcome_column` becomes a covariate.
Dataset load_csv(const std::filesystem::path& path, const std::string& outcome_column,
                 std::size_t max_discrete_levels = kDefaultMaxDiscreteLevels);

/// Raw numeric table from a CSV file: header names plus values.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};

CsvTable read_csv_table(const std::filesystem::path& path);

/// Writes covariates and the outcome (as the last column) to CSV.
void write_csv(const std::filesystem::path& path, const Dataset& data, const std::string& outcome_name = "y");

/// Fills kind, min, max, std_dev (n-1 denominator), mean and median of every
/// column. A column is discrete iff all values are integers and it has at most
/// `max_discrete_levels` distinct values.
void infer_kinds(Dataset& data, std::size_t max_discrete_levels = kDefaultMaxDiscreteLevels);

/// Training/honest partition of row indices, both sorted ascending.
struct HonestSplit {
  std::vector<std::uint32_t> train;
  std::vector<std::uint32_t> honest;

  bool operator==(const HonestSplit&) const = default;
};

inline constexpr int kHonestSplitAttempts = 100;

/// Random partition with |honest| = round(n * fraction), ties rounded toward
/// the honest side. Re-draws until every class appears on the honest side.
/// With `stratify`, each class is split separately (at least one honest row
/// per class), which keeps rare classes usable at the cost of exchangeability.
HonestSplit split_honest(const Dataset& data, double honest_fraction, std::uint64_t seed, bool stratify = false);

enum class PointKind { mean, median, custom };

/// Per-column mean or median of the covariates (discrete columns unrounded),
/// or a validated copy of `custom`.
std::vector<double> evaluation_point(const Dataset& data, PointKind kind, std::span<const double> custom = {});

/// Same, from stored column metadata.
std::vector<double> evaluation_point(std::span<const ColumnMeta> columns, PointKind kind,
                                     std::span<const double> custom = {});

double median_of(std::vector<double> values);

}  // namespace ocf
