#include "ocf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "ocf/rng.hpp"

namespace ocf {

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

const char* to_string(CovariateKind kind) {
  return kind == CovariateKind::discrete ? "discrete" : "continuous";
}

CovariateKind covariate_kind_from_string(const std::string& text) {
  if (text == "discrete") return CovariateKind::discrete;
  if (text == "continuous") return CovariateKind::continuous;
  throw DataError("unknown covariate kind '" + text + "'");
}

namespace {
void update_column_stats(Dataset& data);
}  // namespace

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(n_classes, 0)), 0);
  for (int y : outcome) {
    if (y >= 1 && y <= n_classes) ++counts[static_cast<std::size_t>(y - 1)];
  }
  return counts;
}

Dataset Dataset::subset(std::span<const std::uint32_t> rows) const {
  Dataset out;
  out.covariates = Matrix(rows.size(), k());
  out.outcome.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = covariates.row(rows[i]);
    std::copy(src.begin(), src.end(), out.covariates.row(i).begin());
    out.outcome[i] = outcome[rows[i]];
  }
  out.n_classes = n_classes;
  out.columns = columns;
  validate(out);
  update_column_stats(out);
  return out;
}

void validate(const Dataset& data) {
  if (data.n_classes < 2) throw DataError("at least two outcome classes are required");
  if (data.n() < 2) throw DataError("at least two rows are required");
  if (data.k() < 1) throw DataError("at least one covariate is required");
  if (data.covariates.rows() != data.n()) throw DataError("covariate rows do not match outcome length");
  if (data.columns.size() != data.k()) throw DataError("column metadata length does not match covariates");
  for (std::size_t i = 0; i < data.n(); ++i) {
    const int y = data.outcome[i];
    if (y < 1 || y > data.n_classes) {
      throw DataError("outcome " + std::to_string(y) + " in row " + std::to_string(i + 1) + " is outside 1.." +
                      std::to_string(data.n_classes));
    }
  }
  for (double v : data.covariates.values()) {
    if (!std::isfinite(v)) throw DataError("covariates contain a missing or non-finite value");
  }
  const auto counts = data.class_counts();
  for (std::size_t m = 0; m < counts.size(); ++m) {
    if (counts[m] == 0) throw DataError("class " + std::to_string(m + 1) + " absent");
  }
}

Dataset make_dataset(Matrix covariates, std::vector<int> outcome, std::vector<std::string> names,
                     std::optional<int> n_classes, std::size_t max_discrete_levels) {
  Dataset data;
  data.covariates = std::move(covariates);
  data.outcome = std::move(outcome);
  data.n_classes = n_classes.value_or(
      data.outcome.empty() ? 0 : *std::max_element(data.outcome.begin(), data.outcome.end()));
  if (names.empty()) {
    for (std::size_t j = 0; j < data.k(); ++j) names.push_back("x" + std::to_string(j + 1));
  }
  if (names.size() != data.k()) throw DataError("column name count does not match covariates");
  data.columns.resize(data.k());
  for (std::size_t j = 0; j < data.k(); ++j) data.columns[j].name = std::move(names[j]);
  validate(data);
  infer_kinds(data, max_discrete_levels);
  return data;
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

namespace {

// Fills min, max, std_dev, mean and median; leaves kind untouched.
void update_column_stats(Dataset& data) {
  const std::size_t n = data.n();
  for (std::size_t j = 0; j < data.k(); ++j) {
    auto values = data.covariates.column(j);
    auto& meta = data.columns[j];
    if (n == 0) continue;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    meta.observed_min = *lo;
    meta.observed_max = *hi;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    meta.mean = mean;
    meta.std_dev = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    meta.median = median_of(std::move(values));
  }
}

}  // namespace

void infer_kinds(Dataset& data, std::size_t max_discrete_levels) {
  update_column_stats(data);
  for (std::size_t j = 0; j < data.k(); ++j) {
    auto values = data.covariates.column(j);
    const bool integral = std::all_of(values.begin(), values.end(), [](double v) { return v == std::floor(v); });
    std::sort(values.begin(), values.end());
    const auto levels = static_cast<std::size_t>(std::unique(values.begin(), values.end()) - values.begin());
    data.columns[j].kind =
        integral && levels <= max_discrete_levels ? CovariateKind::discrete : CovariateKind::continuous;
  }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

double parse_cell(const std::string& raw, std::size_t line_no, const std::string& column) {
  const std::string cell = trim(raw);
  const auto where = [&] { return " at line " + std::to_string(line_no) + ", column '" + column + "'"; };
  if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") throw DataError("missing value" + where());
  double value = 0.0;
  const char* first = cell.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    throw DataError("non-numeric value '" + cell + "'" + where());
  }
  return value;
}

}  // namespace

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("file '" + path.string() + "' is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  CsvTable table;
  for (auto& name : split_line(line)) table.header.push_back(trim(name));
  const std::size_t cols = table.header.size();

  std::vector<double> values;
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != cols) {
      throw DataError("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) values.push_back(parse_cell(cells[c], line_no, table.header[c]));
    ++rows;
  }
  table.values = Matrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) table.values(r, c) = values[r * cols + c];
  }
  return table;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& outcome_column,
                 std::size_t max_discrete_levels) {
  if (!std::filesystem::exists(path)) throw DataError("file '" + path.string() + "' does not exist");
  auto table = read_csv_table(path);
  const auto it = std::find(table.header.begin(), table.header.end(), outcome_column);
  if (it == table.header.end()) throw DataError("outcome column '" + outcome_column + "' not found");
  const auto y_col = static_cast<std::size_t>(it - table.header.begin());
  const std::size_t n = table.values.rows();
  const std::size_t k = table.header.size() - 1;

  std::vector<int> outcome(n);
  std::set<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = table.values(i, y_col);
    if (y != std::floor(y) || y < 1) {
      throw DataError("outcome in row " + std::to_string(i + 1) + " is not a positive integer");
    }
    outcome[i] = static_cast<int>(y);
    labels.insert(outcome[i]);
  }
  const int max_label = labels.empty() ? 0 : *labels.rbegin();
  for (int m = 1; m <= max_label; ++m) {
    if (!labels.count(m)) throw DataError("class " + std::to_string(m) + " absent");
  }

  Matrix covariates(n, k);
  std::vector<std::string> names;
  for (std::size_t c = 0, j = 0; c < table.header.size(); ++c) {
    if (c == y_col) continue;
    names.push_back(table.header[c]);
    for (std::size_t i = 0; i < n; ++i) covariates(i, j) = table.values(i, c);
    ++j;
  }
  return make_dataset(std::move(covariates), std::move(outcome), std::move(names), max_label, max_discrete_levels);
}

void write_csv(const std::filesystem::path& path, const Dataset& data, const std::string& outcome_name) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file '" + path.string() + "'");
  for (const auto& col : data.columns) out << col.name << ',';
  out << outcome_name << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (double v : data.covariates.row(i)) out << v << ',';
    out << data.outcome[i] << '\n';
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

namespace {

bool honest_has_all_classes(const Dataset& data, std::span<const std::uint32_t> honest) {
  std::vector<bool> seen(static_cast<std::size_t>(data.n_classes), false);
  for (auto i : honest) seen[static_cast<std::size_t>(data.outcome[i] - 1)] = true;
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

}  // namespace

HonestSplit split_honest(const Dataset& data, double honest_fraction, std::uint64_t seed, bool stratify) {
  if (!(honest_fraction > 0.0 && honest_fraction < 1.0)) {
    throw DataError("honest fraction must lie in (0, 1)");
  }
  const std::size_t n = data.n();
  if (static_cast<double>(n) * honest_fraction < static_cast<double>(data.n_classes)) {
    throw DataError("honest sample would be smaller than the number of classes");
  }
  const auto n_honest = static_cast<std::size_t>(std::floor(static_cast<double>(n) * honest_fraction + 0.5));
  if (n_honest == 0 || n_honest >= n) throw DataError("honest fraction leaves one side of the split empty");

  Rng rng(seed);
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0U);

  HonestSplit split;
  if (stratify) {
    std::vector<std::vector<std::uint32_t>> by_class(static_cast<std::size_t>(data.n_classes));
    for (std::uint32_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(data.outcome[i] - 1)].push_back(i);
    for (auto& rows : by_class) {
      rng.shuffle(std::span(rows));
      auto take = static_cast<std::size_t>(std::floor(static_cast<double>(rows.size()) * honest_fraction + 0.5));
      take = std::clamp<std::size_t>(take, 1, rows.size());
      split.honest.insert(split.honest.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take));
      split.train.insert(split.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(take), rows.end());
    }
    if (split.train.empty()) throw DataError("stratified split leaves the training side empty");
  } else {
    bool ok = false;
    for (int attempt = 0; attempt < kHonestSplitAttempts && !ok; ++attempt) {
      rng.shuffle(std::span(order));
      ok = honest_has_all_classes(data, std::span(order).first(n_honest));
    }
    if (!ok) {
      throw DataError("could not place every class in the honest sample after " +
                      std::to_string(kHonestSplitAttempts) + " attempts; consider stratified splitting");
    }
    split.honest.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_honest));
    split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_honest), order.end());
  }
  std::sort(split.honest.begin(), split.honest.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

std::vector<double> evaluation_point(const Dataset& data, PointKind kind, std::span<const double> custom) {
  if (data.n() == 0) throw DataError("dataset is empty");
  if (kind == PointKind::custom) return evaluation_point(std::span<const ColumnMeta>(data.columns), kind, custom);
  std::vector<double> point(data.k());
  for (std::size_t j = 0; j < data.k(); ++j) {
    auto values = data.covariates.column(j);
    point[j] = kind == PointKind::mean
                   ? std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size())
                   : median_of(std::move(values));
  }
  return point;
}

std::vector<double> evaluation_point(std::span<const ColumnMeta> columns, PointKind kind,
                                     std::span<const double> custom) {
  if (kind == PointKind::custom) {
    if (custom.size() != columns.size()) {
      throw DataError("evaluation point has " + std::to_string(custom.size()) + " entries, expected " +
                      std::to_string(columns.size()));
    }
    return {custom.begin(), custom.end()};
  }
  std::vector<double> point;
  for (const auto& c : columns) point.push_back(kind == PointKind::mean ? c.mean : c.median);
  return point;
}

}  // namespace ocf
