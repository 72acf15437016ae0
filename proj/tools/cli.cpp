#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "ocf/baselines.hpp"
#include "ocf/evaluation.hpp"
#include "ocf/inference.hpp"
#include "ocf/serialization.hpp"
#include "ocf/synthetic.hpp"

namespace ocf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;
constexpr std::uint64_t kSimulateThresholdStream = 0x5448'5245'53ULL;

// Writes through a temporary file so an interrupted run never leaves a
// truncated artifact under the requested name.
void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    body(f);
    f.close();
    if (!f) {
      fs::remove(tmp);
      throw DataError("failed writing " + path.string());
    }
  }
  fs::rename(tmp, path);
}

// Writes to `path`, or to `out` when no path was given.
void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (path.empty() || path == "-") {
    body(out);
  } else {
    write_file(path, body);
  }
}

void add_forest_options(CLI::App* cmd, ForestParams& p) {
  cmd->add_option("--trees", p.n_trees, "Trees per class forest")->capture_default_str();
  cmd->add_option("--subsample", p.subsample_fraction, "Subsample fraction per tree")->capture_default_str();
  cmd->add_option("--mtry", p.mtry, "Covariates tried per split (0 = ceil(sqrt(k)))")->capture_default_str();
  cmd->add_option("--alpha", p.alpha, "Minimum child fraction per split")->capture_default_str();
  cmd->add_option("--min-leaf", p.min_leaf, "Minimum leaf size")->capture_default_str();
  cmd->add_option("--honest-fraction", p.honest_fraction, "Honest sample share (0 = adaptive)")
      ->capture_default_str();
  cmd->add_option("--omega", p.omega, "Finite-difference step in standard deviations")->capture_default_str();
  cmd->add_flag("--no-normalize{false}", p.normalize, "Do not rescale class probabilities to sum to one");
  cmd->add_flag("--stratify-honest", p.stratify_honest, "Split the honest sample within each class");
}

void check_params(const ForestParams& p, std::size_t k, std::ostream& err) {
  for (const auto& w : p.validate(k)) err << "warning: " << w << '\n';
}

struct LoadedModel {
  ForestEnsemble ensemble;
  std::string outcome_column;
};

LoadedModel read_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError("cannot open model file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ModelFormatError("model file " + path.string() + " is not valid JSON: " + e.what());
  }
  return {model_from_json(doc), doc.value("outcome_column", std::string())};
}

// Covariate matrix of a CSV file arranged in the model's column order.
Matrix covariates_for(const ForestEnsemble& model, const fs::path& path, const std::string& ignore) {
  const auto table = read_csv_table(path);
  std::vector<std::size_t> source;
  for (const auto& column : model.columns) {
    const auto it = std::find(table.header.begin(), table.header.end(), column.name);
    if (it == table.header.end()) throw DataError("column '" + column.name + "' missing from " + path.string());
    source.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }
  for (const auto& name : table.header) {
    const bool known = std::any_of(model.columns.begin(), model.columns.end(),
                                   [&](const ColumnMeta& c) { return c.name == name; });
    if (!known && name != ignore) throw DataError("column '" + name + "' is not a model covariate");
  }
  Matrix out(table.values.rows(), source.size());
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < source.size(); ++j) out(i, j) = table.values(i, source[j]);
  }
  return out;
}

EstimatorKind parse_fit_estimator(const std::string& text) {
  if (text == "ocf" || text == "OCF") return EstimatorKind::ocf;
  if (text == "multinomial" || text == "MRF") return EstimatorKind::multinomial;
  if (text == "ordered" || text == "ordered_cumulative" || text == "ORF") return EstimatorKind::ordered_cumulative;
  throw ParamError("unknown estimator '" + text + "' (expected ocf, multinomial or ordered)");
}

void print_split(const ForestEnsemble& model, std::size_t n, std::ostream& out) {
  if (model.honest()) {
    out << "honest split: " << model.split.train.size() << " training rows, " << model.split.honest.size()
        << " honest rows\n";
  } else {
    out << "adaptive fit: all " << n << " rows used for splitting and leaf values\n";
  }
}

std::string forest_label(const ForestTarget& t) {
  switch (t.kind) {
    case TargetKind::ordered_class: return "class " + std::to_string(t.m);
    case TargetKind::class_indicator: return "1(Y=" + std::to_string(t.m) + ")";
    case TargetKind::cumulative: return "1(Y<=" + std::to_string(t.m) + ")";
  }
  return "";
}

// ---- subcommands ----

struct FitArgs {
  std::string data, outcome, output = "model.json", estimator = "ocf";
  std::size_t max_levels = kDefaultMaxDiscreteLevels;
  ForestParams params;
};

void cmd_fit(const FitArgs& a, std::size_t threads, std::ostream& out, std::ostream& err) {
  const auto data = load_csv(a.data, a.outcome, a.max_levels);
  check_params(a.params, data.k(), err);
  const auto kind = parse_fit_estimator(a.estimator);
  ForestEnsemble model = kind == EstimatorKind::ocf
                             ? fit(data, a.params, threads).ensemble
                             : fit_baseline(data, baseline_kind(kind), a.params, threads).ensemble;
  json doc = model_to_json(model);
  doc["outcome_column"] = a.outcome;
  write_file(a.output, [&](std::ostream& f) { f << doc.dump(); });

  out << "fitted " << to_string(kind) << " on " << data.n() << " rows, " << data.k() << " covariates, "
      << data.n_classes << " classes\n";
  print_split(model, data.n(), out);
  for (const auto& forest : model.forests) {
    out << "  forest " << forest_label(forest.target) << ": " << forest.trees.size() << " trees\n";
  }
  out << "model written to " << a.output << '\n';
}

struct PredictArgs {
  std::string model, data, output, outcome;
  bool se = false;
};

void cmd_predict(const PredictArgs& a, std::size_t threads, std::ostream& out) {
  const auto loaded = read_model(a.model);
  const auto& ensemble = loaded.ensemble;
  const std::string ignore = a.outcome.empty() ? loaded.outcome_column : a.outcome;
  const Matrix points = covariates_for(ensemble, a.data, ignore);
  const auto M = static_cast<std::size_t>(ensemble.n_classes);

  Matrix probs;
  if (ensemble.kind == EstimatorKind::ocf) {
    probs = predict(OcfModel{ensemble}, points, threads);
  } else {
    probs = predict_baseline(BaselineModel{baseline_kind(ensemble.kind), ensemble}, points, threads);
  }
  Matrix se;
  if (a.se) {
    if (ensemble.kind != EstimatorKind::ocf) throw InferenceError("standard errors require an ocf model");
    if (!ensemble.honest()) throw InferenceError("variance requires honest fit");
    const OcfModel model{ensemble};
    se = Matrix(points.rows(), M);
    for (std::size_t i = 0; i < points.rows(); ++i) {
      for (std::size_t m = 0; m < M; ++m) se(i, m) = variance_probability(model, static_cast<int>(m + 1), points.row(i)).se;
    }
  }
  emit(a.output, out, [&](std::ostream& f) {
    for (std::size_t m = 1; m <= M; ++m) f << (m > 1 ? "," : "") << 'p' << m;
    if (a.se) {
      for (std::size_t m = 1; m <= M; ++m) f << ",se" << m;
    }
    f << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < probs.rows(); ++i) {
      for (std::size_t m = 0; m < M; ++m) f << (m ? "," : "") << probs(i, m);
      if (a.se) {
        for (std::size_t m = 0; m < M; ++m) f << ',' << se(i, m);
      }
      f << '\n';
    }
  });
}

struct MarginsArgs {
  std::string model, at = "mean", output, average;
  std::vector<double> point;
  std::optional<double> omega;
  double level = 0.95;
};

void cmd_margins(const MarginsArgs& a, std::size_t threads, std::ostream& out) {
  const auto loaded = read_model(a.model);
  if (loaded.ensemble.kind != EstimatorKind::ocf) throw InferenceError("marginal effects require an ocf model");
  const double omega = a.omega.value_or(loaded.ensemble.params.omega);
  if (!(omega > 0.0)) throw ParamError("omega must be positive");
  const OcfModel model{loaded.ensemble};
  if (!a.average.empty()) {
    // Effects averaged over the rows of a data file; no standard errors.
    const Matrix points = covariates_for(loaded.ensemble, a.average, loaded.outcome_column);
    const auto rows = average_marginal_effects(model, points, omega, threads);
    emit(a.output, out, [&](std::ostream& f) { write_average_effects(f, rows); });
    return;
  }
  if (!loaded.ensemble.honest()) throw InferenceError("variance requires honest fit");
  PointKind kind = PointKind::mean;
  if (a.at == "median") {
    kind = PointKind::median;
  } else if (a.at == "point") {
    if (a.point.empty()) throw ParamError("--at point needs --point");
    kind = PointKind::custom;
  }
  if (kind != PointKind::custom && !a.point.empty()) throw ParamError("--point is only used with --at point");
  const auto w = evaluation_point(loaded.ensemble.columns, kind, a.point);
  const auto table = marginal_effects(model, w, a.at, omega, a.level);
  emit(a.output, out, [&](std::ostream& f) { write_margins(f, table); });
}

struct SimulateArgs {
  int design = 1;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::size_t threshold_draws = synthetic::kThresholdDraws;
  std::string output;
};

void cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const auto design = synthetic::design_from_int(a.design);
  const auto thresholds = synthetic::compute_thresholds(
      design, derive_seed(a.seed, {kSimulateThresholdStream, static_cast<std::uint64_t>(a.design)}), a.threshold_draws);
  const auto data = synthetic::simulate_sample(design, thresholds, a.n, a.seed);
  write_file(a.output, [&](std::ostream& f) {
    f << std::setprecision(17);
    for (const auto& c : data.columns) f << c.name << ',';
    f << "y\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
      for (double v : data.covariates.row(i)) f << v << ',';
      f << data.outcome[i] << '\n';
    }
  });
  fs::path meta = a.output;
  meta.replace_extension(".meta.json");
  const json doc = {{"design", a.design},
                    {"n", a.n},
                    {"seed", a.seed},
                    {"threshold_draws", a.threshold_draws},
                    {"thresholds", {thresholds.zeta1, thresholds.zeta2}},
                    {"beta", synthetic::kBeta},
                    {"outcome_column", "y"},
                    {"class_counts", data.class_counts()}};
  write_file(meta, [&](std::ostream& f) { f << doc.dump(2) << '\n'; });
  out << "wrote " << a.n << " rows to " << a.output << " (thresholds " << thresholds.zeta1 << ", " << thresholds.zeta2
      << ")\n";
}

struct ReportArgs {
  std::string output, table, svg_dir, export_dir;
};

void add_report_options(CLI::App* cmd, ReportArgs& r, bool svg) {
  cmd->add_option("--output", r.output, "JSON report file");
  cmd->add_option("--table", r.table, "Text table file (default: standard output)");
  if (svg) cmd->add_option("--emit-svg", r.svg_dir, "Directory for box-plot SVGs");
}

void finish_report(const ReportArgs& r, const json& doc, const std::function<void(std::ostream&)>& table,
                   std::ostream& out) {
  if (!r.output.empty()) write_file(r.output, [&](std::ostream& f) { f << doc.dump(2) << '\n'; });
  emit(r.table, out, table);
}

struct BenchmarkArgs {
  std::vector<int> designs{1};
  std::vector<std::size_t> sizes{1000};
  std::size_t reps = 100, offset = 0, validation_n = 10'000;
  std::size_t threshold_draws = synthetic::kThresholdDraws;
  std::uint64_t seed = 1;
  std::string estimators = "OCF_H,OCF_A,MRF,ORF";
  ForestParams params;
  ReportArgs report;
};

void cmd_benchmark(const BenchmarkArgs& a, std::size_t threads, std::ostream& out, std::ostream& err) {
  MonteCarloConfig config;
  config.designs = a.designs;
  config.sample_sizes = a.sizes;
  config.estimators = parse_estimators(a.estimators);
  config.replications = a.reps;
  config.replication_offset = a.offset;
  config.validation_n = a.validation_n;
  config.threshold_draws = a.threshold_draws;
  config.seed = a.seed;
  config.params = a.params;
  config.threads = threads;
  if (!a.report.export_dir.empty()) config.export_dir = a.report.export_dir;
  check_params(a.params, synthetic::kCovariates, err);
  const auto report = monte_carlo(config);
  finish_report(a.report, report_to_json(report), [&](std::ostream& f) { write_table(f, report); }, out);
  if (!a.report.svg_dir.empty()) write_svg_boxplots(a.report.svg_dir, report);
}

struct CoverageArgs {
  int design = 1;
  std::vector<std::size_t> sizes{500};
  std::size_t reps = 100, offset = 0;
  std::size_t threshold_draws = synthetic::kThresholdDraws;
  std::uint64_t seed = 1;
  double level = 0.95;
  ForestParams params;
  ReportArgs report;
};

void cmd_coverage(const CoverageArgs& a, std::size_t threads, std::ostream& out, std::ostream& err) {
  CoverageConfig config;
  config.design = a.design;
  config.sample_sizes = a.sizes;
  config.replications = a.reps;
  config.replication_offset = a.offset;
  config.threshold_draws = a.threshold_draws;
  config.seed = a.seed;
  config.level = a.level;
  config.params = a.params;
  config.threads = threads;
  check_params(a.params, synthetic::kCovariates, err);
  const auto report = coverage_study(config);
  finish_report(a.report, report_to_json(report), [&](std::ostream& f) { write_table(f, report); }, out);
}

struct CrossvalArgs {
  std::string data, outcome;
  std::size_t folds = 10, repeats = 10;
  std::size_t max_levels = kDefaultMaxDiscreteLevels;
  std::uint64_t seed = 1;
  std::string estimators = "OCF_H,OCF_A,MRF,ORF";
  ForestParams params;
  ReportArgs report;
};

void cmd_crossval(const CrossvalArgs& a, std::size_t threads, std::ostream& out, std::ostream& err) {
  const auto data = load_csv(a.data, a.outcome, a.max_levels);
  CrossValConfig config;
  config.folds = a.folds;
  config.repeats = a.repeats;
  config.estimators = parse_estimators(a.estimators);
  config.seed = a.seed;
  config.params = a.params;
  config.threads = threads;
  config.label = fs::path(a.data).stem().string();
  if (!a.report.export_dir.empty()) config.export_dir = a.report.export_dir;
  check_params(a.params, data.k(), err);
  const auto report = cross_validate(data, config);
  finish_report(a.report, report_to_json(report), [&](std::ostream& f) { write_table(f, report); }, out);
  if (!a.report.svg_dir.empty()) write_svg_boxplots(a.report.svg_dir, report);
}

void cmd_inspect(const std::string& path, std::ostream& out) {
  const auto loaded = read_model(path);
  const auto& m = loaded.ensemble;
  out << "format version " << kModelFormatVersion << '\n';
  out << "estimator " << to_string(m.kind) << (m.honest() ? " (honest)" : " (adaptive)") << '\n';
  if (!loaded.outcome_column.empty()) out << "outcome " << loaded.outcome_column << '\n';
  out << "classes " << m.n_classes << '\n';
  out << "estimation sample " << m.n_estimation() << " rows";
  if (m.honest()) out << " (training " << m.split.train.size() << ")";
  out << '\n';
  out << "parameters " << params_to_json(m.params).dump() << '\n';
  out << "covariates\n";
  for (const auto& c : m.columns) {
    out << "  " << std::left << std::setw(16) << c.name << std::setw(11) << to_string(c.kind) << std::right
        << " min " << c.observed_min << " max " << c.observed_max << " mean " << c.mean << " median " << c.median
        << " sd " << c.std_dev << '\n';
  }
  for (const auto& forest : m.forests) {
    std::size_t nodes = 0, leaves = 0;
    for (const auto& tree : forest.trees) {
      nodes += tree.nodes.size();
      leaves += static_cast<std::size_t>(
          std::count_if(tree.nodes.begin(), tree.nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
    }
    const double b = std::max<double>(1.0, static_cast<double>(forest.trees.size()));
    out << "forest " << forest_label(forest.target) << ": " << forest.trees.size() << " trees, "
        << std::setprecision(4) << static_cast<double>(leaves) / b << " leaves per tree, "
        << static_cast<double>(nodes) / b << " nodes per tree\n"
        << std::setprecision(6);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ordered correlation forests for ordered categorical outcomes"};
  app.name("ocf");
  app.require_subcommand(1);
  app.fallthrough();
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model and save it");
  fit_cmd->add_option("data", fit_args.data, "CSV file")->required();
  fit_cmd->add_option("--outcome", fit_args.outcome, "Outcome column")->required();
  fit_cmd->add_option("--output,-o", fit_args.output, "Model file")->capture_default_str();
  fit_cmd->add_option("--estimator", fit_args.estimator, "ocf, multinomial or ordered")->capture_default_str();
  fit_cmd->add_option("--max-levels", fit_args.max_levels, "Most distinct integer values of a discrete covariate")
      ->capture_default_str();
  fit_cmd->add_option("--seed", fit_args.params.seed, "Random seed")->capture_default_str();
  add_forest_options(fit_cmd, fit_args.params);

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Predict class probabilities");
  predict_cmd->add_option("model", predict_args.model, "Model file")->required();
  predict_cmd->add_option("data", predict_args.data, "CSV file with the model's covariates")->required();
  predict_cmd->add_option("--output,-o", predict_args.output, "Output CSV (default: standard output)");
  predict_cmd->add_option("--outcome", predict_args.outcome, "Column to ignore (default: the fitted outcome)");
  predict_cmd->add_flag("--se", predict_args.se, "Add standard errors (honest ocf models)");

  MarginsArgs margins_args;
  auto* margins_cmd = app.add_subcommand("margins", "Marginal effects with standard errors");
  margins_cmd->add_option("model", margins_args.model, "Model file")->required();
  margins_cmd->add_option("--at", margins_args.at, "mean, median or point")
      ->check(CLI::IsMember({"mean", "median", "point"}))
      ->capture_default_str();
  margins_cmd->add_option("--point", margins_args.point, "Comma-separated covariate values")->delimiter(',');
  margins_cmd->add_option("--omega", margins_args.omega, "Step in standard deviations (default: the model's)");
  margins_cmd->add_option("--level", margins_args.level, "Confidence level")->capture_default_str();
  margins_cmd->add_option("--average", margins_args.average,
                          "CSV file: report mean and median effects over its rows instead");
  margins_cmd->add_option("--output,-o", margins_args.output, "Output CSV (default: standard output)");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Draw a synthetic sample");
  sim_cmd->add_option("--design", sim_args.design, "Design 1, 2 or 3")->capture_default_str();
  sim_cmd->add_option("--n", sim_args.n, "Rows")->capture_default_str();
  sim_cmd->add_option("--seed", sim_args.seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--threshold-draws", sim_args.threshold_draws, "Latent draws for the thresholds")
      ->capture_default_str();
  sim_cmd->add_option("--output,-o", sim_args.output, "CSV file")->required();

  BenchmarkArgs bench_args;
  auto* bench_cmd = app.add_subcommand("benchmark", "Monte Carlo comparison on synthetic designs");
  bench_cmd->add_option("--design", bench_args.designs, "Designs (comma-separated)")->delimiter(',');
  bench_cmd->add_option("--n", bench_args.sizes, "Training sample sizes (comma-separated)")->delimiter(',');
  bench_cmd->add_option("--reps", bench_args.reps, "Replications")->capture_default_str();
  bench_cmd->add_option("--offset", bench_args.offset, "Index of the first replication")->capture_default_str();
  bench_cmd->add_option("--validation-n", bench_args.validation_n, "Validation sample size")->capture_default_str();
  bench_cmd->add_option("--threshold-draws", bench_args.threshold_draws, "Latent draws for the thresholds")
      ->capture_default_str();
  bench_cmd->add_option("--estimators", bench_args.estimators, "Estimators, e.g. OCF_H,ORF,LOGIT=preds/{design}_{n}_{rep}.csv")
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench_args.seed, "Random seed")->capture_default_str();
  bench_cmd->add_option("--export-dir", bench_args.report.export_dir, "Write validation and training samples here");
  add_report_options(bench_cmd, bench_args.report, true);
  add_forest_options(bench_cmd, bench_args.params);

  CoverageArgs cov_args;
  auto* cov_cmd = app.add_subcommand("coverage", "Bias, variance and interval coverage of marginal effects");
  cov_cmd->add_option("--design", cov_args.design, "Design 1, 2 or 3")->capture_default_str();
  cov_cmd->add_option("--n", cov_args.sizes, "Sample sizes (comma-separated)")->delimiter(',');
  cov_cmd->add_option("--reps", cov_args.reps, "Replications")->capture_default_str();
  cov_cmd->add_option("--offset", cov_args.offset, "Index of the first replication")->capture_default_str();
  cov_cmd->add_option("--threshold-draws", cov_args.threshold_draws, "Latent draws for the thresholds")
      ->capture_default_str();
  cov_cmd->add_option("--level", cov_args.level, "Confidence level")->capture_default_str();
  cov_cmd->add_option("--seed", cov_args.seed, "Random seed")->capture_default_str();
  add_report_options(cov_cmd, cov_args.report, false);
  add_forest_options(cov_cmd, cov_args.params);

  CrossvalArgs cv_args;
  auto* cv_cmd = app.add_subcommand("crossval", "Repeated k-fold cross-validation on a CSV file");
  cv_cmd->add_option("data", cv_args.data, "CSV file")->required();
  cv_cmd->add_option("--outcome", cv_args.outcome, "Outcome column")->required();
  cv_cmd->add_option("--folds", cv_args.folds, "Folds")->capture_default_str();
  cv_cmd->add_option("--repeats", cv_args.repeats, "Repetitions with fresh partitions")->capture_default_str();
  cv_cmd->add_option("--max-levels", cv_args.max_levels, "Most distinct integer values of a discrete covariate")
      ->capture_default_str();
  cv_cmd->add_option("--estimators", cv_args.estimators, "Estimators, e.g. OCF_H,MRF,EXT=preds/{repeat}_{fold}.csv")
      ->capture_default_str();
  cv_cmd->add_option("--seed", cv_args.seed, "Random seed")->capture_default_str();
  cv_cmd->add_option("--export-dir", cv_args.report.export_dir, "Write fold assignments here");
  add_report_options(cv_cmd, cv_args.report, true);
  add_forest_options(cv_cmd, cv_args.params);

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print model metadata");
  inspect_cmd->add_option("model", inspect_path, "Model file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*fit_cmd) cmd_fit(fit_args, threads, out, err);
    else if (*predict_cmd) cmd_predict(predict_args, threads, out);
    else if (*margins_cmd) cmd_margins(margins_args, threads, out);
    else if (*sim_cmd) cmd_simulate(sim_args, out);
    else if (*bench_cmd) cmd_benchmark(bench_args, threads, out, err);
    else if (*cov_cmd) cmd_coverage(cov_args, threads, out, err);
    else if (*cv_cmd) cmd_crossval(cv_args, threads, out, err);
    else if (*inspect_cmd) cmd_inspect(inspect_path, out);
  } catch (const ParamError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}

}  // namespace ocf::cli
