#include "ocf/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "ocf/baselines.hpp"
#include "ocf/inference.hpp"
#include "ocf/parallel.hpp"
#include "ocf/rng.hpp"

namespace ocf {

using nlohmann::json;

namespace {

constexpr std::uint64_t kThresholdStream = 0x5448'5245'53ULL;  // "THRES"
constexpr std::uint64_t kValidationStream = 0x56'414cULL;      // "VAL"
constexpr std::uint64_t kTrainStream = 0x5452'4149'4eULL;      // "TRAIN"
constexpr std::uint64_t kFitStream = 0x464954ULL;              // "FIT"
constexpr std::uint64_t kFoldStream = 0x464f'4c44ULL;          // "FOLD"
constexpr int kFoldAttempts = 100;
constexpr double kSimplexTolerance = 1e-6;

void check_simplex(const Matrix& p, const char* what) {
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double sum = 0.0;
    for (double v : p.row(i)) {
      if (!(v >= -kSimplexTolerance) || !std::isfinite(v)) {
        throw DataError(std::string(what) + " row " + std::to_string(i + 1) + " has an invalid probability");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      throw DataError(std::string(what) + " row " + std::to_string(i + 1) + " does not sum to one");
    }
  }
}

// Accumulates the three metrics for one row from truth and estimate vectors.
void add_row(std::span<const double> truth, std::span<const double> est, Metrics& acc) {
  const std::size_t M = truth.size();
  double se = 0.0, ae = 0.0, rps = 0.0, cum_t = 0.0, cum_e = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const double d = truth[m] - est[m];
    se += d * d;
    ae += std::abs(d);
    cum_t += truth[m];
    cum_e += est[m];
    // The last cumulative difference is zero on the simplex; keep it anyway
    // so rounding is treated the same way for both arguments.
    rps += (cum_t - cum_e) * (cum_t - cum_e);
  }
  acc.mse += se;
  acc.mae += ae;
  acc.rps += rps / static_cast<double>(M - 1);
}

Metrics scale(Metrics m, std::size_t n) {
  const double inv = 1.0 / static_cast<double>(n);
  return {m.mse * inv, m.mae * inv, m.rps * inv};
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& a,
                      const Matrix* b = nullptr) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t c = 0; c < a.cols(); ++c) out << (c ? "," : "") << a(i, c);
    if (b) {
      for (std::size_t c = 0; c < b->cols(); ++c) out << ',' << (*b)(i, c);
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<std::string> probability_header(int M) {
  std::vector<std::string> h;
  for (int m = 1; m <= M; ++m) h.push_back("p" + std::to_string(m));
  return h;
}

// Result of one estimator in one replication or fold.
struct Outcome {
  bool ok = false;
  Metrics metrics;
  std::string error;
};

}  // namespace

Metrics metrics_synthetic(const Matrix& truth, const Matrix& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw DataError("metric inputs differ in shape");
  }
  if (truth.rows() == 0 || truth.cols() < 2) throw DataError("metrics need at least one row and two classes");
  check_simplex(truth, "true probability");
  check_simplex(estimate, "estimated probability");
  Metrics acc;
  for (std::size_t i = 0; i < truth.rows(); ++i) add_row(truth.row(i), estimate.row(i), acc);
  return scale(acc, truth.rows());
}

Metrics metrics_observed(std::span<const int> outcomes, const Matrix& estimate) {
  if (outcomes.size() != estimate.rows()) throw DataError("metric inputs differ in shape");
  if (estimate.rows() == 0 || estimate.cols() < 2) throw DataError("metrics need at least one row and two classes");
  const auto M = estimate.cols();
  std::vector<double> indicator(M);
  Metrics acc;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const int y = outcomes[i];
    if (y < 1 || static_cast<std::size_t>(y) > M) throw DataError("outcome label out of range");
    std::fill(indicator.begin(), indicator.end(), 0.0);
    indicator[static_cast<std::size_t>(y - 1)] = 1.0;
    add_row(indicator, estimate.row(i), acc);
  }
  return scale(acc, outcomes.size());
}

EstimatorSpec parse_estimator(const std::string& text) {
  if (const auto eq = text.find('='); eq != std::string::npos) {
    EstimatorSpec spec{text.substr(0, eq), EstimatorId::external, text.substr(eq + 1)};
    if (spec.name.empty() || spec.path_template.empty()) {
      throw ParamError("external estimator needs NAME=path-template, got '" + text + "'");
    }
    return spec;
  }
  static const std::map<std::string, EstimatorId> known{
      {"OCF_H", EstimatorId::ocf_honest}, {"OCF_A", EstimatorId::ocf_adaptive}, {"MRF", EstimatorId::mrf},
      {"ORF", EstimatorId::orf},          {"MRF_H", EstimatorId::mrf_honest},   {"ORF_H", EstimatorId::orf_honest}};
  const auto it = known.find(text);
  if (it == known.end()) {
    throw ParamError("unknown estimator '" + text + "' (expected OCF_H, OCF_A, MRF, ORF, MRF_H, ORF_H or NAME=path)");
  }
  return {text, it->second, {}};
}

std::vector<EstimatorSpec> parse_estimators(const std::string& comma_separated) {
  std::vector<EstimatorSpec> out;
  std::stringstream in(comma_separated);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    item = item.substr(first, item.find_last_not_of(" \t") - first + 1);
    out.push_back(parse_estimator(item));
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
      if (out[i].name == out.back().name) throw ParamError("estimator '" + item + "' listed twice");
    }
  }
  if (out.empty()) throw ParamError("no estimators given");
  return out;
}

Matrix fit_predict(const EstimatorSpec& spec, const Dataset& train, const Matrix& points, ForestParams params,
                   std::size_t threads) {
  const double honest = params.honest_fraction > 0.0 ? params.honest_fraction : 0.5;
  switch (spec.id) {
    case EstimatorId::ocf_honest:
    case EstimatorId::ocf_adaptive: {
      params.honest_fraction = spec.id == EstimatorId::ocf_honest ? honest : 0.0;
      return predict(fit(train, params, threads), points, threads);
    }
    case EstimatorId::mrf:
    case EstimatorId::mrf_honest:
      params.honest_fraction = spec.id == EstimatorId::mrf_honest ? honest : 0.0;
      return predict_baseline(fit_baseline(train, BaselineKind::multinomial, params, threads), points, threads);
    case EstimatorId::orf:
    case EstimatorId::orf_honest:
      params.honest_fraction = spec.id == EstimatorId::orf_honest ? honest : 0.0;
      return predict_baseline(fit_baseline(train, BaselineKind::ordered_cumulative, params, threads), points,
                              threads);
    case EstimatorId::external: break;
  }
  throw ParamError("external estimator '" + spec.name + "' cannot be fitted");
}

std::string expand_template(std::string text, const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    const std::string token = "{" + key + "}";
    for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + value.size())) {
      text.replace(pos, token.size(), value);
    }
  }
  return text;
}

Matrix read_prediction_file(const std::filesystem::path& path, std::size_t rows, int n_classes) {
  const auto table = read_csv_table(path);
  if (table.values.rows() != rows || table.values.cols() != static_cast<std::size_t>(n_classes)) {
    throw DataError(path.string() + ": expected " + std::to_string(rows) + " rows of " + std::to_string(n_classes) +
                    " probabilities, found " + std::to_string(table.values.rows()) + " x " +
                    std::to_string(table.values.cols()));
  }
  check_simplex(table.values, path.string().c_str());
  return table.values;
}

Metrics CellResult::mean() const {
  Metrics acc;
  if (values.empty()) return {std::nan(""), std::nan(""), std::nan("")};
  for (const auto& v : values) {
    acc.mse += v.mse;
    acc.mae += v.mae;
    acc.rps += v.rps;
  }
  return scale(acc, values.size());
}

const CellResult* MetricReport::find(const std::string& estimator, const json& scenario) const {
  for (const auto& c : cells) {
    if (c.estimator == estimator && c.scenario == scenario) return &c;
  }
  return nullptr;
}

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw DataError("box statistics of an empty sample");
  std::sort(values.begin(), values.end());
  const auto quantile = [&](double q) {
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  BoxStats b;
  b.min = values.front();
  b.max = values.back();
  b.q1 = quantile(0.25);
  b.median = quantile(0.5);
  b.q3 = quantile(0.75);
  b.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return b;
}

MetricReport monte_carlo(const MonteCarloConfig& config) {
  if (config.replications < 1) throw ParamError("replications must be at least 1");
  if (config.estimators.empty()) throw ParamError("no estimators given");
  if (config.validation_n < 1) throw ParamError("validation sample must not be empty");
  for (const auto& e : config.estimators) {
    if (e.id != EstimatorId::external) config.params.validate(synthetic::kCovariates);
  }
  if (config.export_dir) std::filesystem::create_directories(*config.export_dir);

  struct Scenario {
    int design;
    std::size_t n;
    synthetic::Thresholds thresholds;
    Matrix validation;
    Matrix truth;
  };
  std::vector<Scenario> scenarios;
  std::map<int, synthetic::Thresholds> thresholds;
  for (int d : config.designs) {
    const auto design = synthetic::design_from_int(d);
    if (!thresholds.count(d)) {
      thresholds[d] = synthetic::compute_thresholds(
          design, derive_seed(config.seed, {kThresholdStream, static_cast<std::uint64_t>(d)}), config.threshold_draws);
    }
    for (std::size_t n : config.sample_sizes) {
      Scenario s{d, n, thresholds[d], {}, {}};
      synthetic::simulate_latent(design, config.validation_n,
                                 derive_seed(config.seed, {kValidationStream, static_cast<std::uint64_t>(d), n}),
                                 &s.validation);
      s.truth = synthetic::TruthOracle(design, s.thresholds).probabilities(s.validation);
      if (config.export_dir) {
        std::vector<std::string> header;
        for (std::size_t j = 0; j < synthetic::kCovariates; ++j) header.push_back("W" + std::to_string(j + 1));
        for (const auto& h : probability_header(synthetic::kClasses)) header.push_back("true_" + h);
        write_matrix_csv(*config.export_dir / ("validation_d" + std::to_string(d) + "_n" + std::to_string(n) + ".csv"),
                         header, s.validation, &s.truth);
      }
      scenarios.push_back(std::move(s));
    }
  }

  const std::size_t R = config.replications;
  const std::size_t E = config.estimators.size();
  std::vector<std::vector<Outcome>> outcomes(scenarios.size() * R, std::vector<Outcome>(E));

  parallel_for(scenarios.size() * R, config.threads, [&](std::size_t task) {
    const auto& s = scenarios[task / R];
    const std::size_t rep = config.replication_offset + task % R;
    auto& slot = outcomes[task];
    const auto d = static_cast<std::uint64_t>(s.design);
    Dataset train;
    try {
      train = synthetic::simulate_sample(synthetic::design_from_int(s.design), s.thresholds, s.n,
                                         derive_seed(config.seed, {kTrainStream, d, s.n, rep}));
      if (config.export_dir) {
        write_csv(*config.export_dir /
                      ("train_d" + std::to_string(s.design) + "_n" + std::to_string(s.n) + "_r" + std::to_string(rep) +
                       ".csv"),
                  train);
      }
    } catch (const std::exception& e) {
      for (auto& o : slot) o.error = std::string("training sample: ") + e.what();
      return;
    }
    ForestParams params = config.params;
    params.seed = derive_seed(config.seed, {kFitStream, d, s.n, rep});
    for (std::size_t e = 0; e < E; ++e) {
      const auto& spec = config.estimators[e];
      try {
        Matrix est;
        if (spec.id == EstimatorId::external) {
          const auto path = expand_template(spec.path_template, {{"design", std::to_string(s.design)},
                                                                  {"n", std::to_string(s.n)},
                                                                  {"rep", std::to_string(rep)}});
          est = read_prediction_file(path, s.validation.rows(), synthetic::kClasses);
        } else {
          est = fit_predict(spec, train, s.validation, params, 1);
        }
        slot[e].metrics = metrics_synthetic(s.truth, est);
        slot[e].ok = true;
      } catch (const std::exception& ex) {
        slot[e].error = ex.what();
      }
    }
  });

  MetricReport report;
  report.kind = "monte_carlo";
  json names = json::array();
  for (const auto& e : config.estimators) names.push_back(e.name);
  json thresholds_json = json::object();
  for (const auto& [d, t] : thresholds) thresholds_json[std::to_string(d)] = {t.zeta1, t.zeta2};
  report.settings = {{"seed", config.seed},
                     {"replications", R},
                     {"replication_offset", config.replication_offset},
                     {"validation_n", config.validation_n},
                     {"threshold_draws", config.threshold_draws},
                     {"thresholds", thresholds_json},
                     {"estimators", names},
                     {"n_trees", config.params.n_trees},
                     {"alpha", config.params.alpha},
                     {"min_leaf", config.params.min_leaf},
                     {"subsample_fraction", config.params.subsample_fraction},
                     {"honest_fraction", config.params.honest_fraction},
                     {"mtry", config.params.mtry}};
  for (std::size_t si = 0; si < scenarios.size(); ++si) {
    for (std::size_t e = 0; e < E; ++e) {
      CellResult cell;
      cell.scenario = {{"design", scenarios[si].design}, {"n", scenarios[si].n}};
      cell.estimator = config.estimators[e].name;
      for (std::size_t r = 0; r < R; ++r) {
        const auto& o = outcomes[si * R + r][e];
        const std::size_t rep = config.replication_offset + r;
        if (o.ok) {
          cell.ids.push_back(rep);
          cell.values.push_back(o.metrics);
        } else {
          cell.failures.push_back({rep, o.error});
        }
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

const CoverageCell* CoverageReport::find(std::size_t n, const std::string& point) const {
  for (const auto& c : cells) {
    if (c.n == n && c.point == point) return &c;
  }
  return nullptr;
}

CoverageReport coverage_study(const CoverageConfig& config) {
  if (config.replications < 1) throw ParamError("replications must be at least 1");
  if (!(config.level > 0.0 && config.level < 1.0)) throw ParamError("level must lie in (0, 1)");
  ForestParams params = config.params;
  if (!params.honest()) params.honest_fraction = 0.5;
  params.validate(synthetic::kCovariates);

  const auto design = synthetic::design_from_int(config.design);
  const auto d = static_cast<std::uint64_t>(config.design);
  const auto thresholds = synthetic::compute_thresholds(design, derive_seed(config.seed, {kThresholdStream, d}),
                                                        config.threshold_draws);
  const synthetic::TruthOracle oracle(design, thresholds);
  const std::array<PointKind, 2> kinds{PointKind::mean, PointKind::median};
  const std::array<const char*, 2> labels{"mean", "median"};
  const std::size_t n_effects = synthetic::kCovariates * synthetic::kClasses;

  // Per replication and point: estimate, truth and coverage flag of every effect.
  struct Draw {
    bool ok = false;
    std::string error;
    std::array<std::vector<double>, 2> estimate, truth;
    std::array<std::vector<std::uint8_t>, 2> covered;
  };
  const std::size_t R = config.replications;
  std::vector<Draw> draws(config.sample_sizes.size() * R);

  parallel_for(draws.size(), config.threads, [&](std::size_t task) {
    const std::size_t n = config.sample_sizes[task / R];
    const std::size_t rep = config.replication_offset + task % R;
    auto& draw = draws[task];
    try {
      const auto data = synthetic::simulate_sample(design, thresholds, n, derive_seed(config.seed, {kTrainStream, d, n, rep}));
      ForestParams p = params;
      p.seed = derive_seed(config.seed, {kFitStream, d, n, rep});
      const auto model = fit(data, p, 1);
      for (std::size_t k = 0; k < kinds.size(); ++k) {
        const auto w = evaluation_point(data, kinds[k]);
        const auto table = marginal_effects(model, w, labels[k], p.omega, config.level);
        for (const auto& row : table.rows) {
          const auto truth = synthetic::is_continuous(row.j)
                                 ? oracle.marginal_effect(row.j, w)
                                 : oracle.contrast(row.j, w, row.points.up, row.points.down);
          const double t = truth[static_cast<std::size_t>(row.m - 1)];
          draw.estimate[k].push_back(row.effect);
          draw.truth[k].push_back(t);
          draw.covered[k].push_back(row.ci.lo <= t && t <= row.ci.hi ? 1 : 0);
        }
      }
      draw.ok = true;
    } catch (const std::exception& e) {
      draw.error = e.what();
    }
  });

  CoverageReport report;
  report.settings = {{"design", config.design},
                     {"seed", config.seed},
                     {"replications", R},
                     {"replication_offset", config.replication_offset},
                     {"level", config.level},
                     {"threshold_draws", config.threshold_draws},
                     {"thresholds", {thresholds.zeta1, thresholds.zeta2}},
                     {"n_trees", params.n_trees},
                     {"alpha", params.alpha},
                     {"min_leaf", params.min_leaf},
                     {"honest_fraction", params.honest_fraction},
                     {"omega", params.omega}};
  for (std::size_t si = 0; si < config.sample_sizes.size(); ++si) {
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      CoverageCell cell;
      cell.design = config.design;
      cell.n = config.sample_sizes[si];
      cell.point = labels[k];
      std::vector<const Draw*> ok;
      for (std::size_t r = 0; r < R; ++r) {
        const auto& draw = draws[si * R + r];
        if (draw.ok) {
          ok.push_back(&draw);
        } else {
          cell.failures.push_back({config.replication_offset + r, draw.error});
        }
      }
      cell.replications = ok.size();
      if (!ok.empty()) {
        for (std::size_t e = 0; e < n_effects; ++e) {
          EffectSummary s;
          s.j = e / synthetic::kClasses;
          s.m = static_cast<int>(e % synthetic::kClasses) + 1;
          std::vector<double> estimates;
          double bias = 0.0, covered = 0.0;
          for (const auto* draw : ok) {
            estimates.push_back(draw->estimate[k][e]);
            bias += draw->estimate[k][e] - draw->truth[k][e];
            covered += draw->covered[k][e];
          }
          bias /= static_cast<double>(ok.size());
          s.squared_bias = bias * bias;
          s.variance = sample_variance(estimates);
          s.coverage = covered / static_cast<double>(ok.size());
          cell.squared_bias += s.squared_bias / static_cast<double>(n_effects);
          cell.variance += s.variance / static_cast<double>(n_effects);
          cell.coverage += s.coverage / static_cast<double>(n_effects);
          cell.effects.push_back(s);
        }
      } else {
        cell.squared_bias = cell.variance = cell.coverage = std::nan("");
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

std::vector<std::uint32_t> assign_folds(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ParamError("need at least two folds");
  if (n < folds) throw ParamError("more folds than rows");
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  Rng rng(seed);
  rng.shuffle(std::span(order));
  std::vector<std::uint32_t> fold(n);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = n / folds + (f < n % folds ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) fold[order[pos++]] = static_cast<std::uint32_t>(f);
  }
  return fold;
}

MetricReport cross_validate(const Dataset& data, const CrossValConfig& config) {
  validate(data);
  if (config.repeats < 1) throw ParamError("repeats must be at least 1");
  if (config.estimators.empty()) throw ParamError("no estimators given");
  if (data.n() < config.folds) throw ParamError("more folds than rows");
  for (const auto& e : config.estimators) {
    if (e.id != EstimatorId::external) config.params.validate(data.k());
  }
  if (config.export_dir) std::filesystem::create_directories(*config.export_dir);

  const std::size_t F = config.folds;
  const auto M = static_cast<std::size_t>(data.n_classes);
  const auto counts = data.class_counts();

  std::vector<std::vector<std::uint32_t>> partitions;
  for (std::size_t r = 0; r < config.repeats; ++r) {
    bool found = false;
    for (int attempt = 0; attempt < kFoldAttempts && !found; ++attempt) {
      auto fold = assign_folds(data.n(), F, derive_seed(config.seed, {kFoldStream, r, static_cast<std::uint64_t>(attempt)}));
      // A training complement lacks class c iff one fold holds every row of c.
      std::vector<std::size_t> per(F * M, 0);
      for (std::size_t i = 0; i < data.n(); ++i) ++per[fold[i] * M + static_cast<std::size_t>(data.outcome[i] - 1)];
      found = true;
      for (std::size_t f = 0; f < F && found; ++f) {
        for (std::size_t c = 0; c < M; ++c) {
          if (per[f * M + c] == counts[c]) found = false;
        }
      }
      if (found) partitions.push_back(std::move(fold));
    }
    if (!found) {
      throw DataError("a class is absent from some training fold after " + std::to_string(kFoldAttempts) +
                      " partition draws");
    }
    if (config.export_dir) {
      std::ofstream out(*config.export_dir / ("folds_repeat" + std::to_string(r) + ".csv"));
      out << "row,fold\n";
      for (std::size_t i = 0; i < data.n(); ++i) out << i << ',' << partitions.back()[i] << '\n';
      if (!out) throw DataError("failed writing fold assignment");
    }
  }

  const std::size_t E = config.estimators.size();
  std::vector<std::vector<Outcome>> outcomes(config.repeats * F, std::vector<Outcome>(E));
  parallel_for(config.repeats * F, config.threads, [&](std::size_t task) {
    const std::size_t r = task / F;
    const std::size_t f = task % F;
    std::vector<std::uint32_t> train_rows, test_rows;
    for (std::size_t i = 0; i < data.n(); ++i) {
      (partitions[r][i] == f ? test_rows : train_rows).push_back(static_cast<std::uint32_t>(i));
    }
    Matrix test(test_rows.size(), data.k());
    std::vector<int> test_outcome;
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      const auto src = data.covariates.row(test_rows[i]);
      std::copy(src.begin(), src.end(), test.row(i).begin());
      test_outcome.push_back(data.outcome[test_rows[i]]);
    }
    Dataset train;
    try {
      train = data.subset(train_rows);
    } catch (const std::exception& e) {
      for (auto& o : outcomes[task]) o.error = e.what();
      return;
    }
    ForestParams params = config.params;
    params.seed = derive_seed(config.seed, {kFitStream, r, f});
    for (std::size_t e = 0; e < E; ++e) {
      const auto& spec = config.estimators[e];
      auto& slot = outcomes[task][e];
      try {
        Matrix est;
        if (spec.id == EstimatorId::external) {
          const auto path =
              expand_template(spec.path_template, {{"repeat", std::to_string(r)}, {"fold", std::to_string(f)}});
          est = read_prediction_file(path, test_rows.size(), data.n_classes);
        } else {
          est = fit_predict(spec, train, test, params, 1);
        }
        slot.metrics = metrics_observed(test_outcome, est);
        slot.ok = true;
      } catch (const std::exception& ex) {
        slot.error = ex.what();
      }
    }
  });

  MetricReport report;
  report.kind = "crossval";
  json names = json::array();
  for (const auto& e : config.estimators) names.push_back(e.name);
  report.settings = {{"seed", config.seed},       {"folds", F},
                     {"repeats", config.repeats}, {"n", data.n()},
                     {"n_classes", data.n_classes}, {"estimators", names},
                     {"n_trees", config.params.n_trees}, {"alpha", config.params.alpha},
                     {"min_leaf", config.params.min_leaf}, {"honest_fraction", config.params.honest_fraction}};
  for (std::size_t e = 0; e < E; ++e) {
    CellResult cell;
    cell.scenario = {{"dataset", config.label}};
    cell.estimator = config.estimators[e].name;
    for (std::size_t t = 0; t < outcomes.size(); ++t) {
      const auto& o = outcomes[t][e];
      if (o.ok) {
        cell.ids.push_back(t);
        cell.values.push_back(o.metrics);
      } else {
        cell.failures.push_back({t, o.error});
      }
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

namespace {

constexpr std::array<const char*, 3> kMetricNames{"mse", "mae", "rps"};

double metric_of(const Metrics& m, std::size_t which) {
  return which == 0 ? m.mse : which == 1 ? m.mae : m.rps;
}

std::vector<double> metric_values(const CellResult& cell, std::size_t which) {
  std::vector<double> v;
  for (const auto& m : cell.values) v.push_back(metric_of(m, which));
  return v;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string scenario_label(const json& scenario) {
  std::string out;
  for (const auto& [key, value] : scenario.items()) {
    if (!out.empty()) out += ' ';
    out += key + "=" + (value.is_string() ? value.get<std::string>() : value.dump());
  }
  return out;
}

}  // namespace

json report_to_json(const MetricReport& report) {
  json records = json::array();
  for (const auto& cell : report.cells) {
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
      const auto values = metric_values(cell, k);
      json rec = {{"scenario", cell.scenario},
                  {"estimator", cell.estimator},
                  {"metric", kMetricNames[k]},
                  {"count", values.size()},
                  {"failures", cell.failures.size()},
                  {"values", values},
                  {"ids", cell.ids}};
      if (values.empty()) {
        rec["mean"] = nullptr;
      } else {
        const auto box = box_stats(values);
        rec["mean"] = box.mean;
        rec["sd"] = std::sqrt(sample_variance(values));
        rec["box"] = {{"min", box.min}, {"q1", box.q1}, {"median", box.median}, {"q3", box.q3}, {"max", box.max}};
      }
      json failures = json::array();
      for (const auto& f : cell.failures) failures.push_back({{"id", f.id}, {"message", f.message}});
      rec["failure_messages"] = std::move(failures);
      records.push_back(std::move(rec));
    }
  }
  return {{"kind", report.kind}, {"settings", report.settings}, {"records", std::move(records)}};
}

json report_to_json(const CoverageReport& report) {
  json records = json::array();
  for (const auto& cell : report.cells) {
    json effects = json::array();
    for (const auto& e : cell.effects) {
      effects.push_back({{"covariate", "W" + std::to_string(e.j + 1)},
                         {"class", e.m},
                         {"squared_bias", e.squared_bias},
                         {"variance", e.variance},
                         {"coverage", e.coverage}});
    }
    json failures = json::array();
    for (const auto& f : cell.failures) failures.push_back({{"id", f.id}, {"message", f.message}});
    records.push_back({{"design", cell.design},
                       {"n", cell.n},
                       {"point", cell.point},
                       {"replications", cell.replications},
                       {"failures", cell.failures.size()},
                       {"squared_bias", number_or_null(cell.squared_bias)},
                       {"variance", number_or_null(cell.variance)},
                       {"coverage", number_or_null(cell.coverage)},
                       {"effects", std::move(effects)},
                       {"failure_messages", std::move(failures)}});
  }
  return {{"kind", "coverage"}, {"settings", report.settings}, {"records", std::move(records)}};
}

void write_table(std::ostream& out, const MetricReport& report) {
  const bool box = report.kind == "crossval";
  out << std::left << std::setw(22) << "scenario" << std::setw(10) << "estimator" << std::right;
  for (const char* name : {"MSE", "MAE", "RPS"}) out << std::setw(11) << name;
  if (box) out << std::setw(11) << "MSE med" << std::setw(11) << "MSE IQR";
  out << std::setw(6) << "ok" << std::setw(8) << "failed" << '\n';
  out << std::fixed << std::setprecision(5);
  for (const auto& cell : report.cells) {
    const auto mean = cell.mean();
    out << std::left << std::setw(22) << scenario_label(cell.scenario) << std::setw(10) << cell.estimator << std::right
        << std::setw(11) << mean.mse << std::setw(11) << mean.mae << std::setw(11) << mean.rps;
    if (box) {
      const auto v = metric_values(cell, 0);
      if (v.empty()) {
        out << std::setw(11) << "nan" << std::setw(11) << "nan";
      } else {
        const auto b = box_stats(v);
        out << std::setw(11) << b.median << std::setw(11) << b.q3 - b.q1;
      }
    }
    out << std::setw(6) << cell.values.size() << std::setw(8) << cell.failures.size() << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

void write_table(std::ostream& out, const CoverageReport& report) {
  out << std::left << std::setw(8) << "design" << std::setw(8) << "n" << std::setw(8) << "point" << std::right
      << std::setw(12) << "bias^2" << std::setw(12) << "variance" << std::setw(10) << "coverage" << std::setw(6) << "ok"
      << std::setw(8) << "failed" << '\n';
  out << std::fixed;
  for (const auto& c : report.cells) {
    out << std::left << std::setw(8) << c.design << std::setw(8) << c.n << std::setw(8) << c.point << std::right
        << std::setprecision(6) << std::setw(12) << c.squared_bias << std::setw(12) << c.variance
        << std::setprecision(3) << std::setw(10) << c.coverage << std::setw(6) << c.replications << std::setw(8)
        << c.failures.size() << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

std::vector<std::filesystem::path> write_svg_boxplots(const std::filesystem::path& dir, const MetricReport& report) {
  std::filesystem::create_directories(dir);
  std::vector<json> scenarios;
  for (const auto& cell : report.cells) {
    if (std::find(scenarios.begin(), scenarios.end(), cell.scenario) == scenarios.end()) {
      scenarios.push_back(cell.scenario);
    }
  }
  std::vector<std::filesystem::path> written;
  constexpr double kWidth = 110.0, kHeight = 320.0, kTop = 40.0, kLeft = 70.0, kBottom = 50.0;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    std::vector<const CellResult*> cells;
    for (const auto& cell : report.cells) {
      if (cell.scenario == scenarios[s] && !cell.values.empty()) cells.push_back(&cell);
    }
    if (cells.empty()) continue;
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
      std::vector<BoxStats> boxes;
      double lo = INFINITY, hi = -INFINITY;
      for (const auto* cell : cells) {
        boxes.push_back(box_stats(metric_values(*cell, k)));
        lo = std::min(lo, boxes.back().min);
        hi = std::max(hi, boxes.back().max);
      }
      if (hi <= lo) hi = lo + 1e-9;
      const double width = kLeft + kWidth * static_cast<double>(cells.size()) + 20.0;
      const double height = kTop + kHeight + kBottom;
      const auto y = [&](double v) { return kTop + kHeight * (hi - v) / (hi - lo); };

      std::ostringstream svg;
      svg << std::setprecision(6);
      svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
          << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
      svg << "<text x=\"" << kLeft << "\" y=\"20\">" << kMetricNames[k] << "  " << scenario_label(scenarios[s])
          << "</text>\n";
      svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + kHeight
          << "\" stroke=\"black\"/>\n";
      for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << y(v) + 4 << "\" text-anchor=\"end\">" << format_double(
                                                                                                      std::round(v * 1e5) / 1e5)
            << "</text>\n";
      }
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        const auto& b = boxes[i];
        const double cx = kLeft + kWidth * (static_cast<double>(i) + 0.5);
        const double half = kWidth * 0.3;
        svg << "<line x1=\"" << cx << "\" y1=\"" << y(b.max) << "\" x2=\"" << cx << "\" y2=\"" << y(b.min)
            << "\" stroke=\"black\"/>\n";
        svg << "<rect x=\"" << cx - half << "\" y=\"" << y(b.q3) << "\" width=\"" << 2 * half << "\" height=\""
            << std::max(0.5, y(b.q1) - y(b.q3)) << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << cx - half << "\" y1=\"" << y(b.median) << "\" x2=\"" << cx + half << "\" y2=\""
            << y(b.median) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << cx << "\" y=\"" << kTop + kHeight + 20 << "\" text-anchor=\"middle\">"
            << cells[i]->estimator << "</text>\n";
      }
      svg << "</svg>\n";

      std::string stem = report.kind + "_" + kMetricNames[k];
      if (scenarios.size() > 1) stem += "_" + std::to_string(s + 1);
      const auto path = dir / (stem + ".svg");
      std::ofstream out(path);
      out << svg.str();
      if (!out) throw DataError("failed writing " + path.string());
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace ocf
