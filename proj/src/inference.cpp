#include "ocf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "ocf/parallel.hpp"

#include <boost/math/distributions/normal.hpp>

namespace ocf {

namespace {

void require_honest(const OcfModel& model) {
  if (!model.honest()) throw InferenceError("variance requires honest fit");
  if (model.ensemble.n_estimation() < 2) throw InferenceError("variance requires at least two honest rows");
}

std::vector<double> class_products(const OcfModel& model, int m, std::span<const double> weights) {
  const auto& outcomes = model.ensemble.estimation_outcomes;
  std::vector<double> x(weights.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = outcomes[i] == m ? weights[i] : 0.0;
  return x;
}

std::vector<double> with_coordinate(std::span<const double> w, std::size_t j, double value) {
  std::vector<double> out(w.begin(), w.end());
  out[j] = value;
  return out;
}

void check_inputs(const OcfModel& model, std::size_t j, std::span<const double> w) {
  if (w.size() != model.ensemble.k()) {
    throw InferenceError("point has " + std::to_string(w.size()) + " covariates, model expects " +
                         std::to_string(model.ensemble.k()));
  }
  if (j >= model.ensemble.k()) throw InferenceError("covariate index out of range");
}

}  // namespace

double honest_variance(std::span<const double> products) {
  const std::size_t n = products.size();
  if (n < 2) throw InferenceError("variance requires at least two honest rows");
  const double mean = std::accumulate(products.begin(), products.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : products) ss += (x - mean) * (x - mean);
  return static_cast<double>(n) * ss / static_cast<double>(n - 1);
}

PredictionWithSe variance_probability(const OcfModel& model, int m, std::span<const double> w) {
  require_honest(model);
  const auto weights = compute_weights(model, m, w).weights;
  const auto x = class_products(model, m, weights);
  PredictionWithSe out;
  out.m = m;
  out.estimate = std::accumulate(x.begin(), x.end(), 0.0);
  out.se = std::sqrt(honest_variance(x));
  return out;
}

ContrastPoints contrast_points(const ColumnMeta& column, double w_j, double omega) {
  ContrastPoints p;
  if (column.kind == CovariateKind::continuous) {
    if (!(omega > 0.0)) throw InferenceError("omega must be positive");
    p.continuous = true;
    p.up = std::min(w_j + omega * column.std_dev, column.observed_max);
    p.down = std::max(w_j - omega * column.std_dev, column.observed_min);
    if (!(p.up > p.down)) {
      throw InferenceError("covariate '" + column.name + "' has zero width at the evaluation point");
    }
    return p;
  }
  p.continuous = false;
  p.up = std::ceil(w_j);
  p.down = std::floor(w_j);
  if (p.up == p.down) {
    if (w_j <= column.observed_min) {
      p.down = w_j;
      p.up = w_j + 1.0;
    } else {
      p.up = w_j;
      p.down = std::max(w_j - 1.0, column.observed_min);
    }
  }
  return p;
}

MarginalEffect marginal_effect(const OcfModel& model, std::size_t j, std::span<const double> w, double omega) {
  check_inputs(model, j, w);
  MarginalEffect me;
  me.j = j;
  me.points = contrast_points(model.ensemble.columns[j], w[j], omega);
  const auto p_up = predict(model, with_coordinate(w, j, me.points.up));
  const auto p_down = predict(model, with_coordinate(w, j, me.points.down));
  const double denom = me.points.denominator();
  for (std::size_t m = 0; m < p_up.size(); ++m) me.effects.push_back((p_up[m] - p_down[m]) / denom);
  return me;
}

std::vector<double> me_weights(const OcfModel& model, int m, std::size_t j, std::span<const double> w,
                               double omega) {
  check_inputs(model, j, w);
  const auto points = contrast_points(model.ensemble.columns[j], w[j], omega);
  const auto& forest = model.forest(m);
  const auto n = model.ensemble.n_estimation();
  auto up = forest.weights(with_coordinate(w, j, points.up), n);
  const auto down = forest.weights(with_coordinate(w, j, points.down), n);
  for (std::size_t i = 0; i < n; ++i) up[i] -= down[i];
  return up;
}

double variance_marginal_effect(const OcfModel& model, int m, std::size_t j, std::span<const double> w,
                                double omega) {
  require_honest(model);
  check_inputs(model, j, w);
  const auto points = contrast_points(model.ensemble.columns[j], w[j], omega);
  const auto x = class_products(model, m, me_weights(model, m, j, w, omega));
  const double denom = points.denominator();
  return std::sqrt(honest_variance(x) / (denom * denom));
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_p_value(double z) {
  if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

Interval confidence_interval(double estimate, double se, double level) {
  if (!(level >= 0.0 && level < 1.0)) throw InferenceError("confidence level must lie in [0, 1)");
  if (se < 0.0) throw InferenceError("standard error must be nonnegative");
  const double half = level == 0.0 ? 0.0 : normal_quantile(0.5 * (1.0 + level)) * se;
  return {estimate - half, estimate + half};
}

MarginalEffectTable marginal_effects(const OcfModel& model, std::span<const double> w, std::string evaluated_at,
                                     double omega, double level) {
  require_honest(model);
  MarginalEffectTable table;
  table.evaluated_at = std::move(evaluated_at);
  table.point.assign(w.begin(), w.end());
  table.omega = omega;
  table.level = level;
  const auto& columns = model.ensemble.columns;
  for (std::size_t j = 0; j < model.ensemble.k(); ++j) {
    const auto me = marginal_effect(model, j, w, omega);
    for (int m = 1; m <= model.n_classes(); ++m) {
      MarginalEffectRow row;
      row.j = j;
      row.covariate = columns[j].name;
      row.m = m;
      row.effect = me.effects[static_cast<std::size_t>(m - 1)];
      row.se = variance_marginal_effect(model, m, j, w, omega);
      if (row.se > 0.0) {
        row.z = row.effect / row.se;
      } else {
        row.z = row.effect == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), row.effect);
      }
      row.p_value = normal_p_value(row.z);
      row.ci = confidence_interval(row.effect, row.se, level);
      row.points = me.points;
      table.rows.push_back(row);
    }
  }
  return table;
}

void write_margins(std::ostream& out, const MarginalEffectTable& table, char d) {
  out << "covariate" << d << "class" << d << "effect" << d << "se" << d << "z" << d << "p_value" << d << "ci_lo" << d
      << "ci_hi" << d << "eval_up" << d << "eval_down\n";
  const auto old_precision = out.precision(10);
  for (const auto& r : table.rows) {
    out << r.covariate << d << r.m << d << r.effect << d << r.se << d << r.z << d << r.p_value << d << r.ci.lo << d
        << r.ci.hi << d << r.points.up << d << r.points.down << '\n';
  }
  out.precision(old_precision);
}

std::vector<AverageEffectRow> average_marginal_effects(const OcfModel& model, const Matrix& points, double omega,
                                                       std::size_t threads) {
  const std::size_t k = model.ensemble.k();
  const auto M = static_cast<std::size_t>(model.n_classes());
  if (points.rows() == 0) throw InferenceError("no evaluation points");
  if (points.cols() != k) throw DataError("evaluation points have the wrong number of covariates");
  // effects[(j * M + m) * rows + i]
  std::vector<double> effects(k * M * points.rows());
  parallel_for(points.rows(), threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < k; ++j) {
      const auto me = marginal_effect(model, j, points.row(i), omega);
      for (std::size_t m = 0; m < M; ++m) effects[(j * M + m) * points.rows() + i] = me.effects[m];
    }
  });
  std::vector<AverageEffectRow> rows;
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t m = 0; m < M; ++m) {
      const auto first = effects.begin() + static_cast<std::ptrdiff_t>((j * M + m) * points.rows());
      std::vector<double> v(first, first + static_cast<std::ptrdiff_t>(points.rows()));
      AverageEffectRow row;
      row.j = j;
      row.covariate = model.ensemble.columns[j].name;
      row.m = static_cast<int>(m + 1);
      row.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      row.median = median_of(std::move(v));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_average_effects(std::ostream& out, const std::vector<AverageEffectRow>& rows, char delimiter) {
  const char d = delimiter;
  out << "covariate" << d << "class" << d << "mean_effect" << d << "median_effect\n";
  const auto precision = out.precision(12);
  for (const auto& r : rows) out << r.covariate << d << r.m << d << r.mean << d << r.median << '\n';
  out.precision(precision);
}

}  // namespace ocf
