#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocf/forest.hpp"

namespace ocf {

/// Raised when an inference quantity is undefined for the given model/input.
class InferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PredictionWithSe {
  int m = 1;
  double estimate = 0.0;  // honest weighted average, before normalization
  double se = 0.0;
};

/// n * sampleVar(x) with the n-1 denominator. Requires at least two values.
double honest_variance(std::span<const double> products);

/// Honest prediction for class m at w and its standard error from
/// |S_hon| * sampleVar(weight_i * 1(Y_i = m)).
PredictionWithSe variance_probability(const OcfModel& model, int m, std::span<const double> w);

/// Covariate values where a marginal effect is evaluated.
struct ContrastPoints {
  double up = 0.0;
  double down = 0.0;
  bool continuous = true;

  /// Divisor of the finite difference: up - down for continuous covariates, 1 otherwise.
  double denominator() const { return continuous ? up - down : 1.0; }
};

/// Continuous: w_j +/- omega * std_dev clamped to the observed range.
/// Discrete: ceil/floor of w_j; an integer w_j uses (w_j - 1, w_j), or
/// (w_j, w_j + 1) when w_j sits at the column minimum.
ContrastPoints contrast_points(const ColumnMeta& column, double w_j, double omega);

struct MarginalEffect {
  std::size_t j = 0;
  ContrastPoints points;
  std::vector<double> effects;  // one per class
};

/// Finite-difference marginal effect of covariate j at w for every class,
/// using the model's prediction (normalized if the model normalizes).
MarginalEffect marginal_effect(const OcfModel& model, std::size_t j, std::span<const double> w, double omega);

/// Weight difference alpha(up) - alpha(down) over the honest sample.
std::vector<double> me_weights(const OcfModel& model, int m, std::size_t j, std::span<const double> w, double omega);

/// Standard error of the marginal effect of covariate j on class m.
double variance_marginal_effect(const OcfModel& model, int m, std::size_t j, std::span<const double> w,
                                double omega);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Standard normal quantile.
double normal_quantile(double p);

/// Two-sided p-value of a z statistic.
double normal_p_value(double z);

/// estimate +/- z_{(1+level)/2} * se.
Interval confidence_interval(double estimate, double se, double level);

struct MarginalEffectRow {
  std::size_t j = 0;
  std::string covariate;
  int m = 1;
  double effect = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  Interval ci;
  ContrastPoints points;
};

struct MarginalEffectTable {
  std::string evaluated_at;  // "mean", "median" or "point"
  std::vector<double> point;
  double omega = 0.1;
  double level = 0.95;
  std::vector<MarginalEffectRow> rows;  // covariate-major, then class
};

/// Effects, standard errors and intervals for every covariate and class.
MarginalEffectTable marginal_effects(const OcfModel& model, std::span<const double> w, std::string evaluated_at,
                                     double omega, double level);

/// Marginal effects evaluated at every row of `points`, summarized by their
/// mean and median over rows. No standard errors.
struct AverageEffectRow {
  std::size_t j = 0;
  std::string covariate;
  int m = 1;
  double mean = 0.0;
  double median = 0.0;
};

std::vector<AverageEffectRow> average_marginal_effects(const OcfModel& model, const Matrix& points, double omega,
                                                       std::size_t threads = 1);

void write_average_effects(std::ostream& out, const std::vector<AverageEffectRow>& rows, char delimiter = ',');

/// Delimited table: covariate, class, effect, se, z, p_value, ci_lo, ci_hi,
/// eval_up, eval_down.
void write_margins(std::ostream& out, const MarginalEffectTable& table, char delimiter = ',');

}  // namespace ocf
