#include "ocf/baselines.hpp"

#include <algorithm>

namespace ocf {

BaselineKind baseline_kind(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::multinomial: return BaselineKind::multinomial;
    case EstimatorKind::ordered_cumulative: return BaselineKind::ordered_cumulative;
    case EstimatorKind::ocf: break;
  }
  throw ParamError("not a baseline estimator");
}

EstimatorKind estimator_kind(BaselineKind kind) {
  return kind == BaselineKind::multinomial ? EstimatorKind::multinomial : EstimatorKind::ordered_cumulative;
}

BaselineModel fit_baseline(const Dataset& data, BaselineKind kind, const ForestParams& params, std::size_t threads) {
  std::vector<ForestTarget> targets;
  if (kind == BaselineKind::multinomial) {
    for (int m = 1; m <= data.n_classes; ++m) targets.push_back({TargetKind::class_indicator, m});
  } else {
    for (int m = 1; m < data.n_classes; ++m) targets.push_back({TargetKind::cumulative, m});
  }
  return BaselineModel{kind, fit_ensemble(data, params, estimator_kind(kind), targets, threads)};
}

BaselinePrediction baseline_probabilities(BaselineKind kind, int n_classes, std::span<const double> raw) {
  BaselinePrediction out;
  const auto M = static_cast<std::size_t>(n_classes);
  if (kind == BaselineKind::multinomial) {
    out.probabilities.assign(raw.begin(), raw.end());
  } else {
    out.probabilities.resize(M);
    double previous = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      const double mu = m + 1 < M ? raw[m] : 1.0;
      out.probabilities[m] = std::max(0.0, mu - previous);
      previous = mu;
    }
  }
  out.uniform_fallback = normalize_in_place(out.probabilities);
  return out;
}

BaselinePrediction predict_baseline(const BaselineModel& model, std::span<const double> w) {
  const auto raw = model.ensemble.raw(w);
  return baseline_probabilities(model.kind, model.n_classes(), raw);
}

Matrix predict_baseline(const BaselineModel& model, const Matrix& points, std::size_t threads) {
  const Matrix raw = model.ensemble.raw(points, threads);
  Matrix out(points.rows(), static_cast<std::size_t>(model.n_classes()));
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto p = baseline_probabilities(model.kind, model.n_classes(), raw.row(i)).probabilities;
    std::copy(p.begin(), p.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace ocf
