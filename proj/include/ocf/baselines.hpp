#pragma once

#include <span>
#include <vector>

#include "ocf/forest.hpp"

namespace ocf {

enum class BaselineKind { multinomial, ordered_cumulative };

/// Forest baselines built from binary regression forests: multinomial
/// (one forest per 1(Y = m)) or ordered (one forest per 1(Y <= m), m < M).
struct BaselineModel {
  BaselineKind kind = BaselineKind::multinomial;
  ForestEnsemble ensemble;

  int n_classes() const { return ensemble.n_classes; }
};

BaselineModel fit_baseline(const Dataset& data, BaselineKind kind, const ForestParams& params,
                           std::size_t threads = 0);

struct BaselinePrediction {
  std::vector<double> probabilities;
  bool uniform_fallback = false;  // raw vector was all zero after truncation
};

/// Multinomial: raw class predictions, normalized. Ordered: differences of
/// cumulative predictions (mu_0 = 0, mu_M = 1), negatives truncated to zero,
/// then normalized.
BaselinePrediction predict_baseline(const BaselineModel& model, std::span<const double> w);

/// Same transformation applied to already-computed raw forest outputs.
BaselinePrediction baseline_probabilities(BaselineKind kind, int n_classes, std::span<const double> raw);

/// Batch prediction (rows x classes).
Matrix predict_baseline(const BaselineModel& model, const Matrix& points, std::size_t threads = 1);

BaselineKind baseline_kind(EstimatorKind kind);
EstimatorKind estimator_kind(BaselineKind kind);

}  // namespace ocf
