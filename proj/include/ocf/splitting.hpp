#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ocf/dataset.hpp"

namespace ocf {

/// Sufficient statistics of a node for class m:
/// n, #{Y <= m} and #{Y <= m-1}.
struct NodeStats {
  std::size_t n = 0;
  std::size_t count_le_m = 0;
  std::size_t count_le_m1 = 0;
};

/// Which cumulative surface a statistic refers to.
enum class Surface { upper, lower };

/// Share of node rows at or below the surface's class.
double node_mu(const NodeStats& stats, Surface which);

/// Within-node mean squared deviation of the cumulative indicator.
double node_mse(const NodeStats& stats, Surface which);

/// Within-node error correlation between the two cumulative indicators.
double node_ec(const NodeStats& stats);

/// MSE_m + MSE_{m-1} - 2 EC for one child.
double child_score(const NodeStats& stats);

/// In-node share of class m, mu_m - mu_{m-1}.
double class_share(const NodeStats& stats);

/// How a child's impurity is scored. `correlation` is the ordered-correlation
/// criterion; `single_surface` scores the upper indicator alone (a standard
/// regression-forest criterion on a binary target).
enum class Criterion : std::uint8_t { correlation, single_surface };

/// Child score under the chosen criterion.
double criterion_score(const NodeStats& stats, Criterion criterion);

/// Per-row indicator pair (upper, lower) with lower <= upper. For the ordered
/// correlation forest of class m these are 1(Y <= m) and 1(Y <= m-1); the
/// leaf target is always upper - lower.
struct Indicators {
  std::vector<std::uint8_t> upper;
  std::vector<std::uint8_t> lower;

  std::size_t size() const { return upper.size(); }
  int target(std::size_t row) const { return upper[row] - lower[row]; }
};

/// 1(Y <= m) and 1(Y <= m-1), with the conventions mu_0 = 0 and mu_M = 1.
Indicators ordered_class_indicators(std::span<const int> outcome, int m);

/// upper = 1(Y == m), lower = 0.
Indicators class_indicators(std::span<const int> outcome, int m);

/// upper = 1(Y <= m), lower = 0.
Indicators cumulative_indicators(std::span<const int> outcome, int m);

NodeStats node_stats(std::span<const std::uint32_t> rows, const Indicators& ind);

/// Axis-aligned split: rows with covariate <= threshold go left.
struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  double score = 0.0;
};

struct SplitRules {
  double alpha = 0.05;
  std::size_t min_leaf = 5;
  Criterion criterion = Criterion::correlation;
};

/// Smallest child allowed for a parent of `n_node` rows:
/// max(ceil(alpha * n_node), min_leaf).
std::size_t min_child_size(std::size_t n_node, double alpha, std::size_t min_leaf);

/// Midpoint between two consecutive distinct values, guaranteed to satisfy
/// lo <= t < hi.
double midpoint_threshold(double lo, double hi);

/// Minimizes score(left) + score(right) over every feature in `features` and
/// every midpoint between consecutive distinct node values, keeping only
/// candidates whose children both hold at least min_child_size rows. Ties go
/// to the lowest feature index, then the lowest threshold. Returns nullopt if
/// no candidate qualifies.
std::optional<SplitCandidate> best_split(std::span<const std::uint32_t> rows, const Indicators& ind,
                                         const Matrix& covariates, std::span<const std::size_t> features,
                                         const SplitRules& rules);

/// Reusable scratch space for best_split; avoids per-node allocations.
struct SplitWorkspace {
  struct Entry {
    double value;
    std::uint8_t upper;
    std::uint8_t lower;
  };
  std::vector<Entry> entries;
  std::vector<std::size_t> sorted_features;
};

std::optional<SplitCandidate> best_split(std::span<const std::uint32_t> rows, const Indicators& ind,
                                         const Matrix& covariates, std::span<const std::size_t> features,
                                         const SplitRules& rules, SplitWorkspace& workspace);

}  // namespace ocf
