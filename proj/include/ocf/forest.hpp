#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocf/dataset.hpp"
#include "ocf/rng.hpp"
#include "ocf/splitting.hpp"

namespace ocf {

/// Raised for invalid tuning parameters.
class ParamError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tuning knobs shared by the ordered correlation forest and the baselines.
struct ForestParams {
  std::size_t n_trees = 1000;       // trees per class forest
  double subsample_fraction = 0.5;  // of the training sample, drawn without replacement
  std::size_t mtry = 0;             // 0 means ceil(sqrt(k))
  double alpha = 0.05;              // minimum child fraction per split
  std::size_t min_leaf = 5;
  double honest_fraction = 0.5;     // 0 grows an adaptive forest
  double omega = 0.1;               // finite-difference step in units of std_dev
  std::uint64_t seed = 42;
  bool normalize = true;
  bool stratify_honest = false;

  bool honest() const { return honest_fraction > 0.0; }
  std::size_t resolved_mtry(std::size_t k) const;

  /// Throws ParamError on a violated invariant. Returns warnings for settings
  /// that are allowed but outside the range the asymptotic theory covers.
  std::vector<std::string> validate(std::size_t k) const;

  bool operator==(const ForestParams&) const = default;
};

inline constexpr double kAlphaTheoryBound = 0.2;

/// One node of a tree. Estimation rows of every node form the contiguous range
/// [rows_begin, rows_end) of Tree::rows because leaves are laid out in
/// depth-first order.
struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t parent = 0;
  std::uint32_t n_train = 0;
  std::uint32_t rows_begin = 0;
  std::uint32_t rows_end = 0;
  std::uint32_t positives = 0;
  std::uint32_t value_node = 0;  // leaves: node whose rows define the prediction

  bool is_leaf() const { return feature < 0; }
  std::uint32_t n_rows() const { return rows_end - rows_begin; }
};

class Tree {
 public:
  std::vector<TreeNode> nodes;
  std::vector<std::uint32_t> rows;      // estimation-sample positions grouped by leaf
  std::vector<std::uint32_t> grown_on;  // dataset rows of the training subsample, sorted

  /// Index of the leaf reached by `w`.
  std::uint32_t leaf_of(std::span<const double> w) const;

  /// Node whose estimation rows supply the prediction at `w`: the leaf itself,
  /// or its deepest ancestor holding at least one row when the leaf is empty.
  const TreeNode& value_node_at(std::span<const double> w) const {
    return nodes[nodes[leaf_of(w)].value_node];
  }

  /// Leaf share of the target among estimation rows.
  double predict(std::span<const double> w) const;

  std::span<const std::uint32_t> rows_of(const TreeNode& node) const {
    return std::span(rows).subspan(node.rows_begin, node.n_rows());
  }
};

struct GrowConfig {
  std::size_t mtry = 1;
  SplitRules rules;
};

/// Grows a tree on `train_rows` (dataset row indices). At every node `mtry`
/// features are drawn without replacement; the node becomes a leaf when fewer
/// than 2 * min_child_size rows remain or no admissible split exists.
Tree grow_tree(std::span<const std::uint32_t> train_rows, const Indicators& ind, const Matrix& covariates,
               const GrowConfig& config, Rng& rng);

/// Routes estimation rows through the tree and stores them per leaf.
/// `positions[i]` is the estimation-sample position recorded in Tree::rows,
/// `dataset_rows[i]` the matching covariate row, and `targets[positions[i]]`
/// its 0/1 target.
void fill_leaves(Tree& tree, std::span<const std::uint32_t> positions, std::span<const std::uint32_t> dataset_rows,
                 const Matrix& covariates, std::span<const std::uint8_t> targets);

/// Recomputes parent links, positives and the empty-leaf fallback from the
/// structure and the row ranges.
void finalize_tree(Tree& tree, std::span<const std::uint8_t> targets);

/// What a class forest estimates.
enum class TargetKind : std::uint8_t {
  ordered_class,    // P(Y = m) via the correlation criterion on 1(Y<=m), 1(Y<=m-1)
  class_indicator,  // P(Y = m) via a regression forest on 1(Y = m)
  cumulative,       // P(Y <= m) via a regression forest on 1(Y <= m)
};

const char* to_string(TargetKind kind);
TargetKind target_kind_from_string(const std::string& text);

struct ForestTarget {
  TargetKind kind = TargetKind::ordered_class;
  int m = 1;

  Indicators indicators(std::span<const int> outcome) const;
  Criterion criterion() const {
    return kind == TargetKind::ordered_class ? Criterion::correlation : Criterion::single_surface;
  }
  std::uint8_t target(int y) const;

  bool operator==(const ForestTarget&) const = default;
};

struct ClassForest {
  ForestTarget target;
  std::vector<Tree> trees;

  /// Mean of the tree predictions.
  double predict(std::span<const double> w) const;

  /// Forest weights over the estimation sample: each tree spreads mass 1/B
  /// evenly over the rows of its value node at `w`.
  std::vector<double> weights(std::span<const double> w, std::size_t n_estimation) const;
};

enum class EstimatorKind : std::uint8_t { ocf, multinomial, ordered_cumulative };

const char* to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(const std::string& text);

/// Fitted collection of class forests sharing one estimation sample. In honest
/// mode the estimation sample is the honest half; in adaptive mode it is the
/// full data and each tree's leaves hold its own subsample.
struct ForestEnsemble {
  EstimatorKind kind = EstimatorKind::ocf;
  ForestParams params;
  int n_classes = 0;
  std::vector<ColumnMeta> columns;
  HonestSplit split;
  std::vector<std::uint32_t> estimation_rows;  // dataset rows, by position
  std::vector<int> estimation_outcomes;        // outcomes, by position
  std::vector<ClassForest> forests;

  bool honest() const { return params.honest(); }
  std::size_t n_estimation() const { return estimation_outcomes.size(); }
  std::size_t k() const { return columns.size(); }

  /// Mean tree prediction of every forest at `w`.
  std::vector<double> raw(std::span<const double> w) const;

  /// Raw predictions for every row of `points` (rows x forests).
  Matrix raw(const Matrix& points, std::size_t threads = 1) const;
};

/// Grows one forest per target. Deterministic given params.seed: tree b of the
/// forest for class m uses the substream (seed, m, b) regardless of thread count.
ForestEnsemble fit_ensemble(const Dataset& data, const ForestParams& params, EstimatorKind kind,
                            std::span<const ForestTarget> targets, std::size_t threads = 0);

/// Ordered correlation forest: one honest (or adaptive) forest per class.
struct OcfModel {
  ForestEnsemble ensemble;

  int n_classes() const { return ensemble.n_classes; }
  bool honest() const { return ensemble.honest(); }
  const ClassForest& forest(int m) const { return ensemble.forests.at(static_cast<std::size_t>(m - 1)); }
};

OcfModel fit(const Dataset& data, const ForestParams& params, std::size_t threads = 0);

/// Per-class mean tree predictions, not normalized.
std::vector<double> predict_raw(const OcfModel& model, std::span<const double> w);

/// Per-class probabilities; normalized to sum to one when params.normalize.
std::vector<double> predict(const OcfModel& model, std::span<const double> w);

/// Batch form of predict (rows x classes).
Matrix predict(const OcfModel& model, const Matrix& points, std::size_t threads = 1);

/// Scales a nonnegative vector to unit sum; a zero vector becomes uniform.
/// Returns true when the uniform fallback was used.
bool normalize_in_place(std::span<double> values);

/// Forest weights over the estimation sample for class m at w.
struct WeightVector {
  std::vector<double> point;
  int m = 1;
  std::vector<double> weights;
};

WeightVector compute_weights(const OcfModel& model, int m, std::span<const double> w);

}  // namespace ocf
