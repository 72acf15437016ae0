#include "ocf/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ocf/parallel.hpp"

namespace ocf {

namespace {

constexpr std::uint64_t kSplitStream = 0x5350'4c49'54ULL;  // "SPLIT"
constexpr std::uint64_t kTreeStream = 0x5452'4545ULL;      // "TREE"

}  // namespace

std::size_t ForestParams::resolved_mtry(std::size_t k) const {
  if (mtry > 0) return mtry;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(k)))));
}

std::vector<std::string> ForestParams::validate(std::size_t k) const {
  std::vector<std::string> warnings;
  if (n_trees < 1) throw ParamError("number of trees must be at least 1");
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
    throw ParamError("subsample fraction must lie in (0, 1]");
  }
  const auto m = resolved_mtry(k);
  if (m < 1 || m > k) throw ParamError("mtry must lie in [1, " + std::to_string(k) + "]");
  if (!(alpha > 0.0 && alpha <= 0.5)) throw ParamError("alpha must lie in (0, 0.5]");
  if (alpha > kAlphaTheoryBound) {
    warnings.push_back("alpha exceeds 0.2 asymptotic requirement; proceeding");
  }
  if (min_leaf < 1) throw ParamError("minimum leaf size must be at least 1");
  if (!(honest_fraction >= 0.0 && honest_fraction < 1.0)) {
    throw ParamError("honest fraction must lie in [0, 1)");
  }
  if (!(omega > 0.0)) throw ParamError("omega must be positive");
  return warnings;
}

std::uint32_t Tree::leaf_of(std::span<const double> w) const {
  std::uint32_t id = 0;
  while (!nodes[id].is_leaf()) {
    const auto& node = nodes[id];
    id = w[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return id;
}

double Tree::predict(std::span<const double> w) const {
  const auto& node = value_node_at(w);
  if (node.n_rows() == 0) return 0.0;
  return static_cast<double>(node.positives) / static_cast<double>(node.n_rows());
}

namespace {

class Grower {
 public:
  Grower(const Indicators& ind, const Matrix& covariates, const GrowConfig& config, Rng& rng)
      : ind_(ind), covariates_(covariates), config_(config), rng_(rng) {
    features_.resize(covariates.cols());
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  Tree grow(std::span<const std::uint32_t> train_rows) {
    rows_.assign(train_rows.begin(), train_rows.end());
    tree_.nodes.clear();
    tree_.grown_on.assign(train_rows.begin(), train_rows.end());
    std::sort(tree_.grown_on.begin(), tree_.grown_on.end());
    build(0, rows_.size(), 0);
    return std::move(tree_);
  }

 private:
  std::uint32_t build(std::size_t begin, std::size_t end, std::uint32_t parent) {
    const auto id = static_cast<std::uint32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.nodes[id].parent = parent;
    tree_.nodes[id].n_train = static_cast<std::uint32_t>(end - begin);

    const std::size_t n = end - begin;
    const auto& rules = config_.rules;
    if (n < 2 * min_child_size(n, rules.alpha, rules.min_leaf)) return id;

    rng_.partial_shuffle(std::span(features_), config_.mtry);
    const auto candidates = std::span<const std::size_t>(features_).first(config_.mtry);
    const auto node_rows = std::span<const std::uint32_t>(rows_).subspan(begin, n);
    const auto split = best_split(node_rows, ind_, covariates_, candidates, rules, workspace_);
    if (!split) return id;

    const auto j = split->feature;
    const double t = split->threshold;
    const auto mid = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                    rows_.begin() + static_cast<std::ptrdiff_t>(end),
                                    [&](std::uint32_t r) { return covariates_(r, j) <= t; });
    const auto split_at = static_cast<std::size_t>(mid - rows_.begin());

    tree_.nodes[id].feature = static_cast<std::int32_t>(j);
    tree_.nodes[id].threshold = t;
    const auto left = build(begin, split_at, id);
    const auto right = build(split_at, end, id);
    tree_.nodes[id].left = left;
    tree_.nodes[id].right = right;
    return id;
  }

  const Indicators& ind_;
  const Matrix& covariates_;
  const GrowConfig& config_;
  Rng& rng_;
  std::vector<std::size_t> features_;
  std::vector<std::uint32_t> rows_;
  SplitWorkspace workspace_;
  Tree tree_;
};

}  // namespace

Tree grow_tree(std::span<const std::uint32_t> train_rows, const Indicators& ind, const Matrix& covariates,
               const GrowConfig& config, Rng& rng) {
  Grower grower(ind, covariates, config, rng);
  return grower.grow(train_rows);
}

void fill_leaves(Tree& tree, std::span<const std::uint32_t> positions, std::span<const std::uint32_t> dataset_rows,
                 const Matrix& covariates, std::span<const std::uint8_t> targets) {
  auto& nodes = tree.nodes;
  std::vector<std::uint32_t> leaf(positions.size());
  std::vector<std::uint32_t> count(nodes.size(), 0);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    leaf[i] = tree.leaf_of(covariates.row(dataset_rows[i]));
    ++count[leaf[i]];
  }
  // Nodes are stored in preorder, so visiting them by index lays leaves out
  // depth-first and every subtree's rows end up contiguous.
  std::uint32_t offset = 0;
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    if (!nodes[id].is_leaf()) continue;
    nodes[id].rows_begin = offset;
    offset += count[id];
    nodes[id].rows_end = nodes[id].rows_begin;
  }
  tree.rows.assign(positions.size(), 0);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    tree.rows[nodes[leaf[i]].rows_end++] = positions[i];
  }
  for (std::size_t id = nodes.size(); id-- > 0;) {
    auto& node = nodes[id];
    if (node.is_leaf()) continue;
    node.rows_begin = nodes[node.left].rows_begin;
    node.rows_end = nodes[node.right].rows_end;
  }
  finalize_tree(tree, targets);
}

void finalize_tree(Tree& tree, std::span<const std::uint8_t> targets) {
  auto& nodes = tree.nodes;
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    if (nodes[id].is_leaf()) continue;
    nodes[nodes[id].left].parent = static_cast<std::uint32_t>(id);
    nodes[nodes[id].right].parent = static_cast<std::uint32_t>(id);
  }
  for (std::size_t id = nodes.size(); id-- > 0;) {
    auto& node = nodes[id];
    if (node.is_leaf()) {
      node.positives = 0;
      for (auto p : tree.rows_of(node)) node.positives += targets[p];
    } else {
      node.positives = nodes[node.left].positives + nodes[node.right].positives;
    }
  }
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    auto v = static_cast<std::uint32_t>(id);
    while (nodes[v].n_rows() == 0 && v != 0) v = nodes[v].parent;
    nodes[id].value_node = v;
  }
}

const char* to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::ordered_class: return "ordered_class";
    case TargetKind::class_indicator: return "class_indicator";
    case TargetKind::cumulative: return "cumulative";
  }
  return "?";
}

TargetKind target_kind_from_string(const std::string& text) {
  if (text == "ordered_class") return TargetKind::ordered_class;
  if (text == "class_indicator") return TargetKind::class_indicator;
  if (text == "cumulative") return TargetKind::cumulative;
  throw ParamError("unknown target kind '" + text + "'");
}

Indicators ForestTarget::indicators(std::span<const int> outcome) const {
  switch (kind) {
    case TargetKind::ordered_class: return ordered_class_indicators(outcome, m);
    case TargetKind::class_indicator: return class_indicators(outcome, m);
    case TargetKind::cumulative: return cumulative_indicators(outcome, m);
  }
  return {};
}

std::uint8_t ForestTarget::target(int y) const {
  return kind == TargetKind::cumulative ? (y <= m ? 1 : 0) : (y == m ? 1 : 0);
}

double ClassForest::predict(std::span<const double> w) const {
  double sum = 0.0;
  for (const auto& tree : trees) sum += tree.predict(w);
  return sum / static_cast<double>(trees.size());
}

std::vector<double> ClassForest::weights(std::span<const double> w, std::size_t n_estimation) const {
  std::vector<double> out(n_estimation, 0.0);
  for (const auto& tree : trees) {
    const auto& node = tree.value_node_at(w);
    if (node.n_rows() == 0) continue;
    const double share = 1.0 / static_cast<double>(node.n_rows());
    for (auto p : tree.rows_of(node)) out[p] += share;
  }
  const double inv_b = 1.0 / static_cast<double>(trees.size());
  for (auto& x : out) x *= inv_b;
  return out;
}

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::ocf: return "ocf";
    case EstimatorKind::multinomial: return "multinomial";
    case EstimatorKind::ordered_cumulative: return "ordered_cumulative";
  }
  return "?";
}

EstimatorKind estimator_kind_from_string(const std::string& text) {
  if (text == "ocf") return EstimatorKind::ocf;
  if (text == "multinomial") return EstimatorKind::multinomial;
  if (text == "ordered_cumulative") return EstimatorKind::ordered_cumulative;
  throw ParamError("unknown estimator kind '" + text + "'");
}

std::vector<double> ForestEnsemble::raw(std::span<const double> w) const {
  if (w.size() != k()) {
    throw DataError("point has " + std::to_string(w.size()) + " covariates, model expects " + std::to_string(k()));
  }
  std::vector<double> out;
  out.reserve(forests.size());
  for (const auto& f : forests) out.push_back(f.predict(w));
  return out;
}

Matrix ForestEnsemble::raw(const Matrix& points, std::size_t threads) const {
  constexpr std::size_t kChunk = 256;
  if (points.cols() != k()) {
    throw DataError("points have " + std::to_string(points.cols()) + " covariates, model expects " +
                    std::to_string(k()));
  }
  Matrix out(points.rows(), forests.size());
  const std::size_t chunks = (points.rows() + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t lo = c * kChunk;
    const std::size_t hi = std::min(points.rows(), lo + kChunk);
    for (std::size_t f = 0; f < forests.size(); ++f) {
      const auto& trees = forests[f].trees;
      for (std::size_t i = lo; i < hi; ++i) out(i, f) = 0.0;
      // Tree-major traversal keeps one tree hot in cache; each point still
      // sums its trees in index order, matching the single-point path.
      for (const auto& tree : trees) {
        for (std::size_t i = lo; i < hi; ++i) out(i, f) += tree.predict(points.row(i));
      }
      for (std::size_t i = lo; i < hi; ++i) out(i, f) /= static_cast<double>(trees.size());
    }
  });
  return out;
}

ForestEnsemble fit_ensemble(const Dataset& data, const ForestParams& params, EstimatorKind kind,
                            std::span<const ForestTarget> targets, std::size_t threads) {
  validate(data);
  params.validate(data.k());

  ForestEnsemble model;
  model.kind = kind;
  model.params = params;
  model.n_classes = data.n_classes;
  model.columns = data.columns;

  if (params.honest()) {
    model.split = split_honest(data, params.honest_fraction, derive_seed(params.seed, {kSplitStream}),
                               params.stratify_honest);
    model.estimation_rows = model.split.honest;
  } else {
    model.split.train.resize(data.n());
    std::iota(model.split.train.begin(), model.split.train.end(), 0U);
    model.estimation_rows = model.split.train;
  }
  for (auto r : model.estimation_rows) model.estimation_outcomes.push_back(data.outcome[r]);

  const auto& pool = model.split.train;
  const auto subsample =
      static_cast<std::size_t>(std::floor(params.subsample_fraction * static_cast<double>(pool.size()) + 0.5));
  if (subsample < 2 * params.min_leaf) {
    throw ParamError("subsample of " + std::to_string(subsample) + " rows is smaller than twice the minimum leaf size");
  }

  GrowConfig config;
  config.mtry = params.resolved_mtry(data.k());
  config.rules.alpha = params.alpha;
  config.rules.min_leaf = params.min_leaf;

  const std::size_t n_forests = targets.size();
  std::vector<Indicators> indicators;
  std::vector<std::vector<std::uint8_t>> estimation_targets(n_forests);
  for (std::size_t f = 0; f < n_forests; ++f) {
    indicators.push_back(targets[f].indicators(data.outcome));
    for (int y : model.estimation_outcomes) estimation_targets[f].push_back(targets[f].target(y));
    model.forests.push_back({targets[f], std::vector<Tree>(params.n_trees)});
  }

  std::vector<std::uint32_t> honest_positions(model.estimation_rows.size());
  std::iota(honest_positions.begin(), honest_positions.end(), 0U);

  parallel_for(n_forests * params.n_trees, threads, [&](std::size_t task) {
    const std::size_t f = task / params.n_trees;
    const std::size_t b = task % params.n_trees;
    GrowConfig tree_config = config;
    tree_config.rules.criterion = targets[f].criterion();
    Rng rng(derive_seed(params.seed, {kTreeStream, static_cast<std::uint64_t>(targets[f].m), b}));

    std::vector<std::uint32_t> drawn(pool.begin(), pool.end());
    rng.partial_shuffle(std::span(drawn), subsample);
    drawn.resize(subsample);

    Tree tree = grow_tree(drawn, indicators[f], data.covariates, tree_config, rng);
    if (params.honest()) {
      fill_leaves(tree, honest_positions, model.estimation_rows, data.covariates, estimation_targets[f]);
    } else {
      // Adaptive: estimation positions coincide with dataset rows.
      fill_leaves(tree, tree.grown_on, tree.grown_on, data.covariates, estimation_targets[f]);
    }
    model.forests[f].trees[b] = std::move(tree);
  });
  return model;
}

OcfModel fit(const Dataset& data, const ForestParams& params, std::size_t threads) {
  std::vector<ForestTarget> targets;
  for (int m = 1; m <= data.n_classes; ++m) targets.push_back({TargetKind::ordered_class, m});
  return OcfModel{fit_ensemble(data, params, EstimatorKind::ocf, targets, threads)};
}

bool normalize_in_place(std::span<double> values) {
  const double sum = std::accumulate(values.begin(), values.end(), 0.0);
  if (!(sum > 0.0)) {
    std::fill(values.begin(), values.end(), 1.0 / static_cast<double>(values.size()));
    return true;
  }
  for (auto& v : values) v /= sum;
  return false;
}

std::vector<double> predict_raw(const OcfModel& model, std::span<const double> w) {
  return model.ensemble.raw(w);
}

std::vector<double> predict(const OcfModel& model, std::span<const double> w) {
  auto p = predict_raw(model, w);
  if (model.ensemble.params.normalize) normalize_in_place(p);
  return p;
}

Matrix predict(const OcfModel& model, const Matrix& points, std::size_t threads) {
  Matrix p = model.ensemble.raw(points, threads);
  if (model.ensemble.params.normalize) {
    for (std::size_t i = 0; i < p.rows(); ++i) normalize_in_place(p.row(i));
  }
  return p;
}

WeightVector compute_weights(const OcfModel& model, int m, std::span<const double> w) {
  WeightVector out;
  out.point.assign(w.begin(), w.end());
  out.m = m;
  out.weights = model.forest(m).weights(w, model.ensemble.n_estimation());
  return out;
}

}  // namespace ocf
