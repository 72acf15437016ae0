#include "ocf/serialization.hpp"

#include <fstream>

namespace ocf {

using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "ocf-model";

json column_to_json(const ColumnMeta& c) {
  return {{"name", c.name},         {"kind", to_string(c.kind)}, {"min", c.observed_min}, {"max", c.observed_max},
          {"std_dev", c.std_dev}, {"mean", c.mean},            {"median", c.median}};
}

ColumnMeta column_from_json(const json& j) {
  ColumnMeta c;
  c.name = j.at("name").get<std::string>();
  c.kind = covariate_kind_from_string(j.at("kind").get<std::string>());
  c.observed_min = j.at("min").get<double>();
  c.observed_max = j.at("max").get<double>();
  c.std_dev = j.at("std_dev").get<double>();
  c.mean = j.at("mean").get<double>();
  c.median = j.at("median").get<double>();
  return c;
}

json tree_to_json(const Tree& tree) {
  const std::size_t n = tree.nodes.size();
  std::vector<std::int32_t> feature(n);
  std::vector<double> threshold(n);
  std::vector<std::uint32_t> left(n), right(n), n_train(n), begin(n), end(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = tree.nodes[i];
    feature[i] = node.feature;
    threshold[i] = node.threshold;
    left[i] = node.left;
    right[i] = node.right;
    n_train[i] = node.n_train;
    begin[i] = node.rows_begin;
    end[i] = node.rows_end;
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},         {"right", right},
          {"n_train", n_train}, {"rows_begin", begin},    {"rows_end", end},     {"rows", tree.rows},
          {"grown_on", tree.grown_on}};
}

Tree tree_from_json(const json& j, std::span<const std::uint8_t> targets) {
  const auto feature = j.at("feature").get<std::vector<std::int32_t>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<std::uint32_t>>();
  const auto right = j.at("right").get<std::vector<std::uint32_t>>();
  const auto n_train = j.at("n_train").get<std::vector<std::uint32_t>>();
  const auto begin = j.at("rows_begin").get<std::vector<std::uint32_t>>();
  const auto end = j.at("rows_end").get<std::vector<std::uint32_t>>();
  const std::size_t n = feature.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || n_train.size() != n ||
      begin.size() != n || end.size() != n) {
    throw ModelFormatError("tree node arrays have inconsistent lengths");
  }
  Tree tree;
  tree.rows = j.at("rows").get<std::vector<std::uint32_t>>();
  tree.grown_on = j.at("grown_on").get<std::vector<std::uint32_t>>();
  tree.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = tree.nodes[i];
    node.feature = feature[i];
    node.threshold = threshold[i];
    node.left = left[i];
    node.right = right[i];
    node.n_train = n_train[i];
    node.rows_begin = begin[i];
    node.rows_end = end[i];
    if (begin[i] > end[i] || end[i] > tree.rows.size()) throw ModelFormatError("tree row range out of bounds");
    if (!node.is_leaf() && (left[i] >= n || right[i] >= n || left[i] <= i || right[i] <= i)) {
      throw ModelFormatError("tree child index out of range");
    }
  }
  for (auto r : tree.rows) {
    if (r >= targets.size()) throw ModelFormatError("tree row refers outside the estimation sample");
  }
  finalize_tree(tree, targets);
  return tree;
}

}  // namespace

json params_to_json(const ForestParams& p) {
  return {{"n_trees", p.n_trees},
          {"subsample_fraction", p.subsample_fraction},
          {"mtry", p.mtry},
          {"alpha", p.alpha},
          {"min_leaf", p.min_leaf},
          {"honest_fraction", p.honest_fraction},
          {"omega", p.omega},
          {"seed", p.seed},
          {"normalize", p.normalize},
          {"stratify_honest", p.stratify_honest}};
}

ForestParams params_from_json(const json& j) {
  ForestParams p;
  p.n_trees = j.at("n_trees").get<std::size_t>();
  p.subsample_fraction = j.at("subsample_fraction").get<double>();
  p.mtry = j.at("mtry").get<std::size_t>();
  p.alpha = j.at("alpha").get<double>();
  p.min_leaf = j.at("min_leaf").get<std::size_t>();
  p.honest_fraction = j.at("honest_fraction").get<double>();
  p.omega = j.at("omega").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.normalize = j.at("normalize").get<bool>();
  p.stratify_honest = j.value("stratify_honest", false);
  return p;
}

json model_to_json(const ForestEnsemble& model) {
  json columns = json::array();
  for (const auto& c : model.columns) columns.push_back(column_to_json(c));
  json forests = json::array();
  for (const auto& forest : model.forests) {
    json trees = json::array();
    for (const auto& tree : forest.trees) trees.push_back(tree_to_json(tree));
    forests.push_back({{"target", to_string(forest.target.kind)}, {"m", forest.target.m}, {"trees", std::move(trees)}});
  }
  return {{"format", kFormatTag},
          {"version", kModelFormatVersion},
          {"estimator", to_string(model.kind)},
          {"n_classes", model.n_classes},
          {"params", params_to_json(model.params)},
          {"columns", std::move(columns)},
          {"split", {{"train", model.split.train}, {"honest", model.split.honest}}},
          {"estimation_rows", model.estimation_rows},
          {"estimation_outcomes", model.estimation_outcomes},
          {"forests", std::move(forests)}};
}

ForestEnsemble model_from_json(const json& j) {
  try {
    if (j.value("format", std::string()) != kFormatTag) throw ModelFormatError("not an ocf model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw ModelFormatError("unsupported model format version " + std::to_string(version));
    }
    ForestEnsemble model;
    model.kind = estimator_kind_from_string(j.at("estimator").get<std::string>());
    model.n_classes = j.at("n_classes").get<int>();
    model.params = params_from_json(j.at("params"));
    for (const auto& c : j.at("columns")) model.columns.push_back(column_from_json(c));
    model.split.train = j.at("split").at("train").get<std::vector<std::uint32_t>>();
    model.split.honest = j.at("split").at("honest").get<std::vector<std::uint32_t>>();
    model.estimation_rows = j.at("estimation_rows").get<std::vector<std::uint32_t>>();
    model.estimation_outcomes = j.at("estimation_outcomes").get<std::vector<int>>();
    if (model.n_classes < 2) throw ModelFormatError("model needs at least two classes");
    if (model.columns.empty()) throw ModelFormatError("model has no covariate columns");
    if (model.estimation_rows.size() != model.estimation_outcomes.size()) {
      throw ModelFormatError("estimation rows and outcomes differ in length");
    }
    for (int y : model.estimation_outcomes) {
      if (y < 1 || y > model.n_classes) throw ModelFormatError("estimation outcome out of range");
    }

    for (const auto& f : j.at("forests")) {
      ClassForest forest;
      forest.target.kind = target_kind_from_string(f.at("target").get<std::string>());
      forest.target.m = f.at("m").get<int>();
      std::vector<std::uint8_t> targets;
      targets.reserve(model.estimation_outcomes.size());
      for (int y : model.estimation_outcomes) targets.push_back(forest.target.target(y));
      for (const auto& t : f.at("trees")) {
        forest.trees.push_back(tree_from_json(t, targets));
        for (const auto& node : forest.trees.back().nodes) {
          if (!node.is_leaf() && static_cast<std::size_t>(node.feature) >= model.columns.size()) {
            throw ModelFormatError("split feature out of range");
          }
        }
      }
      model.forests.push_back(std::move(forest));
    }
    if (model.forests.empty()) throw ModelFormatError("model has no forests");
    return model;
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  } catch (const DataError& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ForestEnsemble& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelFormatError("cannot write " + path.string());
  out << model_to_json(model).dump();
  out.close();
  if (!out) throw ModelFormatError("failed writing " + path.string());
}

ForestEnsemble load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError("cannot open model file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ModelFormatError("model file " + path.string() + " is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace ocf
