#include "ocf/splitting.hpp"

#include <algorithm>
#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

namespace ocf {

namespace {

// Scores closer than this are compared exactly.
constexpr double kTieBand = 1e-11;

// Count behind the child score: every criterion reduces to c (n - c) / n^2.
std::size_t score_count(const NodeStats& s, Criterion criterion) {
  return criterion == Criterion::correlation ? s.count_le_m - s.count_le_m1 : s.count_le_m;
}

template <typename Int>
bool exact_less_as(const NodeStats& al, const NodeStats& ar, const NodeStats& bl, const NodeStats& br,
                   Criterion criterion) {
  // a_l + a_r < b_l + b_r with x = c (n - c) / n^2, cross-multiplied.
  const auto term = [&](const NodeStats& s) {
    const Int c = static_cast<Int>(score_count(s, criterion));
    return c * (static_cast<Int>(s.n) - c);
  };
  const auto sq = [](const NodeStats& s) { return static_cast<Int>(s.n) * static_cast<Int>(s.n); };
  const Int a_num = term(al) * sq(ar) + term(ar) * sq(al);
  const Int a_den = sq(al) * sq(ar);
  const Int b_num = term(bl) * sq(br) + term(br) * sq(bl);
  const Int b_den = sq(bl) * sq(br);
  return a_num * b_den < b_num * a_den;
}

// Exact comparison of two candidate scores from their counts.
bool exact_less(const NodeStats& al, const NodeStats& ar, const NodeStats& bl, const NodeStats& br,
                Criterion criterion) {
  // Products reach n^8; 128 bits hold that for n below 2^15.
  if (al.n + ar.n < (1U << 15) && bl.n + br.n < (1U << 15)) {
    return exact_less_as<__int128>(al, ar, bl, br, criterion);
  }
  return exact_less_as<boost::multiprecision::cpp_int>(al, ar, bl, br, criterion);
}

}  // namespace

double node_mu(const NodeStats& stats, Surface which) {
  const auto count = which == Surface::upper ? stats.count_le_m : stats.count_le_m1;
  return static_cast<double>(count) / static_cast<double>(stats.n);
}

// For a binary indicator the mean squared deviation reduces to mu (1 - mu).
double node_mse(const NodeStats& stats, Surface which) {
  const double mu = node_mu(stats, which);
  return mu * (1.0 - mu);
}

// Y <= m-1 implies Y <= m, so the mean of the indicator product is mu_{m-1}.
double node_ec(const NodeStats& stats) {
  const double mu_m = node_mu(stats, Surface::upper);
  const double mu_m1 = node_mu(stats, Surface::lower);
  return mu_m1 - mu_m * mu_m1;
}

double child_score(const NodeStats& stats) {
  return node_mse(stats, Surface::upper) + node_mse(stats, Surface::lower) - 2.0 * node_ec(stats);
}

double class_share(const NodeStats& stats) {
  return static_cast<double>(stats.count_le_m - stats.count_le_m1) / static_cast<double>(stats.n);
}

double criterion_score(const NodeStats& stats, Criterion criterion) {
  return criterion == Criterion::correlation ? child_score(stats) : node_mse(stats, Surface::upper);
}

Indicators ordered_class_indicators(std::span<const int> outcome, int m) {
  Indicators ind;
  ind.upper.reserve(outcome.size());
  ind.lower.reserve(outcome.size());
  for (int y : outcome) {
    ind.upper.push_back(y <= m ? 1 : 0);
    ind.lower.push_back(y <= m - 1 ? 1 : 0);
  }
  return ind;
}

Indicators class_indicators(std::span<const int> outcome, int m) {
  Indicators ind;
  for (int y : outcome) ind.upper.push_back(y == m ? 1 : 0);
  ind.lower.assign(outcome.size(), 0);
  return ind;
}

Indicators cumulative_indicators(std::span<const int> outcome, int m) {
  Indicators ind;
  for (int y : outcome) ind.upper.push_back(y <= m ? 1 : 0);
  ind.lower.assign(outcome.size(), 0);
  return ind;
}

NodeStats node_stats(std::span<const std::uint32_t> rows, const Indicators& ind) {
  NodeStats s;
  s.n = rows.size();
  for (auto r : rows) {
    s.count_le_m += ind.upper[r];
    s.count_le_m1 += ind.lower[r];
  }
  return s;
}

std::size_t min_child_size(std::size_t n_node, double alpha, std::size_t min_leaf) {
  // The small offset keeps products such as 0.2 * 10 from rounding up past an integer.
  const auto by_fraction = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n_node) - 1e-9));
  return std::max(by_fraction, min_leaf);
}

double midpoint_threshold(double lo, double hi) {
  const double t = lo + 0.5 * (hi - lo);
  return t < hi ? t : lo;
}

std::optional<SplitCandidate> best_split(std::span<const std::uint32_t> rows, const Indicators& ind,
                                         const Matrix& covariates, std::span<const std::size_t> features,
                                         const SplitRules& rules) {
  SplitWorkspace workspace;
  return best_split(rows, ind, covariates, features, rules, workspace);
}

std::optional<SplitCandidate> best_split(std::span<const std::uint32_t> rows, const Indicators& ind,
                                         const Matrix& covariates, std::span<const std::size_t> features,
                                         const SplitRules& rules, SplitWorkspace& workspace) {
  const std::size_t n = rows.size();
  const std::size_t min_child = min_child_size(n, rules.alpha, rules.min_leaf);
  if (n < 2 * min_child || n < 2) return std::nullopt;

  auto& sorted_features = workspace.sorted_features;
  sorted_features.assign(features.begin(), features.end());
  std::sort(sorted_features.begin(), sorted_features.end());

  NodeStats total;
  total.n = n;
  for (auto r : rows) {
    total.count_le_m += ind.upper[r];
    total.count_le_m1 += ind.lower[r];
  }

  std::optional<SplitCandidate> best;
  NodeStats best_left, best_right;
  auto& entries = workspace.entries;
  entries.resize(n);
  for (const std::size_t j : sorted_features) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = rows[i];
      entries[i] = {covariates(r, j), ind.upper[r], ind.lower[r]};
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.value < b.value; });

    NodeStats left;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left.n;
      left.count_le_m += entries[i].upper;
      left.count_le_m1 += entries[i].lower;
      if (left.n < min_child) continue;
      if (n - left.n < min_child) break;
      if (!(entries[i].value < entries[i + 1].value)) continue;
      const NodeStats right{n - left.n, total.count_le_m - left.count_le_m, total.count_le_m1 - left.count_le_m1};
      const double score = criterion_score(left, rules.criterion) + criterion_score(right, rules.criterion);
      // Candidates arrive by feature, then threshold, so only a strictly
      // smaller score may replace the incumbent.
      bool better = !best || score < best->score - kTieBand;
      if (!better && score <= best->score + kTieBand) {
        better = exact_less(left, right, best_left, best_right, rules.criterion);
      }
      if (better) {
        best = SplitCandidate{j, midpoint_threshold(entries[i].value, entries[i + 1].value), left.n, right.n, score};
        best_left = left;
        best_right = right;
      }
    }
  }
  return best;
}

}  // namespace ocf
