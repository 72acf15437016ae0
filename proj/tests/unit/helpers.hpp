#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ocf/dataset.hpp"
#include "ocf/forest.hpp"
#include "ocf/rng.hpp"
#include "ocf/synthetic.hpp"

namespace testing {

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ocf_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Small synthetic sample from design 1 with cheap thresholds.
inline ocf::Dataset design_sample(std::size_t n, std::uint64_t seed, int design = 1) {
  using namespace ocf::synthetic;
  const auto d = design_from_int(design);
  const auto t = compute_thresholds(d, 11, 20'000);
  return simulate_sample(d, t, n, seed);
}

// Random covariates with an outcome loosely driven by the first column.
inline ocf::Dataset random_dataset(std::size_t n, std::size_t k, int M, std::uint64_t seed) {
  ocf::Rng rng(seed);
  ocf::Matrix x(n, k);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) x(i, j) = j % 3 == 2 ? static_cast<double>(rng.below(3)) : rng.normal();
    const double latent = x(i, 0) + rng.normal();
    int label = static_cast<int>(std::floor((latent + 2.0) / 4.0 * M)) + 1;
    y[i] = std::clamp(label, 1, M);
  }
  for (int m = 1; m <= M; ++m) y[static_cast<std::size_t>(m - 1)] = m;  // every class present
  return ocf::make_dataset(std::move(x), std::move(y), {}, M);
}

inline ocf::ForestParams small_params(std::size_t trees = 20, std::uint64_t seed = 5) {
  ocf::ForestParams p;
  p.n_trees = trees;
  p.seed = seed;
  return p;
}

inline ocf::Matrix random_points(std::size_t rows, std::size_t k, std::uint64_t seed) {
  ocf::Rng rng(seed);
  ocf::Matrix p(rows, k);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < k; ++j) p(i, j) = rng.normal();
  }
  return p;
}

}  // namespace testing
