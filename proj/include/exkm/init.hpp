#pragma once

#include <numeric>
#include <random>
#include <vector>

#include "exkm/core.hpp"

namespace exkm {

/// Unbiased draw from [0, n) by rejection; portable across standard libraries.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % n + 1) % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x > limit);
  return x % n;
}

/// First k positions of a forward Fisher-Yates shuffle of 0..n-1.
inline std::vector<index_t> select_initial_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error("k must be at least 1");
  if (k > n) throw Error("k (" + std::to_string(k) + ") exceeds the number of samples (" + std::to_string(n) + ")");
  std::mt19937_64 rng(seed);
  std::vector<index_t> perm(n);
  std::iota(perm.begin(), perm.end(), index_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_below(rng, n - i);
    std::swap(perm[i], perm[j]);
  }
  perm.resize(k);
  return perm;
}

inline CentroidState centroids_from_rows(const DataMatrix& data, std::span<const index_t> rows) {
  CentroidState c(rows.size(), data.dim());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    auto src = data.row(rows[j]);
    std::copy(src.begin(), src.end(), c.row(j).begin());
    c.sq_norms[j] = data.sq_norm(rows[j]);
  }
  return c;
}

/// k distinct sample rows chosen uniformly without replacement.
inline CentroidState init_centroids(const DataMatrix& data, std::size_t k, std::uint64_t seed) {
  const auto rows = select_initial_indices(data.n_samples(), k, seed);
  return centroids_from_rows(data, rows);
}

}  // namespace exkm
