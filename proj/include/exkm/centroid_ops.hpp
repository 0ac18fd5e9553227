#pragma once

// Per-round centroid-side quantities: inter-centroid distances, nearest-other
// separations, displacement extremes, and the shared sample-centroid distance.

#include <algorithm>
#include <vector>

#include "exkm/core.hpp"
#include "exkm/strategy.hpp"

namespace exkm {

inline double sample_distance(const RoundContext& ctx, std::size_t i, std::size_t j) {
  return distance(ctx.data.row(i), ctx.data.sq_norm(i), ctx.centroids.row(j), ctx.centroids.sq_norms[j]);
}

/// Fill c.cc (k x k, symmetric, zero diagonal) and c.s; counts k(k-1)/2 calls.
inline void compute_cc(CentroidState& c, RoundStats& stats) {
  const std::size_t k = c.k;
  c.cc.assign(k * k, 0.0);
  c.s.assign(k, kInf);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t jj = j + 1; jj < k; ++jj) {
      const double d = distance_direct(c.row(j), c.row(jj));
      c.cc[j * k + jj] = d;
      c.cc[jj * k + j] = d;
      c.s[j] = std::min(c.s[j], d);
      c.s[jj] = std::min(c.s[jj], d);
    }
  }
  stats.dist_calcs_centroid += k * (k - 1) / 2;
}

/// Largest and second-largest value of a k-vector, with the argmax, so that
/// max over j != a is O(1).
struct TopTwo {
  double first = 0.0;
  double second = 0.0;
  index_t arg = 0;

  static TopTwo of(std::span<const double> v) {
    TopTwo t{-kInf, -kInf, 0};
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] > t.first) {
        t.second = t.first;
        t.first = v[j];
        t.arg = static_cast<index_t>(j);
      } else if (v[j] > t.second) {
        t.second = v[j];
      }
    }
    if (v.size() < 2) t.second = 0.0;
    if (v.empty()) t.first = 0.0;
    return t;
  }

  double max_except(index_t a) const { return a == arg ? second : first; }
};

/// Nearest and second-nearest under the (distance, index) order.
struct NearestTwo {
  double d1 = kInf;
  double d2 = kInf;
  index_t j1 = std::numeric_limits<index_t>::max();
  index_t j2 = std::numeric_limits<index_t>::max();

  void offer(double d, index_t j) {
    if (closer(d, j, d1, j1)) {
      d2 = d1;
      j2 = j1;
      d1 = d;
      j1 = j;
    } else if (closer(d, j, d2, j2)) {
      d2 = d;
      j2 = j;
    }
  }
};

inline NearestTwo nearest_two(std::span<const double> dist) {
  NearestTwo n;
  for (std::size_t j = 0; j < dist.size(); ++j) n.offer(dist[j], static_cast<index_t>(j));
  return n;
}

}  // namespace exkm
