#pragma once

// Data model and distance kernels shared by every assignment strategy.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace exkm {

using index_t = std::uint32_t;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

/// Norm-expansion kernel: sqrt(max(0, |a|^2 + |b|^2 - 2 a.b)).
/// Every sample-centroid distance in the library goes through this function.
inline double distance(std::span<const double> a, double a_sq_norm,
                       std::span<const double> b, double b_sq_norm) {
  const double sq = a_sq_norm + b_sq_norm - 2.0 * dot(a, b);
  return std::sqrt(sq > 0.0 ? sq : 0.0);
}

/// sqrt of summed squared differences; accurate for small separations.
/// Used for centroid-centroid quantities (displacements, cc, annuli).
inline double distance_direct(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    acc += t * t;
  }
  return std::sqrt(acc);
}

/// N x d row-major sample matrix with cached squared norms. Immutable once built.
class DataMatrix {
 public:
  DataMatrix() = default;

  DataMatrix(std::size_t n_samples, std::size_t dim, std::vector<double> values)
      : n_(n_samples), d_(dim), values_(std::move(values)) {
    if (n_ == 0 || d_ == 0) throw Error("dataset must have at least one sample and one dimension");
    if (values_.size() != n_ * d_) throw Error("dataset value count does not match n_samples * dim");
    sq_norms_.resize(n_);
    max_norm_ = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      auto r = row(i);
      for (double v : r)
        if (!std::isfinite(v)) throw Error("non-finite value in sample " + std::to_string(i));
      sq_norms_[i] = dot(r, r);
      max_norm_ = std::max(max_norm_, std::sqrt(sq_norms_[i]));
    }
  }

  std::size_t n_samples() const { return n_; }
  std::size_t dim() const { return d_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * d_, d_}; }
  double sq_norm(std::size_t i) const { return sq_norms_[i]; }
  std::span<const double> sq_norms() const { return sq_norms_; }
  double max_norm() const { return max_norm_; }

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> values_;
  std::vector<double> sq_norms_;
  double max_norm_ = 0.0;
};

/// k x d centroids with per-round displacements. `cc` and `s` are filled only
/// by strategies that need them.
struct CentroidState {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> centroids;
  std::vector<double> sq_norms;
  std::vector<double> p;   // displacement in the last update step
  std::vector<double> s;   // distance to nearest other centroid
  std::vector<double> cc;  // k x k inter-centroid distances

  CentroidState() = default;
  CentroidState(std::size_t k_, std::size_t d_)
      : k(k_), dim(d_), centroids(k_ * d_, 0.0), sq_norms(k_, 0.0), p(k_, 0.0) {}

  std::span<const double> row(std::size_t j) const { return {centroids.data() + j * dim, dim}; }
  std::span<double> row(std::size_t j) { return {centroids.data() + j * dim, dim}; }

  void refresh_norms() {
    for (std::size_t j = 0; j < k; ++j) {
      auto r = row(j);
      sq_norms[j] = dot(r, r);
    }
  }
};

/// Per-round instrumentation. `round` 0 is the initialisation pass.
struct RoundStats {
  std::size_t round = 0;
  std::uint64_t dist_calcs_assign = 0;
  std::uint64_t dist_calcs_centroid = 0;
  std::uint64_t dist_calcs_init = 0;
  std::uint64_t changes = 0;
  std::uint64_t bound_tightenings = 0;

  std::uint64_t total_dist_calcs() const {
    return dist_calcs_assign + dist_calcs_centroid + dist_calcs_init;
  }

  RoundStats& operator+=(const RoundStats& o) {
    dist_calcs_assign += o.dist_calcs_assign;
    dist_calcs_centroid += o.dist_calcs_centroid;
    dist_calcs_init += o.dist_calcs_init;
    changes += o.changes;
    bound_tightenings += o.bound_tightenings;
    return *this;
  }
};

/// Slack applied to every pruning comparison.
///
/// The expansion kernel's squared result is off by at most about
/// (d + 4) eps (|a| + |b|)^2, so the returned distance is off by at most the
/// square root of that. Centroids are means of samples, hence |c| <= max |x|.
/// A skip is taken only when it survives four kernel errors (one at the time
/// the bound was set, one now, on both sides of the comparison).
inline double pruning_margin(const DataMatrix& data) {
  const double m = data.max_norm();
  const double sq_err = 1.25 * (static_cast<double>(data.dim()) + 4.0) * DBL_EPSILON * 4.0 * m * m;
  const double kernel_err = std::sqrt(sq_err) + 8.0 * DBL_EPSILON * (2.0 * m + 1.0);
  return 4.0 * kernel_err + std::numeric_limits<double>::min();
}

/// Lexicographic (distance, index) order: nearer wins, lower index breaks ties.
inline bool closer(double d1, index_t j1, double d2, index_t j2) {
  return d1 < d2 || (d1 == d2 && j1 < j2);
}

}  // namespace exkm
