#pragma once

// Candidate filters for the Hamerly family:
//  - SortedNorms / annular_candidates: origin-centred norm band (Annular).
//  - AnnulusIndex / exponion_candidates: per-centroid concentric annuli with
//    doubling cumulative membership (Exponion).

#include <algorithm>
#include <numeric>
#include <vector>

#include "exkm/centroid_ops.hpp"
#include "exkm/core.hpp"

namespace exkm {

/// Centroid norms in ascending order with their original indices.
struct SortedNorms {
  std::vector<double> norms;
  std::vector<index_t> ids;

  static SortedNorms of(const CentroidState& c) {
    SortedNorms s;
    s.ids.resize(c.k);
    std::iota(s.ids.begin(), s.ids.end(), index_t{0});
    std::vector<double> n(c.k);
    for (std::size_t j = 0; j < c.k; ++j) n[j] = std::sqrt(c.sq_norms[j]);
    std::sort(s.ids.begin(), s.ids.end(), [&](index_t x, index_t y) { return n[x] < n[y] || (n[x] == n[y] && x < y); });
    s.norms.resize(c.k);
    for (std::size_t r = 0; r < c.k; ++r) s.norms[r] = n[s.ids[r]];
    return s;
  }
};

/// {j : | |c(j)| - |x| | <= R } via two binary searches; returned in norm order.
inline std::span<const index_t> annular_candidates(double x_norm, const SortedNorms& sorted, double radius) {
  const auto lo = std::lower_bound(sorted.norms.begin(), sorted.norms.end(), x_norm - radius);
  const auto hi = std::upper_bound(lo, sorted.norms.end(), x_norm + radius);
  const auto first = static_cast<std::size_t>(lo - sorted.norms.begin());
  const auto last = static_cast<std::size_t>(hi - sorted.norms.begin());
  return std::span<const index_t>(sorted.ids).subspan(first, last - first);
}

/// For each centroid j, the other centroids partitioned into annuli whose
/// cumulative sizes are 2, 4, 8, ... (the last one takes the remainder).
/// Annuli are ordered by distance from c(j); members within one are not.
class AnnulusIndex {
 public:
  AnnulusIndex() = default;

  /// Number of annuli for k centroids.
  static std::size_t annulus_count(std::size_t k) {
    if (k < 2) return 0;
    std::size_t f = 1;
    for (std::size_t cum = 2; cum < k - 1; cum *= 2) ++f;
    return f;
  }

  /// Cumulative member count through annulus f (1-based).
  static std::size_t cumulative(std::size_t f, std::size_t others) {
    return std::min(others, std::size_t{1} << f);
  }

  /// Builds all rows from c.cc, which must be populated.
  void build(const CentroidState& c) {
    k_ = c.k;
    others_ = k_ == 0 ? 0 : k_ - 1;
    count_ = k_ < 2 ? 0 : annulus_count(k_);
    members_.resize(k_ * others_);
    radii_.assign(k_ * count_, 0.0);
    std::vector<std::pair<double, index_t>> row(others_);
    for (std::size_t j = 0; j < k_; ++j) {
      std::size_t w = 0;
      for (std::size_t jj = 0; jj < k_; ++jj)
        if (jj != j) row[w++] = {c.cc[j * k_ + jj], static_cast<index_t>(jj)};
      // Outermost boundary first, then each prefix is split again: O(k) per row.
      for (std::size_t f = count_; f-- > 1;) {
        const auto mid = row.begin() + static_cast<std::ptrdiff_t>(cumulative(f, others_));
        std::nth_element(row.begin(), mid, row.begin() + static_cast<std::ptrdiff_t>(cumulative(f + 1, others_)));
      }
      std::size_t start = 0;
      for (std::size_t f = 1; f <= count_; ++f) {
        const std::size_t stop = cumulative(f, others_);
        const auto far = std::max_element(row.begin() + start, row.begin() + stop);
        radii_[j * count_ + f - 1] = far->first;
        start = stop;
      }
      for (std::size_t r = 0; r < others_; ++r) members_[j * others_ + r] = row[r].second;
    }
  }

  std::size_t k() const { return k_; }
  std::size_t count() const { return count_; }

  /// Outer radius e(j, f), f in 1..count(); e(j, 0) = 0.
  double radius(index_t j, std::size_t f) const { return f == 0 ? 0.0 : radii_[j * count_ + f - 1]; }

  /// Members of annulus f of centroid j.
  std::span<const index_t> annulus(index_t j, std::size_t f) const {
    const std::size_t first = f == 1 ? 0 : cumulative(f - 1, others_);
    const std::size_t last = cumulative(f, others_);
    return std::span<const index_t>(members_).subspan(j * others_ + first, last - first);
  }

  /// Members of annuli 1..f*, f* = min{f : e(j, f) >= R} (all if none).
  /// Centroid j itself is not included.
  std::span<const index_t> prefix(index_t j, double radius) const {
    if (count_ == 0) return {};
    const double* e = radii_.data() + j * count_;
    const auto it = std::lower_bound(e, e + count_, radius);
    const std::size_t fstar = it == e + count_ ? count_ : static_cast<std::size_t>(it - e) + 1;
    return std::span<const index_t>(members_).subspan(j * others_, cumulative(fstar, others_));
  }

 private:
  std::size_t k_ = 0;
  std::size_t others_ = 0;
  std::size_t count_ = 0;
  std::vector<index_t> members_;  // k rows of k-1, annuli contiguous
  std::vector<double> radii_;     // k rows of count_
};

/// Computes cc and s (counted) and builds the index.
inline AnnulusIndex build_annuli(CentroidState& c, RoundStats& stats) {
  compute_cc(c, stats);
  AnnulusIndex idx;
  idx.build(c);
  return idx;
}

/// J*(j, R): union of annuli up to f*, plus j itself.
inline std::vector<index_t> exponion_candidates(const AnnulusIndex& index, index_t j, double radius) {
  const auto pre = index.prefix(j, radius);
  std::vector<index_t> out(pre.begin(), pre.end());
  out.push_back(j);
  return out;
}

}  // namespace exkm
