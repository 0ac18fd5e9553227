#pragma once

// Centroid history for norm-of-sum ("ns") bounds.
//
// A bound recorded at round T is moved to the current round by the net
// displacement P(j, T) = |c(j) - c_T(j)| instead of the sum of per-round
// displacements. Snapshots are kept for every round since the last reset;
// at a reset round all bounds are folded to the current round and the store
// is cleared.

#include <algorithm>
#include <deque>
#include <optional>
#include <vector>

#include "exkm/centroid_ops.hpp"
#include "exkm/core.hpp"

namespace exkm {

/// max(1, floor(N / min(k, d)))
inline std::size_t default_reset_period(std::size_t n, std::size_t k, std::size_t d) {
  const std::size_t m = std::min(k, d);
  return std::max<std::size_t>(1, m == 0 ? n : n / m);
}

/// ns inner test: centroid j can be skipped iff
/// u0 + P(a, T_a) + margin < l0 - P(j, T_j).
inline bool ns_test_selk(double u0, double l0, double pa, double pj, double margin = 0.0) {
  return u0 + pa + margin < l0 - pj;
}

enum class DeltaMode { smn, msn, mns };

class NsHistory {
 public:
  NsHistory() = default;

  void configure(std::size_t k, std::size_t dim, std::size_t reset_period,
                 std::vector<std::vector<index_t>> groups = {}) {
    k_ = k;
    dim_ = dim;
    period_ = std::max<std::size_t>(1, reset_period);
    groups_ = std::move(groups);
    snapshots_.clear();
    rows_.clear();
  }

  std::size_t reset_period() const { return period_; }
  std::size_t now() const { return now_; }
  bool is_reset_round(std::size_t t) const { return t > 0 && t % period_ == 0; }

  /// True during a reset round, until finish_round(): bounds must be folded.
  bool fold_pending() const { return fold_pending_; }

  std::size_t stored_rounds() const { return snapshots_.size(); }
  std::size_t first_stored_round() const { return snap_base_; }

  /// Store round t's centroids and refresh P for every retained round
  /// (k direct distances per earlier round, counted as centroid work).
  void record_round(const CentroidState& c, std::size_t t, RoundStats& stats) {
    now_ = t;
    if (snapshots_.empty() && rows_.empty()) {
      snap_base_ = row_base_ = t;
      push_snapshot(c);
      push_row(std::vector<double>(k_, 0.0));
      return;
    }
    for (std::size_t s = 0; s < snapshots_.size(); ++s) {
      auto& row = rows_[snap_base_ - row_base_ + s];
      const auto& snap = snapshots_[s];
      for (std::size_t j = 0; j < k_; ++j)
        row.p[j] = distance_direct(c.row(j), std::span<const double>(snap.data() + j * dim_, dim_));
      stats.dist_calcs_centroid += k_;
      row.finish(groups_);
    }
    if (is_reset_round(t)) {
      fold_pending_ = true;
      snapshots_.clear();
      snap_base_ = t;
    }
    push_snapshot(c);
    push_row(std::vector<double>(k_, 0.0));
  }

  /// Drop P rows older than the oldest stored snapshot once folding is done.
  void finish_round() {
    if (!fold_pending_) return;
    while (row_base_ < snap_base_) {
      rows_.pop_front();
      ++row_base_;
    }
    fold_pending_ = false;
  }

  double P(index_t j, std::size_t t) const { return row(t).p[j]; }
  double max_except(index_t a, std::size_t t) const { return row(t).top.max_except(a); }
  double group_max(std::size_t f, std::size_t t) const { return row(t).group_max[f]; }

  bool has_round(std::size_t t) const { return t >= row_base_ && t < row_base_ + rows_.size(); }
  bool has_snapshot(std::size_t t) const { return t >= snap_base_ && t < snap_base_ + snapshots_.size(); }

  std::span<const double> snapshot_row(std::size_t t, index_t j) const {
    if (!has_snapshot(t)) throw Error("no stored centroids for round " + std::to_string(t));
    return {snapshots_[t - snap_base_].data() + j * dim_, dim_};
  }

 private:
  struct Row {
    std::vector<double> p;
    TopTwo top;
    std::vector<double> group_max;

    void finish(const std::vector<std::vector<index_t>>& groups) {
      top = TopTwo::of(p);
      group_max.assign(groups.size(), 0.0);
      for (std::size_t f = 0; f < groups.size(); ++f)
        for (index_t j : groups[f]) group_max[f] = std::max(group_max[f], p[j]);
    }
  };

  const Row& row(std::size_t t) const { return rows_[t - row_base_]; }

  void push_snapshot(const CentroidState& c) { snapshots_.push_back(c.centroids); }

  void push_row(std::vector<double> p) {
    Row r{std::move(p), {}, {}};
    r.finish(groups_);
    rows_.push_back(std::move(r));
  }

  std::size_t k_ = 0;
  std::size_t dim_ = 0;
  std::size_t period_ = 1;
  std::size_t now_ = 0;
  bool fold_pending_ = false;
  std::vector<std::vector<index_t>> groups_;
  std::deque<std::vector<double>> snapshots_;
  std::size_t snap_base_ = 0;
  std::deque<Row> rows_;
  std::size_t row_base_ = 0;
};

/// Group lower-bound decrement over rounds [t0, now) for the given members:
///   smn: sum over rounds of the max per-round displacement
///   msn: max over members of the summed per-round displacements
///   mns: max over members of the net displacement since t0
inline double group_delta(const NsHistory& h, std::span<const index_t> members, std::size_t t0,
                          DeltaMode mode) {
  const std::size_t now = h.now();
  if (t0 > now || !h.has_snapshot(t0) || !h.has_snapshot(now))
    throw Error("group_delta: round " + std::to_string(t0) + " is not stored");
  auto step = [&](index_t j, std::size_t t) {
    return distance_direct(h.snapshot_row(t + 1, j), h.snapshot_row(t, j));
  };
  double out = 0.0;
  switch (mode) {
    case DeltaMode::smn:
      for (std::size_t t = t0; t < now; ++t) {
        double m = 0.0;
        for (index_t j : members) m = std::max(m, step(j, t));
        out += m;
      }
      break;
    case DeltaMode::msn:
      for (index_t j : members) {
        double sum = 0.0;
        for (std::size_t t = t0; t < now; ++t) sum += step(j, t);
        out = std::max(out, sum);
      }
      break;
    case DeltaMode::mns:
      for (index_t j : members) out = std::max(out, h.P(j, t0));
      break;
  }
  return out;
}

}  // namespace exkm
