#pragma once

// Simplified Elkan (selk) and Elkan (elk), with sn or ns bound maintenance.

#include <vector>

#include "exkm/centroid_ops.hpp"
#include "exkm/ns_history.hpp"
#include "exkm/strategy.hpp"

namespace exkm {

/// u(i) and l(i, j) shifted every round by the last displacement.
class SnElkanBounds {
 public:
  static constexpr bool is_ns = false;

  void resize(std::size_t n, std::size_t k) {
    k_ = k;
    u_.assign(n, 0.0);
    l_.assign(n * k, 0.0);
  }
  void setup(const DataMatrix&, const CentroidState&, const StrategyOptions&, RoundStats&) {}
  void prepare_round(const CentroidState&, std::size_t, RoundStats&) {}
  void finish_round() {}

  void init_sample(index_t i, std::span<const double> dist, index_t a) {
    u_[i] = dist[a];
    std::copy(dist.begin(), dist.end(), l_.begin() + i * k_);
  }

  /// l(i,j) -= p(j), u(i) += p(a(i)).
  void begin_sample(index_t i, index_t a, const CentroidState& c, std::size_t) {
    u_[i] += c.p[a];
    double* l = &l_[i * k_];
    for (std::size_t j = 0; j < k_; ++j) l[j] -= c.p[j];
  }

  double upper(index_t i, index_t) const { return u_[i]; }
  double lower(index_t i, index_t j) const { return l_[i * k_ + j]; }
  void set_upper(index_t i, index_t, double d, std::size_t) { u_[i] = d; }
  void set_lower(index_t i, index_t j, double d, std::size_t) { l_[i * k_ + j] = d; }

  double& raw_upper(index_t i) { return u_[i]; }
  double& raw_lower(index_t i, index_t j) { return l_[i * k_ + j]; }

 private:
  std::size_t k_ = 0;
  std::vector<double> u_;
  std::vector<double> l_;
};

/// Distances recorded at the round they were computed, moved to the current
/// round on demand by the net displacement since then.
class NsElkanBounds {
 public:
  static constexpr bool is_ns = true;

  void resize(std::size_t n, std::size_t k) {
    k_ = k;
    u0_.assign(n, 0.0);
    tu_.assign(n, 0);
    l0_.assign(n * k, 0.0);
    tl_.assign(n * k, 0);
  }

  void setup(const DataMatrix& data, const CentroidState& c0, const StrategyOptions& opts, RoundStats& st) {
    const std::size_t period = opts.ns_reset_period != 0
                                   ? opts.ns_reset_period
                                   : default_reset_period(data.n_samples(), c0.k, data.dim());
    history_.configure(c0.k, c0.dim, period);
    history_.record_round(c0, 0, st);
  }
  void prepare_round(const CentroidState& c, std::size_t round, RoundStats& st) {
    history_.record_round(c, round, st);
  }
  void finish_round() { history_.finish_round(); }

  void init_sample(index_t i, std::span<const double> dist, index_t a) {
    u0_[i] = dist[a];
    tu_[i] = 0;
    std::copy(dist.begin(), dist.end(), l0_.begin() + i * k_);
    std::fill(tl_.begin() + i * k_, tl_.begin() + (i + 1) * k_, 0u);
  }

  void begin_sample(index_t i, index_t a, const CentroidState&, std::size_t round) {
    if (history_.fold_pending()) fold_sample(i, a, round);
  }

  /// Reset: u0 += P(a, T), l0 -= P(j, T), every record re-stamped to `round`.
  void fold_sample(index_t i, index_t a, std::size_t round) {
    u0_[i] += history_.P(a, tu_[i]);
    tu_[i] = static_cast<std::uint32_t>(round);
    for (std::size_t j = 0; j < k_; ++j) {
      const std::size_t ij = i * k_ + j;
      l0_[ij] -= history_.P(static_cast<index_t>(j), tl_[ij]);
      tl_[ij] = static_cast<std::uint32_t>(round);
    }
  }

  double upper(index_t i, index_t a) const { return u0_[i] + history_.P(a, tu_[i]); }
  double lower(index_t i, index_t j) const {
    const std::size_t ij = i * k_ + j;
    return l0_[ij] - history_.P(j, tl_[ij]);
  }
  void set_upper(index_t i, index_t, double d, std::size_t round) {
    u0_[i] = d;
    tu_[i] = static_cast<std::uint32_t>(round);
  }
  void set_lower(index_t i, index_t j, double d, std::size_t round) {
    l0_[i * k_ + j] = d;
    tl_[i * k_ + j] = static_cast<std::uint32_t>(round);
  }

  const NsHistory& history() const { return history_; }
  std::uint32_t upper_round(index_t i) const { return tu_[i]; }
  std::uint32_t lower_round(index_t i, index_t j) const { return tl_[i * k_ + j]; }

 private:
  std::size_t k_ = 0;
  NsHistory history_;
  std::vector<double> u0_;
  std::vector<std::uint32_t> tu_;
  std::vector<double> l0_;
  std::vector<std::uint32_t> tl_;
};

/// Per-sample loop over centroids with the inner test u < l(i,j). With
/// `UseCentroidTests`, adds the outer test s(a)/2 > u and the inner
/// cc(a,j)/2 > u test.
template <bool UseCentroidTests, class Bounds>
class ElkanStrategy final : public Strategy {
 public:
  std::string_view name() const override {
    if constexpr (UseCentroidTests) return Bounds::is_ns ? "elk-ns" : "elk";
    else return Bounds::is_ns ? "selk-ns" : "selk";
  }

  void setup(const DataMatrix& data, const CentroidState& c0, const StrategyOptions& opts,
             RoundStats& stats) override {
    bounds_.resize(data.n_samples(), c0.k);
    bounds_.setup(data, c0, opts, stats);
  }

  void init_sample(index_t i, std::span<const double> dist, index_t a) override {
    bounds_.init_sample(i, dist, a);
  }

  void prepare_round(const DataMatrix&, CentroidState& c, std::size_t round, RoundStats& stats) override {
    if constexpr (UseCentroidTests) compute_cc(c, stats);
    bounds_.prepare_round(c, round, stats);
  }

  void finish_round(const RoundContext&) override { bounds_.finish_round(); }

  void assign_range(const RoundContext& ctx, std::size_t begin, std::size_t end,
                    std::span<index_t> assignment, ChunkResult& out) override {
    const CentroidState& c = ctx.centroids;
    const std::size_t k = c.k;
    const double m = ctx.margin;
    const std::size_t round = ctx.round;
    AuditSink* audit = out.audit;

    for (std::size_t ii = begin; ii < end; ++ii) {
      const auto i = static_cast<index_t>(ii);
      const index_t a0 = assignment[i];
      index_t a = a0;
      bounds_.begin_sample(i, a, c, round);
      double u = bounds_.upper(i, a);
      const bool log = audit && audit->wants(i);

      if constexpr (UseCentroidTests) {
        if (c.s[a] / 2.0 > u + m) {
          if (log) audit->keep(i, a);
          continue;
        }
      }

      bool tight = false;
      for (std::size_t jj = 0; jj < k; ++jj) {
        const auto j = static_cast<index_t>(jj);
        if (j == a) continue;
        auto pruned = [&] {
          if constexpr (UseCentroidTests) {
            if (c.cc[a * k + j] / 2.0 > u + m) return true;
          }
          return u + m < bounds_.lower(i, j);
        };
        if (pruned()) {
          if (log) audit->skip(i, j);
          continue;
        }
        if (!tight) {
          u = sample_distance(ctx, i, a);
          ++out.stats.dist_calcs_assign;
          ++out.stats.bound_tightenings;
          bounds_.set_upper(i, a, u, round);
          bounds_.set_lower(i, a, u, round);
          tight = true;
          if (pruned()) {
            if (log) audit->skip(i, j);
            continue;
          }
        }
        const double d = sample_distance(ctx, i, j);
        ++out.stats.dist_calcs_assign;
        ++out.stats.bound_tightenings;
        bounds_.set_lower(i, j, d, round);
        if (closer(d, j, u, a)) {
          a = j;
          u = d;
          bounds_.set_upper(i, a, u, round);
        }
      }
      if (a != a0) {
        out.moves.emplace_back(i, a0);
        assignment[i] = a;
      }
    }
  }

  void audit_sample(const RoundContext& ctx, const SampleTruth& t, index_t a,
                    std::vector<Violation>& out) const override {
    constexpr double tol = 1e-9;
    if (bounds_.upper(t.sample, a) < t.dist[a] - tol)
      out.push_back({ctx.round, t.sample, a, "upper bound below true distance"});
    for (std::size_t j = 0; j < ctx.centroids.k; ++j) {
      const auto jj = static_cast<index_t>(j);
      if (bounds_.lower(t.sample, jj) > t.dist[j] + tol)
        out.push_back({ctx.round, t.sample, jj, "lower bound above true distance"});
    }
  }

  Bounds& bounds() { return bounds_; }
  const Bounds& bounds() const { return bounds_; }

 private:
  Bounds bounds_;
};

using SelkStrategy = ElkanStrategy<false, SnElkanBounds>;
using ElkStrategy = ElkanStrategy<true, SnElkanBounds>;
using SelkNsStrategy = ElkanStrategy<false, NsElkanBounds>;
using ElkNsStrategy = ElkanStrategy<true, NsElkanBounds>;

}  // namespace exkm
