#pragma once

// Hamerly (ham), Annular (ann), Exponion (exp) and exp-ns: one upper bound and
// one lower bound (on every non-assigned centroid) per sample.

#include <vector>

#include "exkm/annuli.hpp"
#include "exkm/centroid_ops.hpp"
#include "exkm/ns_history.hpp"
#include "exkm/strategy.hpp"

namespace exkm {

enum class HamFilter { none, annular, exponion };

class SnHamBounds {
 public:
  static constexpr bool is_ns = false;

  void resize(std::size_t n) {
    u_.assign(n, 0.0);
    l_.assign(n, 0.0);
  }
  void setup(const DataMatrix&, const CentroidState&, const StrategyOptions&, RoundStats&) {}
  void prepare_round(const CentroidState& c, std::size_t, RoundStats&) { top_ = TopTwo::of(c.p); }
  void finish_round() {}

  /// u += p(a), l -= max over j != a of p(j).
  void begin_sample(index_t i, index_t a, const CentroidState& c, std::size_t) {
    u_[i] += c.p[a];
    l_[i] -= top_.max_except(a);
  }

  double upper(index_t i, index_t) const { return u_[i]; }
  double lower(index_t i, index_t) const { return l_[i]; }
  void set_upper(index_t i, double d, std::size_t) { u_[i] = d; }
  void set_lower(index_t i, double d, std::size_t) { l_[i] = d; }

  double& raw_lower(index_t i) { return l_[i]; }

 private:
  TopTwo top_;
  std::vector<double> u_;
  std::vector<double> l_;
};

class NsHamBounds {
 public:
  static constexpr bool is_ns = true;

  void resize(std::size_t n) {
    u0_.assign(n, 0.0);
    tu_.assign(n, 0);
    l0_.assign(n, 0.0);
    tl_.assign(n, 0);
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

  void begin_sample(index_t i, index_t a, const CentroidState&, std::size_t round) {
    if (!history_.fold_pending()) return;
    u0_[i] += history_.P(a, tu_[i]);
    l0_[i] -= history_.max_except(a, tl_[i]);
    tu_[i] = tl_[i] = static_cast<std::uint32_t>(round);
  }

  double upper(index_t i, index_t a) const { return u0_[i] + history_.P(a, tu_[i]); }
  double lower(index_t i, index_t a) const { return l0_[i] - history_.max_except(a, tl_[i]); }
  void set_upper(index_t i, double d, std::size_t round) {
    u0_[i] = d;
    tu_[i] = static_cast<std::uint32_t>(round);
  }
  void set_lower(index_t i, double d, std::size_t round) {
    l0_[i] = d;
    tl_[i] = static_cast<std::uint32_t>(round);
  }

  const NsHistory& history() const { return history_; }

 private:
  NsHistory history_;
  std::vector<double> u0_;
  std::vector<std::uint32_t> tu_;
  std::vector<double> l0_;
  std::vector<std::uint32_t> tl_;
};

/// Test: max(l(i), s(a)/2) > u(i) keeps a(i). On failure u is tightened and
/// the test repeated; on a second failure the two nearest centroids are
/// found among a candidate set (all centroids, the annular band, or the
/// exponion ball around c(a)).
template <HamFilter Filter, class Bounds>
class HamerlyStrategy final : public Strategy {
 public:
  std::string_view name() const override {
    switch (Filter) {
      case HamFilter::none: return "ham";
      case HamFilter::annular: return "ann";
      case HamFilter::exponion: return Bounds::is_ns ? "exp-ns" : "exp";
    }
    return "";
  }

  void setup(const DataMatrix& data, const CentroidState& c0, const StrategyOptions& opts,
             RoundStats& stats) override {
    bounds_.resize(data.n_samples());
    if constexpr (Filter == HamFilter::annular) second_.assign(data.n_samples(), 0);
    bounds_.setup(data, c0, opts, stats);
  }

  void init_sample(index_t i, std::span<const double> dist, index_t a) override {
    NearestTwo n = nearest_two(dist);
    bounds_.set_upper(i, dist[a], 0);
    bounds_.set_lower(i, n.d2, 0);
    if constexpr (Filter == HamFilter::annular) second_[i] = dist.size() > 1 ? n.j2 : a;
  }

  void prepare_round(const DataMatrix&, CentroidState& c, std::size_t round, RoundStats& stats) override {
    if constexpr (Filter == HamFilter::exponion) {
      index_ = build_annuli(c, stats);
    } else {
      compute_cc(c, stats);
    }
    if constexpr (Filter == HamFilter::annular) sorted_ = SortedNorms::of(c);
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
      const index_t a = assignment[i];
      bounds_.begin_sample(i, a, c, round);
      const bool log = audit && audit->wants(i);

      const double bound = std::max(bounds_.lower(i, a), c.s[a] / 2.0);
      if (bound > bounds_.upper(i, a) + m) {
        if (log) audit->keep(i, a);
        continue;
      }
      const double u = sample_distance(ctx, i, a);
      ++out.stats.dist_calcs_assign;
      ++out.stats.bound_tightenings;
      bounds_.set_upper(i, u, round);
      if (bound > u + m) {
        if (log) audit->keep(i, a);
        continue;
      }

      NearestTwo best;
      best.offer(u, a);
      auto visit = [&](std::span<const index_t> candidates, index_t known) {
        for (index_t j : candidates) {
          if (j == a || j == known) continue;
          best.offer(sample_distance(ctx, i, j), j);
          ++out.stats.dist_calcs_assign;
        }
      };

      if constexpr (Filter == HamFilter::none) {
        for (std::size_t j = 0; j < k; ++j) {
          if (j == a) continue;
          best.offer(sample_distance(ctx, i, j), static_cast<index_t>(j));
        }
        out.stats.dist_calcs_assign += k - 1;
      } else if constexpr (Filter == HamFilter::annular) {
        const index_t b = second_[i];
        double db = u;
        if (b != a) {
          db = sample_distance(ctx, i, b);
          ++out.stats.dist_calcs_assign;
          best.offer(db, b);
        }
        const double radius = std::max(u, db) + m;
        const auto band = annular_candidates(std::sqrt(ctx.data.sq_norm(i)), sorted_, radius);
        if (log) audit->candidates(i, band);
        visit(band, b);
      } else {
        const double radius = 2.0 * u + c.s[a] + m;
        const auto ball = index_.prefix(a, radius);
        if (log) {
          std::vector<index_t> set(ball.begin(), ball.end());
          set.push_back(a);
          audit->candidates(i, set);
        }
        visit(ball, a);
      }

      bounds_.set_upper(i, best.d1, round);
      bounds_.set_lower(i, best.d2, round);
      if constexpr (Filter == HamFilter::annular) second_[i] = best.j2 < k ? best.j2 : best.j1;
      if (best.j1 != a) {
        out.moves.emplace_back(i, a);
        assignment[i] = best.j1;
      }
    }
  }

  void audit_sample(const RoundContext& ctx, const SampleTruth& t, index_t a,
                    std::vector<Violation>& out) const override {
    constexpr double tol = 1e-9;
    if (bounds_.upper(t.sample, a) < t.dist[a] - tol)
      out.push_back({ctx.round, t.sample, a, "upper bound below true distance"});
    double nearest_other = kInf;
    for (std::size_t j = 0; j < ctx.centroids.k; ++j)
      if (j != a) nearest_other = std::min(nearest_other, t.dist[j]);
    if (bounds_.lower(t.sample, a) > nearest_other + tol)
      out.push_back({ctx.round, t.sample, a, "lower bound above nearest non-assigned distance"});
  }

  Bounds& bounds() { return bounds_; }
  const AnnulusIndex& annuli() const { return index_; }
  index_t second(index_t i) const { return second_[i]; }

 private:
  Bounds bounds_;
  std::vector<index_t> second_;  // b(i), Annular only
  SortedNorms sorted_;
  AnnulusIndex index_;
};

using HamStrategy = HamerlyStrategy<HamFilter::none, SnHamBounds>;
using AnnStrategy = HamerlyStrategy<HamFilter::annular, SnHamBounds>;
using ExpStrategy = HamerlyStrategy<HamFilter::exponion, SnHamBounds>;
using ExpNsStrategy = HamerlyStrategy<HamFilter::exponion, NsHamBounds>;

}  // namespace exkm
