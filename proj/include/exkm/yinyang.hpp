#pragma once

// Simplified Yinyang (syin), Yinyang (yin) and syin-ns: one lower bound per
// group of centroids. Groups come from a short k-means over the initial
// centroids and stay fixed for the run.

#include <vector>

#include "exkm/centroid_ops.hpp"
#include "exkm/init.hpp"
#include "exkm/ns_history.hpp"
#include "exkm/strategy.hpp"

namespace exkm {

/// Partition of the k clusters into G groups.
struct GroupState {
  std::vector<std::vector<index_t>> members;
  std::vector<index_t> group_of;

  std::size_t group_count() const { return members.size(); }
};

inline std::size_t default_group_count(std::size_t k) { return std::max<std::size_t>(1, k / 10); }

/// Five rounds of the standard algorithm over the centroid vectors with G
/// clusters, seeded from `seed`; empty groups are dropped. Distance work is
/// charged to stats.dist_calcs_init.
inline GroupState build_groups(const CentroidState& c, std::size_t group_count, std::uint64_t seed,
                               RoundStats& stats) {
  const std::size_t k = c.k;
  const std::size_t d = c.dim;
  const std::size_t g = std::clamp<std::size_t>(group_count, 1, k);
  GroupState out;
  out.group_of.assign(k, 0);
  if (g == 1) {
    out.members.resize(1);
    for (std::size_t j = 0; j < k; ++j) out.members[0].push_back(static_cast<index_t>(j));
    return out;
  }

  const auto rows = select_initial_indices(k, g, seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<double> centre(g * d), centre_sq(g);
  for (std::size_t f = 0; f < g; ++f) {
    auto src = c.row(rows[f]);
    std::copy(src.begin(), src.end(), centre.begin() + f * d);
  }
  std::vector<index_t> label(k, 0);
  for (int iter = 0; iter < 5; ++iter) {
    for (std::size_t f = 0; f < g; ++f) {
      std::span<const double> r(centre.data() + f * d, d);
      centre_sq[f] = dot(r, r);
    }
    for (std::size_t j = 0; j < k; ++j) {
      double best = kInf;
      for (std::size_t f = 0; f < g; ++f) {
        const double dist = distance(c.row(j), c.sq_norms[j], {centre.data() + f * d, d}, centre_sq[f]);
        if (dist < best) {
          best = dist;
          label[j] = static_cast<index_t>(f);
        }
      }
    }
    stats.dist_calcs_init += k * g;
    std::vector<double> sum(g * d, 0.0);
    std::vector<std::size_t> count(g, 0);
    for (std::size_t j = 0; j < k; ++j) {
      ++count[label[j]];
      auto r = c.row(j);
      for (std::size_t t = 0; t < d; ++t) sum[label[j] * d + t] += r[t];
    }
    for (std::size_t f = 0; f < g; ++f)
      if (count[f] > 0)
        for (std::size_t t = 0; t < d; ++t) centre[f * d + t] = sum[f * d + t] / static_cast<double>(count[f]);
  }

  std::vector<std::vector<index_t>> raw(g);
  for (std::size_t j = 0; j < k; ++j) raw[label[j]].push_back(static_cast<index_t>(j));
  for (auto& grp : raw) {
    if (grp.empty()) continue;
    for (index_t j : grp) out.group_of[j] = static_cast<index_t>(out.members.size());
    out.members.push_back(std::move(grp));
  }
  return out;
}

/// Local filter inside a failing group: the bound on d(x, c(j)) carried over
/// from before this round's refresh, l(i,f) + q(f) - p(j), exceeds the second
/// nearest distance seen so far in the group.
inline bool yin_local_skip(double group_lower, double q, double pj, double second, double margin = 0.0) {
  return group_lower + q - pj > second + margin;
}

class SnGroupBounds {
 public:
  static constexpr bool is_ns = false;

  void resize(std::size_t n, std::size_t g) {
    g_ = g;
    u_.assign(n, 0.0);
    l_.assign(n * g, 0.0);
  }
  void setup(const DataMatrix&, const CentroidState&, const GroupState&, const StrategyOptions&, RoundStats&) {}
  void prepare_round(const CentroidState&, std::size_t, RoundStats&) {}
  void finish_round() {}

  /// u += p(a), l(i, f) -= q(f).
  void begin_sample(index_t i, index_t a, const CentroidState& c, std::span<const double> q, std::size_t) {
    u_[i] += c.p[a];
    double* l = &l_[i * g_];
    for (std::size_t f = 0; f < g_; ++f) l[f] -= q[f];
  }

  double upper(index_t i, index_t) const { return u_[i]; }
  double group_lower(index_t i, std::size_t f) const { return l_[i * g_ + f]; }
  void set_upper(index_t i, double d, std::size_t) { u_[i] = d; }
  void set_group_lower(index_t i, std::size_t f, double d, std::size_t) { l_[i * g_ + f] = d; }

  double& raw_group_lower(index_t i, std::size_t f) { return l_[i * g_ + f]; }

 private:
  std::size_t g_ = 0;
  std::vector<double> u_;
  std::vector<double> l_;
};

/// Group bounds recorded with their round, decremented on demand by the
/// max over the group of net displacements since then (MNS delta).
class NsGroupBounds {
 public:
  static constexpr bool is_ns = true;

  void resize(std::size_t n, std::size_t g) {
    g_ = g;
    u0_.assign(n, 0.0);
    tu_.assign(n, 0);
    l0_.assign(n * g, 0.0);
    tl_.assign(n * g, 0);
  }
  void setup(const DataMatrix& data, const CentroidState& c0, const GroupState& groups,
             const StrategyOptions& opts, RoundStats& st) {
    const std::size_t period = opts.ns_reset_period != 0
                                   ? opts.ns_reset_period
                                   : default_reset_period(data.n_samples(), c0.k, data.dim());
    history_.configure(c0.k, c0.dim, period, groups.members);
    history_.record_round(c0, 0, st);
  }
  void prepare_round(const CentroidState& c, std::size_t round, RoundStats& st) {
    history_.record_round(c, round, st);
  }
  void finish_round() { history_.finish_round(); }

  void begin_sample(index_t i, index_t a, const CentroidState&, std::span<const double>, std::size_t round) {
    if (!history_.fold_pending()) return;
    u0_[i] += history_.P(a, tu_[i]);
    tu_[i] = static_cast<std::uint32_t>(round);
    for (std::size_t f = 0; f < g_; ++f) {
      l0_[i * g_ + f] -= history_.group_max(f, tl_[i * g_ + f]);
      tl_[i * g_ + f] = static_cast<std::uint32_t>(round);
    }
  }

  double upper(index_t i, index_t a) const { return u0_[i] + history_.P(a, tu_[i]); }
  double group_lower(index_t i, std::size_t f) const {
    return l0_[i * g_ + f] - history_.group_max(f, tl_[i * g_ + f]);
  }
  void set_upper(index_t i, double d, std::size_t round) {
    u0_[i] = d;
    tu_[i] = static_cast<std::uint32_t>(round);
  }
  void set_group_lower(index_t i, std::size_t f, double d, std::size_t round) {
    l0_[i * g_ + f] = d;
    tl_[i * g_ + f] = static_cast<std::uint32_t>(round);
  }

  const NsHistory& history() const { return history_; }

 private:
  std::size_t g_ = 0;
  NsHistory history_;
  std::vector<double> u0_;
  std::vector<std::uint32_t> tu_;
  std::vector<double> l0_;
  std::vector<std::uint32_t> tl_;
};

/// Outer test min_f l(i,f) > u(i); then per-group tests l(i,f) > u(i). A
/// failing group is searched in full (syin) or with the local filter
/// l_prev(i,f) - p(j) > second-nearest-so-far (yin).
template <bool LocalFilter, class Bounds>
class YinyangStrategy final : public Strategy {
  static_assert(!(LocalFilter && Bounds::is_ns), "the local filter is defined for sn bounds only");

 public:
  std::string_view name() const override {
    if constexpr (LocalFilter) return "yin";
    else return Bounds::is_ns ? "syin-ns" : "syin";
  }

  void setup(const DataMatrix& data, const CentroidState& c0, const StrategyOptions& opts,
             RoundStats& stats) override {
    const std::size_t g = opts.group_count_override != 0 ? opts.group_count_override : default_group_count(c0.k);
    groups_ = build_groups(c0, g, opts.seed, stats);
    q_.assign(groups_.group_count(), 0.0);
    bounds_.resize(data.n_samples(), groups_.group_count());
    bounds_.setup(data, c0, groups_, opts, stats);
  }

  void init_sample(index_t i, std::span<const double> dist, index_t a) override {
    bounds_.set_upper(i, dist[a], 0);
    for (std::size_t f = 0; f < groups_.group_count(); ++f) {
      double low = kInf;
      for (index_t j : groups_.members[f])
        if (j != a) low = std::min(low, dist[j]);
      bounds_.set_group_lower(i, f, low, 0);
    }
  }

  void prepare_round(const DataMatrix&, CentroidState& c, std::size_t round, RoundStats& stats) override {
    for (std::size_t f = 0; f < groups_.group_count(); ++f) {
      q_[f] = 0.0;
      for (index_t j : groups_.members[f]) q_[f] = std::max(q_[f], c.p[j]);
    }
    bounds_.prepare_round(c, round, stats);
  }

  void finish_round(const RoundContext&) override { bounds_.finish_round(); }

  void assign_range(const RoundContext& ctx, std::size_t begin, std::size_t end,
                    std::span<index_t> assignment, ChunkResult& out) override {
    const CentroidState& c = ctx.centroids;
    const std::size_t G = groups_.group_count();
    const double m = ctx.margin;
    const std::size_t round = ctx.round;
    AuditSink* audit = out.audit;
    std::vector<double> start_lower(G);

    for (std::size_t ii = begin; ii < end; ++ii) {
      const auto i = static_cast<index_t>(ii);
      const index_t a_start = assignment[i];
      index_t a = a_start;
      bounds_.begin_sample(i, a, c, q_, round);
      const bool log = audit && audit->wants(i);

      double u = bounds_.upper(i, a);
      double min_lower = kInf;
      for (std::size_t f = 0; f < G; ++f) {
        start_lower[f] = bounds_.group_lower(i, f);
        min_lower = std::min(min_lower, start_lower[f]);
      }
      if (min_lower > u + m) {
        if (log) audit->keep(i, a);
        continue;
      }

      bool tight = false;
      double d_start = 0.0;  // tight distance to a_start once known
      for (std::size_t f = 0; f < G; ++f) {
        const double lf = bounds_.group_lower(i, f);
        if (lf > u + m) {
          if (log) log_group_skip(*audit, i, f, a);
          continue;
        }
        if (!tight) {
          u = sample_distance(ctx, i, a);
          d_start = u;
          ++out.stats.dist_calcs_assign;
          ++out.stats.bound_tightenings;
          bounds_.set_upper(i, u, round);
          tight = true;
          if (lf > u + m) {
            if (log) log_group_skip(*audit, i, f, a);
            continue;
          }
        }

        // Nearest two of G(f) \ {a}.
        NearestTwo near;
        for (index_t j : groups_.members[f]) {
          if (j == a) continue;
          double dj;
          if (j == a_start) {
            dj = d_start;
          } else {
            if constexpr (LocalFilter) {
              if (yin_local_skip(start_lower[f], q_[f], c.p[j], near.d2, m)) {
                if (log) audit->skip(i, j);
                continue;
              }
            }
            dj = sample_distance(ctx, i, j);
            ++out.stats.dist_calcs_assign;
          }
          near.offer(dj, j);
        }

        if (closer(near.d1, near.j1, u, a)) {
          const index_t old = a;
          const double old_u = u;
          a = near.j1;
          u = near.d1;
          bounds_.set_upper(i, u, round);
          bounds_.set_group_lower(i, f, near.d2, round);
          const std::size_t g_old = groups_.group_of[old];
          bounds_.set_group_lower(i, g_old, std::min(bounds_.group_lower(i, g_old), old_u), round);
        } else {
          bounds_.set_group_lower(i, f, near.d1, round);
        }
      }
      if (a != a_start) {
        out.moves.emplace_back(i, a_start);
        assignment[i] = a;
      }
    }
  }

  void audit_sample(const RoundContext& ctx, const SampleTruth& t, index_t a,
                    std::vector<Violation>& out) const override {
    constexpr double tol = 1e-9;
    if (bounds_.upper(t.sample, a) < t.dist[a] - tol)
      out.push_back({ctx.round, t.sample, a, "upper bound below true distance"});
    for (std::size_t f = 0; f < groups_.group_count(); ++f) {
      double low = kInf;
      for (index_t j : groups_.members[f])
        if (j != a) low = std::min(low, t.dist[j]);
      if (bounds_.group_lower(t.sample, f) > low + tol)
        out.push_back({ctx.round, t.sample, static_cast<index_t>(f), "group lower bound above true distance"});
    }
  }

  const GroupState& groups() const { return groups_; }
  std::span<const double> group_drift() const { return q_; }
  Bounds& bounds() { return bounds_; }

 private:
  void log_group_skip(AuditSink& audit, index_t i, std::size_t f, index_t a) const {
    for (index_t j : groups_.members[f])
      if (j != a) audit.skip(i, j);
  }

  GroupState groups_;
  std::vector<double> q_;
  Bounds bounds_;
};

using SyinStrategy = YinyangStrategy<false, SnGroupBounds>;
using YinStrategy = YinyangStrategy<true, SnGroupBounds>;
using SyinNsStrategy = YinyangStrategy<false, NsGroupBounds>;

}  // namespace exkm
