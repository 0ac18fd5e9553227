#pragma once

// Paired sn/ns execution with identical tightening events.
//
// The centroid sequence is taken from the reference trajectory. For each
// round and sample the sn procedure of the base algorithm drives control
// flow; next to every sn bound a shadow ns bound is kept (recorded value plus
// round) and receives the same tightenings. At every test the ns form is
// evaluated too, which yields the distance count the ns variant would incur
// under the same history, and whether its bounds stay at least as tight.

#include <string>
#include <vector>

#include "exkm/annuli.hpp"
#include "exkm/ns_history.hpp"
#include "exkm/verify.hpp"
#include "exkm/yinyang.hpp"

namespace exkm {

enum class LockstepBase { selk, elk, syin, exp };

struct LockstepRound {
  std::size_t round = 0;
  std::uint64_t sn_calcs = 0;
  std::uint64_t ns_calcs = 0;
  std::uint64_t ns_only_failures = 0;  // ns test failed where the sn test passed
};

struct LockstepReport {
  std::vector<LockstepRound> rounds;
  std::uint64_t upper_violations = 0;  // ns upper above sn upper
  std::uint64_t lower_violations = 0;  // ns lower below sn lower
  std::uint64_t assignment_mismatches = 0;
  double worst_upper_excess = 0.0;
  double worst_lower_deficit = 0.0;

  bool qa_holds() const {
    for (const auto& r : rounds)
      if (r.ns_calcs > r.sn_calcs) return false;
    return true;
  }
  bool tight() const { return upper_violations == 0 && lower_violations == 0; }
  bool ok() const { return tight() && qa_holds() && assignment_mismatches == 0; }
};

namespace detail {

inline CentroidState state_of(const Trajectory& traj, std::size_t t, std::size_t k) {
  CentroidState c(k, traj.dim);
  c.centroids = traj.centroids[t];
  c.refresh_norms();
  if (t > 0) {
    const auto& prev = traj.centroids[t - 1];
    for (std::size_t j = 0; j < k; ++j)
      c.p[j] = distance_direct(std::span<const double>(prev.data() + j * traj.dim, traj.dim), c.row(j));
  }
  return c;
}

struct TightnessCheck {
  LockstepReport& rep;
  static constexpr double tol = 1e-9;

  void upper(double ns, double sn) {
    if (ns > sn + tol) ++rep.upper_violations;
    rep.worst_upper_excess = std::max(rep.worst_upper_excess, ns - sn);
  }
  void lower(double ns, double sn) {
    if (ns < sn - tol) ++rep.lower_violations;
    rep.worst_lower_deficit = std::max(rep.worst_lower_deficit, sn - ns);
  }
};

}  // namespace detail

/// Replays `traj` (normally lloyd_reference's) for base and its ns variant.
/// `groups` is used by syin only; 0 picks max(1, k/10).
inline LockstepReport lockstep(LockstepBase base, const DataMatrix& data, const Trajectory& traj, std::size_t k,
                               std::uint64_t seed = 0, std::size_t groups = 0) {
  LockstepReport rep;
  detail::TightnessCheck check{rep};
  const std::size_t n = data.n_samples();
  const double m = pruning_margin(data);
  const bool elk = base == LockstepBase::elk;

  RoundStats scratch;
  CentroidState c0 = detail::state_of(traj, 0, k);
  GroupState gs;
  std::size_t G = 0;
  if (base == LockstepBase::syin) {
    gs = build_groups(c0, groups != 0 ? groups : default_group_count(k), seed, scratch);
    G = gs.group_count();
  }
  const std::size_t width = base == LockstepBase::syin ? G : (base == LockstepBase::exp ? 1 : k);

  NsHistory h;
  h.configure(k, data.dim(), traj.rounds() + 1, gs.members);
  h.record_round(c0, 0, scratch);

  // Round 0: full pass, everything tight.
  std::vector<double> D(k);
  auto truth = [&](const CentroidState& c, std::size_t i) {
    for (std::size_t j = 0; j < k; ++j) D[j] = distance(data.row(i), data.sq_norm(i), c.row(j), c.sq_norms[j]);
  };
  auto argmin = [&] {
    index_t best = 0;
    for (std::size_t j = 1; j < k; ++j)
      if (D[j] < D[best]) best = static_cast<index_t>(j);
    return best;
  };

  std::vector<index_t> a(n);
  std::vector<double> u(n), l(n * width);            // sn
  std::vector<double> u0(n), l0(n * width);          // ns records
  std::vector<std::size_t> tu(n, 0), tl(n * width, 0);
  for (std::size_t i = 0; i < n; ++i) {
    truth(c0, i);
    a[i] = argmin();
    u[i] = u0[i] = D[a[i]];
    if (base == LockstepBase::syin) {
      for (std::size_t f = 0; f < G; ++f) {
        double low = kInf;
        for (index_t j : gs.members[f])
          if (j != a[i]) low = std::min(low, D[j]);
        l[i * G + f] = l0[i * G + f] = low;
      }
    } else if (base == LockstepBase::exp) {
      double low = kInf;
      for (std::size_t j = 0; j < k; ++j)
        if (j != a[i]) low = std::min(low, D[j]);
      l[i] = l0[i] = low;
    } else {
      for (std::size_t j = 0; j < k; ++j) l[i * k + j] = l0[i * k + j] = D[j];
    }
  }

  for (std::size_t t = 1; t < traj.rounds(); ++t) {
    CentroidState c = detail::state_of(traj, t, k);
    h.record_round(c, t, scratch);
    if (elk || base == LockstepBase::exp) compute_cc(c, scratch);
    AnnulusIndex index;
    if (base == LockstepBase::exp) index.build(c);
    const TopTwo ptop = TopTwo::of(c.p);
    std::vector<double> q(G, 0.0);
    for (std::size_t f = 0; f < G; ++f)
      for (index_t j : gs.members[f]) q[f] = std::max(q[f], c.p[j]);

    LockstepRound lr;
    lr.round = t;
    // Charges `cost` distances to sn when it computes, and to ns when its
    // test fails (whether or not sn's did).
    auto event = [&](bool sn_skip, bool ns_skip, std::uint64_t cost) {
      if (!ns_skip) lr.ns_calcs += cost;
      if (!ns_skip && sn_skip) ++lr.ns_only_failures;
      if (!sn_skip) lr.sn_calcs += cost;
    };

    for (std::size_t i = 0; i < n; ++i) {
      truth(c, i);
      index_t ai = a[i];
      const index_t a_start = ai;
      double* li = l.data() + i * width;
      double* l0i = l0.data() + i * width;
      std::size_t* tli = tl.data() + i * width;

      u[i] += c.p[ai];
      auto ns_u = [&] { return u0[i] + h.P(ai, tu[i]); };
      auto tighten_u = [&](double d) {
        u[i] = d;
        u0[i] = d;
        tu[i] = t;
      };

      if (base == LockstepBase::selk || elk) {
        for (std::size_t j = 0; j < k; ++j) li[j] -= c.p[j];
        auto ns_l = [&](std::size_t j) { return l0i[j] - h.P(static_cast<index_t>(j), tli[j]); };
        check.upper(ns_u(), u[i]);
        for (std::size_t j = 0; j < k; ++j)
          if (j != ai) check.lower(ns_l(j), li[j]);

        if (elk) {
          const bool sn_out = c.s[ai] / 2 > u[i] + m;
          const bool ns_out = c.s[ai] / 2 > ns_u() + m;
          if (!ns_out && sn_out) ++lr.ns_only_failures;
          if (sn_out) {
            if (ai != argmin()) ++rep.assignment_mismatches;
            continue;
          }
        }
        bool tight = false;
        for (std::size_t jj = 0; jj < k; ++jj) {
          const auto j = static_cast<index_t>(jj);
          if (j == ai) continue;
          auto skip = [&](double up, double low) {
            return (elk && c.cc[ai * k + j] / 2 > up + m) || up + m < low;
          };
          bool sn_skip = skip(u[i], li[j]);
          bool ns_skip = skip(ns_u(), ns_l(j));
          if (!tight && !sn_skip) {
            event(false, ns_skip, 1);
            tighten_u(D[ai]);
            li[ai] = l0i[ai] = D[ai];
            tli[ai] = t;
            tight = true;
            sn_skip = skip(u[i], li[j]);
            ns_skip = skip(ns_u(), ns_l(j));
          }
          event(sn_skip, ns_skip, 1);
          if (sn_skip) continue;
          li[j] = l0i[j] = D[j];
          tli[j] = t;
          if (closer(D[j], j, u[i], ai)) {
            ai = j;
            tighten_u(D[j]);
          }
        }
      } else if (base == LockstepBase::exp) {
        li[0] -= ptop.max_except(ai);
        auto ns_l = [&] { return l0i[0] - h.max_except(ai, tli[0]); };
        check.upper(ns_u(), u[i]);
        check.lower(ns_l(), li[0]);
        auto skip = [&](double up, double low) { return std::max(low, c.s[ai] / 2) > up + m; };
        bool sn_skip = skip(u[i], li[0]);
        bool ns_skip = skip(ns_u(), ns_l());
        event(sn_skip, ns_skip, 1);
        if (!sn_skip) {
          tighten_u(D[ai]);
          sn_skip = skip(u[i], li[0]);
          ns_skip = skip(ns_u(), ns_l());
          const auto cand = exponion_candidates(index, ai, 2 * u[i] + c.s[ai] + m);
          event(sn_skip, ns_skip, cand.size() - 1);
          if (!sn_skip) {
            NearestTwo near;
            for (std::size_t j = 0; j < k; ++j) near.offer(D[j], static_cast<index_t>(j));
            ai = near.j1;
            tighten_u(near.d1);
            li[0] = l0i[0] = near.d2;
            tli[0] = t;
          }
        }
      } else {
        for (std::size_t f = 0; f < G; ++f) li[f] -= q[f];
        auto ns_l = [&](std::size_t f) { return l0i[f] - h.group_max(f, tli[f]); };
        check.upper(ns_u(), u[i]);
        double sn_min = kInf, ns_min = kInf;
        for (std::size_t f = 0; f < G; ++f) {
          check.lower(ns_l(f), li[f]);
          sn_min = std::min(sn_min, li[f]);
          ns_min = std::min(ns_min, ns_l(f));
        }
        const bool sn_out = sn_min > u[i] + m;
        if (!(ns_min > ns_u() + m) && sn_out) ++lr.ns_only_failures;
        if (!sn_out) {
          bool tight = false;
          double d_start = 0.0;
          for (std::size_t f = 0; f < G; ++f) {
            bool sn_skip = li[f] > u[i] + m;
            bool ns_skip = ns_l(f) > ns_u() + m;
            if (!tight && !sn_skip) {
              event(false, ns_skip, 1);
              tighten_u(D[ai]);
              d_start = D[ai];
              tight = true;
              sn_skip = li[f] > u[i] + m;
              ns_skip = ns_l(f) > ns_u() + m;
            }
            std::uint64_t cost = 0;
            NearestTwo near;
            for (index_t j : gs.members[f]) {
              if (j == ai) continue;
              if (j != a_start) ++cost;
              near.offer(j == a_start ? d_start : D[j], j);
            }
            event(sn_skip, ns_skip, cost);
            if (sn_skip) continue;
            if (closer(near.d1, near.j1, u[i], ai)) {
              const index_t old = ai;
              const double old_u = u[i];
              const std::size_t g_old = gs.group_of[old];
              const double ns_old = ns_l(g_old);
              ai = near.j1;
              tighten_u(near.d1);
              li[f] = l0i[f] = near.d2;
              tli[f] = t;
              li[g_old] = std::min(li[g_old], old_u);
              l0i[g_old] = std::min(g_old == f ? near.d2 : ns_old, old_u);
              tli[g_old] = t;
            } else {
              li[f] = l0i[f] = near.d1;
              tli[f] = t;
            }
          }
        }
      }
      if (ai != argmin()) ++rep.assignment_mismatches;
      a[i] = ai;
    }
    rep.rounds.push_back(lr);
  }
  return rep;
}

inline std::string to_string(LockstepBase b) {
  switch (b) {
    case LockstepBase::selk: return "selk";
    case LockstepBase::elk: return "elk";
    case LockstepBase::syin: return "syin";
    case LockstepBase::exp: return "exp";
  }
  return "?";
}

}  // namespace exkm
