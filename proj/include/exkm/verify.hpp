#pragma once

// Brute-force Lloyd reference, trajectory comparison and bound auditing.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "exkm/engine.hpp"

namespace exkm {

/// Unoptimised Lloyd: full N x k scan and from-scratch means every round.
inline Trajectory lloyd_reference(const DataMatrix& data, const CentroidState& init, std::size_t max_rounds) {
  const std::size_t n = data.n_samples();
  const std::size_t d = data.dim();
  const std::size_t k = init.k;
  Trajectory traj;
  traj.dim = d;
  CentroidState c = init;
  c.refresh_norms();
  std::vector<index_t> a(n, 0);

  for (std::size_t round = 0; round < max_rounds; ++round) {
    std::size_t changes = 0;
    for (std::size_t i = 0; i < n; ++i) {
      index_t best = 0;
      double best_d = kInf;
      for (std::size_t j = 0; j < k; ++j) {
        const double dist = distance(data.row(i), data.sq_norm(i), c.row(j), c.sq_norms[j]);
        if (dist < best_d) {
          best_d = dist;
          best = static_cast<index_t>(j);
        }
      }
      if (round == 0 || best != a[i]) ++changes;
      a[i] = best;
    }
    traj.assignments.push_back(a);
    traj.centroids.push_back(c.centroids);
    if (round > 0 && changes == 0) break;

    std::vector<double> sum(k * d, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++count[a[i]];
      auto x = data.row(i);
      for (std::size_t t = 0; t < d; ++t) sum[a[i] * d + t] += x[t];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (count[j] == 0) continue;
      for (std::size_t t = 0; t < d; ++t) c.centroids[j * d + t] = sum[j * d + t] / static_cast<double>(count[j]);
    }
    c.refresh_norms();
  }
  return traj;
}

struct TrajectoryReport {
  bool pass = true;
  std::optional<std::size_t> round;
  std::optional<index_t> sample;
  std::string message;

  explicit operator bool() const { return pass; }
};

/// Exact per-round assignment equality; centroids within 1e-9 relative
/// (scaled by max(1, |x|, |y|)).
inline TrajectoryReport assert_trajectory_equal(const Trajectory& a, const Trajectory& b) {
  TrajectoryReport r;
  const std::size_t rounds = std::min(a.rounds(), b.rounds());
  for (std::size_t t = 0; t < rounds; ++t) {
    const auto& x = a.assignments[t];
    const auto& y = b.assignments[t];
    if (x.size() != y.size()) {
      r = {false, t, std::nullopt, "round " + std::to_string(t) + ": sample counts differ"};
      return r;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] != y[i]) {
        std::ostringstream os;
        os << "round " << t << ", sample " << i << ": assignment " << x[i] << " vs " << y[i];
        r = {false, t, static_cast<index_t>(i), os.str()};
        return r;
      }
    }
    if (t < a.centroids.size() && t < b.centroids.size()) {
      const auto& cx = a.centroids[t];
      const auto& cy = b.centroids[t];
      for (std::size_t e = 0; e < std::min(cx.size(), cy.size()); ++e) {
        const double scale = std::max({1.0, std::abs(cx[e]), std::abs(cy[e])});
        if (std::abs(cx[e] - cy[e]) > 1e-9 * scale) {
          std::ostringstream os;
          os << "round " << t << ": centroid coordinate " << e << " differs (" << cx[e] << " vs " << cy[e] << ")";
          r = {false, t, std::nullopt, os.str()};
          return r;
        }
      }
    }
  }
  if (a.rounds() != b.rounds()) {
    r = {false, rounds, std::nullopt,
         "round counts differ: " + std::to_string(a.rounds()) + " vs " + std::to_string(b.rounds())};
  }
  return r;
}

/// Runs with per-round auditing and returns every recorded violation.
inline std::vector<Violation> audit_bounds(RunConfig config, const DataMatrix& data, const CentroidState& init) {
  config.audit = true;
  return run(config, data, init).violations;
}

inline std::vector<Violation> audit_bounds(RunConfig config, const DataMatrix& data) {
  config.audit = true;
  return run(config, data).violations;
}

/// Sum of squared distances to assigned centroids, via the shared kernel.
inline double objective(const DataMatrix& data, std::span<const index_t> assignment, std::span<const double> centroids) {
  const std::size_t d = data.dim();
  double total = 0.0;
  for (std::size_t i = 0; i < data.n_samples(); ++i) {
    std::span<const double> c(centroids.data() + assignment[i] * d, d);
    const double dist = distance(data.row(i), data.sq_norm(i), c, dot(c, c));
    total += dist * dist;
  }
  return total;
}

}  // namespace exkm
