#pragma once

#include <memory>
#include <vector>

#include "exkm/exkm.hpp"

namespace exkm::test {

inline DataMatrix rows(std::size_t dim, std::vector<double> values) {
  const std::size_t n = values.size() / dim;
  return DataMatrix(n, dim, std::move(values));
}

inline CentroidState centroids(std::size_t dim, const std::vector<double>& values) {
  CentroidState c(values.size() / dim, dim);
  c.centroids = values;
  c.refresh_norms();
  return c;
}

// Naive sqrt of summed squared differences.
inline double naive_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) s += (a[t] - b[t]) * (a[t] - b[t]);
  return std::sqrt(s);
}

// Drives one strategy by hand: round-0 init from exact distances, then
// single rounds against the current centroid state.
struct Driver {
  DataMatrix data;
  CentroidState c;
  std::unique_ptr<Strategy> strategy;
  std::vector<index_t> assignment;
  std::vector<char> all;
  RoundStats setup_stats;

  Driver(DataMatrix d, CentroidState c0, std::unique_ptr<Strategy> s, StrategyOptions opts = {})
      : data(std::move(d)), c(std::move(c0)), strategy(std::move(s)) {
    const std::size_t n = data.n_samples();
    assignment.assign(n, 0);
    all.assign(n, 1);
    strategy->setup(data, c, opts, setup_stats);
    std::vector<double> dist(c.k);
    for (std::size_t i = 0; i < n; ++i) {
      index_t best = 0;
      for (std::size_t j = 0; j < c.k; ++j) {
        dist[j] = distance(data.row(i), data.sq_norm(i), c.row(j), c.sq_norms[j]);
        if (dist[j] < dist[best]) best = static_cast<index_t>(j);
      }
      assignment[i] = best;
      strategy->init_sample(static_cast<index_t>(i), dist, best);
    }
  }

  // Runs one assignment round; `sink` receives audit claims if given.
  ChunkResult round(std::size_t r = 1, AuditSink* sink = nullptr) {
    RoundStats st;
    strategy->prepare_round(data, c, r, st);
    RoundContext ctx{data, c, r, pruning_margin(data)};
    ChunkResult out;
    out.audit = sink;
    strategy->assign_range(ctx, 0, data.n_samples(), assignment, out);
    out.stats.dist_calcs_centroid += st.dist_calcs_centroid;
    strategy->finish_round(ctx);
    return out;
  }

  // Moves centroid j to `to`, setting p(j) accordingly.
  void move(std::size_t j, std::vector<double> to) {
    std::vector<double> from(c.row(j).begin(), c.row(j).end());
    std::copy(to.begin(), to.end(), c.row(j).begin());
    c.refresh_norms();
    c.p[j] = naive_distance(from, to);
  }

  void settle() { std::fill(c.p.begin(), c.p.end(), 0.0); }

  std::vector<Violation> audit(std::size_t r = 1) const {
    RoundContext ctx{data, c, r, pruning_margin(data)};
    std::vector<Violation> out;
    std::vector<double> dist(c.k);
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
      for (std::size_t j = 0; j < c.k; ++j) dist[j] = naive_distance(data.row(i), c.row(j));
      const NearestTwo nt = nearest_two(dist);
      strategy->audit_sample(ctx, SampleTruth{static_cast<index_t>(i), dist, nt.j1, nt.j2}, assignment[i], out);
    }
    return out;
  }
};

}  // namespace exkm::test
