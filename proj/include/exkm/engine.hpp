#pragma once

// The Lloyd scaffold: round-0 initialisation, then alternating strategy
// assignment and delta-based centroid update until no assignment changes.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "exkm/core.hpp"
#include "exkm/elkan.hpp"
#include "exkm/hamerly.hpp"
#include "exkm/init.hpp"
#include "exkm/sta.hpp"
#include "exkm/strategy.hpp"
#include "exkm/yinyang.hpp"

namespace exkm {

inline constexpr std::array<std::string_view, 12> kAlgorithms = {
    "sta", "selk", "elk", "ham", "ann", "exp", "syin", "yin", "selk-ns", "elk-ns", "syin-ns", "exp-ns"};

class UnknownAlgorithm : public Error {
 public:
  explicit UnknownAlgorithm(std::string_view name)
      : Error("unknown algorithm '" + std::string(name) + "'") {}
};

inline std::string algorithm_list() {
  std::string s;
  for (auto a : kAlgorithms) {
    if (!s.empty()) s += ", ";
    s += a;
  }
  return s;
}

inline std::unique_ptr<Strategy> make_strategy(std::string_view name) {
  if (name == "sta") return std::make_unique<StandardStrategy>();
  if (name == "selk") return std::make_unique<SelkStrategy>();
  if (name == "elk") return std::make_unique<ElkStrategy>();
  if (name == "ham") return std::make_unique<HamStrategy>();
  if (name == "ann") return std::make_unique<AnnStrategy>();
  if (name == "exp") return std::make_unique<ExpStrategy>();
  if (name == "syin") return std::make_unique<SyinStrategy>();
  if (name == "yin") return std::make_unique<YinStrategy>();
  if (name == "selk-ns") return std::make_unique<SelkNsStrategy>();
  if (name == "elk-ns") return std::make_unique<ElkNsStrategy>();
  if (name == "syin-ns") return std::make_unique<SyinNsStrategy>();
  if (name == "exp-ns") return std::make_unique<ExpNsStrategy>();
  throw UnknownAlgorithm(name);
}

struct RunConfig {
  std::string algorithm = "sta";
  std::size_t k = 1;
  std::uint64_t seed = 0;
  std::size_t max_rounds = 1000;
  std::size_t n_workers = 1;
  std::size_t group_count_override = 0;
  std::size_t ns_reset_period = 0;
  bool record_trajectory = false;
  bool audit = false;

  void validate() const {
    if (k == 0) throw Error("k must be at least 1");
    if (max_rounds == 0) throw Error("max_rounds must be at least 1");
    if (n_workers == 0) throw Error("n_workers must be at least 1");
    make_strategy(algorithm);
  }
};

/// Per-round assignments and the centroids they were computed against.
struct Trajectory {
  std::vector<std::vector<index_t>> assignments;
  std::vector<std::vector<double>> centroids;
  std::size_t dim = 0;

  std::size_t rounds() const { return assignments.size(); }
};

struct RunResult {
  CentroidState final_centroids;
  std::vector<index_t> final_assignments;
  std::size_t rounds_executed = 0;
  std::vector<RoundStats> per_round_stats;
  bool converged = false;
  Trajectory trajectory;             // filled when record_trajectory
  std::vector<Violation> violations; // filled when audit
  double wall_ms = 0.0;

  RoundStats totals() const {
    RoundStats t;
    for (const auto& r : per_round_stats) t += r;
    return t;
  }
};

inline bool converged(std::uint64_t changes) { return changes == 0; }

/// Per-cluster coordinate sums and member counts.
struct ClusterSums {
  std::vector<double> sums;
  std::vector<std::size_t> counts;

  void recompute(const DataMatrix& data, std::span<const index_t> assignment, std::size_t k) {
    const std::size_t d = data.dim();
    sums.assign(k * d, 0.0);
    counts.assign(k, 0);
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      const index_t j = assignment[i];
      ++counts[j];
      auto x = data.row(i);
      for (std::size_t t = 0; t < d; ++t) sums[j * d + t] += x[t];
    }
  }
};

/// Applies the moves (sample, previous cluster) to the sums, then sets every
/// non-empty centroid to its mean; empty clusters keep their centroid. Sets
/// p(j) = |old c(j) - new c(j)| (k centroid distance calls).
inline CentroidState update_step(const DataMatrix& data, std::span<const index_t> assignment,
                                 std::span<const std::pair<index_t, index_t>> changed,
                                 const CentroidState& prev, ClusterSums& acc, RoundStats& stats) {
  const std::size_t d = data.dim();
  for (const auto& [i, from] : changed) {
    const index_t to = assignment[i];
    auto x = data.row(i);
    for (std::size_t t = 0; t < d; ++t) {
      acc.sums[from * d + t] -= x[t];
      acc.sums[to * d + t] += x[t];
    }
    --acc.counts[from];
    ++acc.counts[to];
  }
  CentroidState next(prev.k, d);
  for (std::size_t j = 0; j < prev.k; ++j) {
    auto dst = next.row(j);
    if (acc.counts[j] == 0) {
      auto src = prev.row(j);
      std::copy(src.begin(), src.end(), dst.begin());
    } else {
      const double n = static_cast<double>(acc.counts[j]);
      for (std::size_t t = 0; t < d; ++t) dst[t] = acc.sums[j * d + t] / n;
    }
  }
  next.refresh_norms();
  for (std::size_t j = 0; j < prev.k; ++j) next.p[j] = distance_direct(prev.row(j), next.row(j));
  stats.dist_calcs_centroid += prev.k;
  return next;
}

namespace detail {

inline constexpr std::size_t kChunk = 1024;
inline constexpr std::size_t kFullRecomputePeriod = 100;

/// Runs fn(chunk) for every chunk on n_workers threads.
inline void for_each_chunk(std::size_t n_chunks, std::size_t n_workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(n_workers, n_chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) fn(c);
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
}

inline bool audit_selects(std::uint64_t seed, std::size_t round, std::size_t i) {
  std::uint64_t h = seed ^ (0x9e3779b97f4a7c15ULL * (round + 1)) ^ (0xbf58476d1ce4e5b9ULL * (i + 1));
  h ^= h >> 31;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 29;
  return h % 100 == 0;
}

/// Checks recorded claims, final assignments and stored bounds of the
/// selected samples against freshly computed distances.
inline void audit_round(const Strategy& strategy, const RoundContext& ctx, std::span<const index_t> assignment,
                        const std::vector<char>& selected, std::vector<ChunkResult>& chunks,
                        std::vector<Violation>& out) {
  const std::size_t k = ctx.centroids.k;
  const std::size_t n = ctx.data.n_samples();
  std::vector<double> dist(k);
  auto truth_of = [&](index_t i, std::vector<double>& buf) {
    for (std::size_t j = 0; j < k; ++j) buf[j] = sample_distance(ctx, i, j);
    return nearest_two(buf);
  };

  for (auto& chunk : chunks) {
    if (!chunk.audit) continue;
    for (const auto& ev : chunk.audit->events()) {
      const NearestTwo nt = truth_of(ev.sample, dist);
      switch (ev.kind) {
        case AuditSink::Kind::skip:
          if (ev.centroid == nt.j1) out.push_back({ctx.round, ev.sample, ev.centroid, "skipped centroid is nearest"});
          break;
        case AuditSink::Kind::keep:
          if (ev.centroid != nt.j1) out.push_back({ctx.round, ev.sample, ev.centroid, "outer test kept a non-nearest centroid"});
          break;
        case AuditSink::Kind::candidates: {
          auto has = [&](index_t j) { return std::find(ev.members.begin(), ev.members.end(), j) != ev.members.end(); };
          if (!has(nt.j1)) out.push_back({ctx.round, ev.sample, nt.j1, "candidate set misses nearest"});
          if (k > 1 && !has(nt.j2)) out.push_back({ctx.round, ev.sample, nt.j2, "candidate set misses second nearest"});
          break;
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!selected[i]) continue;
    const auto ii = static_cast<index_t>(i);
    const NearestTwo nt = truth_of(ii, dist);
    if (assignment[i] != nt.j1) out.push_back({ctx.round, ii, assignment[i], "assignment is not the nearest centroid"});
    strategy.audit_sample(ctx, SampleTruth{ii, dist, nt.j1, nt.j2}, assignment[i], out);
  }
}

}  // namespace detail

/// Runs from explicit initial centroids.
inline RunResult run(const RunConfig& config, const DataMatrix& data, CentroidState centroids) {
  config.validate();
  if (centroids.k != config.k || centroids.dim != data.dim()) throw Error("initial centroids do not match k and d");
  if (config.k > data.n_samples()) throw Error("k exceeds the number of samples");

  const auto t_start = std::chrono::steady_clock::now();
  const std::size_t n = data.n_samples();
  const std::size_t k = config.k;
  const double margin = pruning_margin(data);
  const std::size_t n_chunks = (n + detail::kChunk - 1) / detail::kChunk;

  auto strategy = make_strategy(config.algorithm);
  StrategyOptions opts{config.seed, config.group_count_override, config.ns_reset_period};

  RunResult result;
  std::vector<index_t> assignment(n, 0);
  std::vector<char> selected(config.audit ? n : 0, 0);
  auto select_audit = [&](std::size_t round) {
    for (std::size_t i = 0; i < n; ++i) selected[i] = n <= 500 || detail::audit_selects(config.seed, round, i);
  };
  auto record = [&](const CentroidState& c) {
    if (!config.record_trajectory) return;
    result.trajectory.assignments.push_back(assignment);
    result.trajectory.centroids.push_back(c.centroids);
  };
  result.trajectory.dim = data.dim();

  // Round 0: full N x k pass, all bounds tight.
  RoundStats r0;
  r0.round = 0;
  strategy->setup(data, centroids, opts, r0);
  {
    std::vector<ChunkResult> chunks(n_chunks);
    detail::for_each_chunk(n_chunks, config.n_workers, [&](std::size_t ci) {
      std::vector<double> dist(k);
      const std::size_t begin = ci * detail::kChunk;
      const std::size_t end = std::min(n, begin + detail::kChunk);
      for (std::size_t i = begin; i < end; ++i) {
        index_t best = 0;
        for (std::size_t j = 0; j < k; ++j) {
          dist[j] = distance(data.row(i), data.sq_norm(i), centroids.row(j), centroids.sq_norms[j]);
          if (dist[j] < dist[best]) best = static_cast<index_t>(j);
        }
        assignment[i] = best;
        strategy->init_sample(static_cast<index_t>(i), dist, best);
      }
      chunks[ci].stats.dist_calcs_init += (end - begin) * k;
    });
    for (const auto& c : chunks) r0 += c.stats;
    r0.changes = n;
    if (config.audit) {
      select_audit(0);
      RoundContext ctx{data, centroids, 0, margin};
      detail::audit_round(*strategy, ctx, assignment, selected, chunks, result.violations);
    }
  }
  record(centroids);

  ClusterSums acc;
  acc.recompute(data, assignment, k);
  std::vector<std::pair<index_t, index_t>> moves;
  centroids = update_step(data, assignment, moves, centroids, acc, r0);
  result.per_round_stats.push_back(r0);

  for (std::size_t round = 1; round < config.max_rounds; ++round) {
    RoundStats st;
    st.round = round;
    strategy->prepare_round(data, centroids, round, st);
    RoundContext ctx{data, centroids, round, margin};

    std::vector<ChunkResult> chunks(n_chunks);
    std::vector<AuditSink> sinks;
    if (config.audit) {
      select_audit(round);
      sinks.assign(n_chunks, AuditSink(&selected));
      for (std::size_t ci = 0; ci < n_chunks; ++ci) chunks[ci].audit = &sinks[ci];
    }
    detail::for_each_chunk(n_chunks, config.n_workers, [&](std::size_t ci) {
      const std::size_t begin = ci * detail::kChunk;
      const std::size_t end = std::min(n, begin + detail::kChunk);
      strategy->assign_range(ctx, begin, end, assignment, chunks[ci]);
    });

    moves.clear();
    for (auto& c : chunks) {
      st += c.stats;
      moves.insert(moves.end(), c.moves.begin(), c.moves.end());
    }
    st.changes = moves.size();
    if (config.audit) detail::audit_round(*strategy, ctx, assignment, selected, chunks, result.violations);
    strategy->finish_round(ctx);
    record(centroids);

    if (converged(st.changes)) {
      result.per_round_stats.push_back(st);
      result.converged = true;
      break;
    }
    if (round % detail::kFullRecomputePeriod == 0) {
      acc.recompute(data, assignment, k);
      moves.clear();
    }
    centroids = update_step(data, assignment, moves, centroids, acc, st);
    result.per_round_stats.push_back(st);
  }

  result.rounds_executed = result.per_round_stats.size();
  result.final_assignments = std::move(assignment);
  result.final_centroids = std::move(centroids);
  result.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

inline RunResult run(const RunConfig& config, const DataMatrix& data) {
  config.validate();
  return run(config, data, init_centroids(data, config.k, config.seed));
}

}  // namespace exkm
