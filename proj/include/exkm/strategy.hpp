#pragma once

// Interface between the Lloyd engine and the pluggable assignment strategies.

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "exkm/core.hpp"

namespace exkm {

/// Claims made by pruning tests, recorded for audited samples only.
class AuditSink {
 public:
  enum class Kind { skip, keep, candidates };
  struct Event {
    Kind kind;
    index_t sample;
    index_t centroid;             // skipped centroid, or the assignment kept
    std::vector<index_t> members; // candidate set
  };

  explicit AuditSink(std::vector<char> const* selected) : selected_(selected) {}

  bool wants(std::size_t i) const { return (*selected_)[i] != 0; }
  void skip(index_t i, index_t j) { events_.push_back({Kind::skip, i, j, {}}); }
  void keep(index_t i, index_t a) { events_.push_back({Kind::keep, i, a, {}}); }
  template <class Range>
  void candidates(index_t i, const Range& set) {
    events_.push_back({Kind::candidates, i, 0, std::vector<index_t>(set.begin(), set.end())});
  }
  std::vector<Event>& events() { return events_; }

 private:
  std::vector<char> const* selected_;
  std::vector<Event> events_;
};

struct Violation {
  std::size_t round = 0;
  index_t sample = 0;
  index_t centroid = 0;
  std::string what;
};

/// Frozen per-round view handed to every worker.
struct RoundContext {
  const DataMatrix& data;
  const CentroidState& centroids;
  std::size_t round;
  double margin;
};

/// Output of one sample chunk. Moves are (sample, previous cluster).
struct ChunkResult {
  RoundStats stats;
  std::vector<std::pair<index_t, index_t>> moves;
  AuditSink* audit = nullptr;
};

/// True distances of one sample to every centroid, used by auditing.
struct SampleTruth {
  index_t sample;
  std::span<const double> dist;
  index_t n1;
  index_t n2;
};

struct StrategyOptions {
  std::uint64_t seed = 0;
  std::size_t group_count_override = 0;  // 0: max(1, k / 10)
  std::size_t ns_reset_period = 0;       // 0: max(1, N / min(k, d))
};

class Strategy {
 public:
  virtual ~Strategy() = default;

  virtual std::string_view name() const = 0;

  /// Called once with the initial centroids, before the round-0 pass.
  virtual void setup(const DataMatrix& data, const CentroidState& c0, const StrategyOptions& opts,
                     RoundStats& stats) = 0;

  /// Round 0: `dist` holds all k distances of sample i; `a` is its nearest.
  virtual void init_sample(index_t i, std::span<const double> dist, index_t a) = 0;

  /// Build shared per-round structures (single-threaded, read-only afterwards).
  virtual void prepare_round(const DataMatrix& data, CentroidState& c, std::size_t round,
                             RoundStats& stats) = 0;

  /// Assign samples [begin, end); only bound rows in that range are touched.
  virtual void assign_range(const RoundContext& ctx, std::size_t begin, std::size_t end,
                            std::span<index_t> assignment, ChunkResult& out) = 0;

  virtual void finish_round(const RoundContext&) {}

  /// Check stored bounds of one sample against true distances.
  virtual void audit_sample(const RoundContext& ctx, const SampleTruth& truth, index_t a,
                            std::vector<Violation>& out) const = 0;
};

}  // namespace exkm
