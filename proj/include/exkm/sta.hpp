#pragma once

#include "exkm/centroid_ops.hpp"
#include "exkm/strategy.hpp"

namespace exkm {

/// Standard algorithm: every sample against every centroid, every round.
class StandardStrategy final : public Strategy {
 public:
  std::string_view name() const override { return "sta"; }

  void setup(const DataMatrix&, const CentroidState&, const StrategyOptions&, RoundStats&) override {}
  void init_sample(index_t, std::span<const double>, index_t) override {}
  void prepare_round(const DataMatrix&, CentroidState&, std::size_t, RoundStats&) override {}

  void assign_range(const RoundContext& ctx, std::size_t begin, std::size_t end,
                    std::span<index_t> assignment, ChunkResult& out) override {
    const std::size_t k = ctx.centroids.k;
    for (std::size_t i = begin; i < end; ++i) {
      double best = kInf;
      index_t arg = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const double d = sample_distance(ctx, i, j);
        if (d < best) {
          best = d;
          arg = static_cast<index_t>(j);
        }
      }
      out.stats.dist_calcs_assign += k;
      if (arg != assignment[i]) {
        out.moves.emplace_back(static_cast<index_t>(i), assignment[i]);
        assignment[i] = arg;
      }
    }
  }

  void audit_sample(const RoundContext&, const SampleTruth&, index_t, std::vector<Violation>&) const override {}
};

}  // namespace exkm
