#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dqf/core.hpp"
#include "dqf/decision_tree.hpp"
#include "dqf/hot_index.hpp"
#include "dqf/search.hpp"

namespace dqf {

struct TrainingSample {
  LabeledSample sample;
  std::size_t query = 0;       // position in TrainingSet::queries
  std::size_t checkpoint = 0;  // 0-based; the completion checkpoint is last
  bool completion = false;
};

struct QueryTraceSummary {
  std::size_t source_index = 0;  // position in the caller's query list
  std::vector<NodeId> final_topk;
  std::uint64_t dist_count_total = 0;
  std::size_t checkpoints = 0;
};

struct TrainingSet {
  std::vector<TrainingSample> samples;
  std::vector<QueryTraceSummary> queries;

  std::vector<LabeledSample> labeled() const;
};

/// Drops exact-duplicate queries, runs each remaining one through the full
/// two-phase search without early termination, and logs features at every
/// checkpoint plus once at completion. A checkpoint is labeled Continue iff
/// its top-k id set differs from the final one.
TrainingSet generate_training_data(const DualIndex& index, const VectorDataset& dataset,
                                   const VectorDataset& queries, const SearchParams& params);

/// Reruns one query with termination forced at `checkpoint` (add_step 0).
SearchOutcome replay_until_checkpoint(const DualIndex& index, const VectorDataset& dataset,
                                      std::span<const float> query, const SearchParams& params,
                                      std::size_t checkpoint);

}  // namespace dqf
