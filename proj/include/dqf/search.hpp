#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dqf/core.hpp"
#include "dqf/decision_tree.hpp"
#include "dqf/graph_build.hpp"
#include "dqf/hot_index.hpp"

namespace dqf {

struct SearchParams {
  std::size_t k = 10;
  std::size_t l = 100;
  std::size_t s_l = 100;
  std::size_t eval_gap = 50;
  std::size_t add_step = 0;

  void validate() const;
};

struct SearchTrace {
  // Full phase (or the single phase of a plain beam search).
  std::uint64_t dist_count = 0;
  std::uint64_t update_count = 0;
  std::uint64_t expansions = 0;
  // Hot phase cost, kept out of the features.
  std::uint64_t hot_dist_count = 0;
  double hot_first = 0.0;
  double hot_kth = 0.0;
  double full_first = 0.0;
  double full_kth = 0.0;
  bool terminated_early = false;
  std::uint64_t checkpoints_evaluated = 0;
};

/// Sorted (distance, id) working set of a beam search, bounded to
/// `capacity`, with a per-entry expanded flag.
class CandidatePool {
 public:
  explicit CandidatePool(std::size_t capacity) : capacity_(capacity) { entries_.reserve(capacity + 1); }

  /// False if the candidate falls outside the capacity or is already present.
  bool insert(Neighbor n);
  bool has_unexpanded() const noexcept { return cursor_ < entries_.size(); }
  /// Marks and returns the closest unexpanded entry.
  NodeId expand_next();
  void reset_expanded();

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  const Neighbor& operator[](std::size_t i) const { return entries_[i].n; }
  ResultList top(std::size_t k) const;
  /// Debug check: sorted by (distance, id), no duplicate ids.
  bool well_formed() const;

 private:
  struct Entry {
    Neighbor n;
    bool expanded;
  };
  std::vector<Entry> entries_;
  std::size_t capacity_;
  std::size_t cursor_ = 0;
};

/// Called at every full-phase checkpoint with the live trace and pool.
using CheckpointPolicy = std::function<Verdict(const SearchTrace&, const CandidatePool&)>;

struct SearchOutcome {
  ResultList results;
  SearchTrace trace;
};

/// Best-first beam search over one graph. `evaluation_log`, when given,
/// receives every id whose distance was computed, in order.
SearchOutcome beam_search(const NeighborGraph& graph, std::span<const NodeId> entry,
                          const VectorDataset& dataset, std::span<const float> query,
                          std::size_t k, std::size_t l,
                          std::vector<NodeId>* evaluation_log = nullptr);

/// Hot phase then full phase. The policy is consulted every `eval_gap`
/// full-phase distance computations; an empty policy never stops early.
/// Does not touch access counters.
SearchOutcome two_phase_search(const FullIndex& full, const HotGraph& hot,
                               const VectorDataset& dataset, std::span<const float> query,
                               const SearchParams& params, const CheckpointPolicy& policy = {});

/// Tree-gated two-phase search over the index's current hot graph. Records
/// one access for each returned id.
SearchOutcome dynamic_search(DualIndex& index, const VectorDataset& dataset,
                             std::span<const float> query, const SearchParams& params,
                             const DecisionTree& tree);

/// The six checkpoint features. A zero k-th distance yields ratio 1.
FeatureVector extract_features(const SearchTrace& trace);

}  // namespace dqf
