#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "dqf/core.hpp"
#include "dqf/graph_build.hpp"

namespace dqf {

/// Per-node access counts plus the rebuild trigger counter. Increments are
/// lock-free and never lost under concurrent recording.
class AccessCounter {
 public:
  explicit AccessCounter(std::size_t node_count = 0);
  // Moves are for setup only; not safe against concurrent recording.
  AccessCounter(AccessCounter&& other) noexcept;

  void record_access(NodeId node);
  std::size_t size() const noexcept { return counts_.size(); }
  std::uint64_t count(NodeId node) const { return counts_.at(node).load(std::memory_order_relaxed); }
  std::uint64_t total_since_rebuild() const noexcept {
    return total_.load(std::memory_order_relaxed);
  }

  std::vector<std::uint64_t> snapshot() const;
  /// Replace all counts, e.g. from a persisted snapshot.
  void restore(std::span<const std::uint64_t> counts, std::uint64_t total);

  /// Rebuild epoch boundary: halves every count, zeroes the trigger.
  void start_new_epoch();

 private:
  std::vector<std::atomic<std::uint64_t>> counts_;
  std::atomic<std::uint64_t> total_{0};
};

struct HotIndexConfig {
  std::size_t n_query = 10000;
  double index_ratio = 0.01;
  BuildParams build;

  /// ceil(index_ratio * n).
  std::size_t hot_size(std::size_t n) const;
  void validate(std::size_t n) const;
};

/// Graph over a subset of the corpus. Adjacency ids are local (positions in
/// `members`); `members` and `entry_points` are global ids.
struct HotGraph {
  NeighborGraph graph;
  std::vector<NodeId> members;
  std::vector<NodeId> entry_points;
  std::size_t source_count = 0;
  std::size_t source_dim = 0;

  NodeId to_global(NodeId local) const { return members[local]; }
  std::vector<NodeId> local_entry_points() const;
  bool empty() const noexcept { return members.empty(); }
};

bool should_rebuild(const AccessCounter& counter, const HotIndexConfig& config);

/// Top `n_idx` ids by count, ties by ascending id, highest count first.
std::vector<NodeId> select_hot_nodes(std::span<const std::uint64_t> counts, std::size_t n_idx);
std::vector<NodeId> select_hot_nodes(const AccessCounter& counter, std::size_t n_idx);

/// knng_k shrunk to min(knng_k, hot_count / 5) so small subsets stay buildable.
BuildParams scaled_hot_params(const BuildParams& build, std::size_t hot_count);

HotGraph build_hot_index(const VectorDataset& dataset, std::span<const NodeId> hot_ids,
                         const BuildParams& build);

/// Full graph, current hot graph and access counters. The hot graph is
/// published by pointer swap: a reader holding `hot()` keeps a consistent
/// snapshot for as long as it needs one.
class DualIndex {
 public:
  DualIndex(std::size_t dim, FullIndex full, HotIndexConfig config);
  DualIndex(DualIndex&& other) noexcept;

  std::size_t node_count() const noexcept { return full_.graph.node_count(); }
  std::size_t dim() const noexcept { return dim_; }
  const FullIndex& full() const noexcept { return full_; }
  const HotIndexConfig& config() const noexcept { return config_; }
  void set_config(const HotIndexConfig& config);

  std::shared_ptr<const HotGraph> hot() const;
  AccessCounter& counter() noexcept { return counter_; }
  const AccessCounter& counter() const noexcept { return counter_; }

  /// Installs `hot` and starts a new counting epoch.
  void publish_hot(HotGraph hot);
  /// Installs `hot` without touching the counters (used when reloading).
  void restore_hot(HotGraph hot);

  /// select_hot_nodes -> build_hot_index -> publish_hot, using config().
  void rebuild_hot(const VectorDataset& dataset);

 private:
  void check_compatible(const HotGraph& hot) const;

  std::size_t dim_;
  FullIndex full_;
  HotIndexConfig config_;
  AccessCounter counter_;
  mutable std::mutex hot_mutex_;
  std::shared_ptr<const HotGraph> hot_;
};

}  // namespace dqf
