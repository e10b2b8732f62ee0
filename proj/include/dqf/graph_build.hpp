#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dqf/core.hpp"

namespace dqf {

/// Directed graph over dataset ids. Each adjacency list is ordered by
/// ascending distance to its owner; no self-loops, no duplicates.
class NeighborGraph {
 public:
  NeighborGraph() = default;
  NeighborGraph(std::size_t node_count, std::size_t max_degree);
  NeighborGraph(std::vector<std::vector<NodeId>> adjacency, std::size_t max_degree);

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::size_t max_degree() const noexcept { return max_degree_; }
  std::size_t edge_count() const noexcept;

  std::span<const NodeId> neighbors(NodeId node) const { return adjacency_[node]; }
  std::vector<NodeId>& mutable_neighbors(NodeId node) { return adjacency_[node]; }
  const std::vector<std::vector<NodeId>>& adjacency() const noexcept { return adjacency_; }

  /// Throws std::logic_error naming the first violated structural invariant.
  void validate() const;

  friend bool operator==(const NeighborGraph&, const NeighborGraph&) = default;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t max_degree_ = 0;
};

struct BuildParams {
  std::size_t knng_k = 100;
  std::size_t nn_descent_iters = 8;
  double angle_threshold_degrees = 60.0;
  std::size_t max_degree = 50;
  std::uint64_t seed = 20240601;

  void validate() const;
};

struct FullIndex {
  NeighborGraph graph;
  std::vector<NodeId> entry_points;
};

/// Approximate k-NN graph by NN-descent (random init + neighbor-of-neighbor
/// joins). Lists hold exactly knng_k ids ordered by (distance, id). Result
/// depends only on the seed, not on the number of worker threads.
NeighborGraph build_knng(const VectorDataset& dataset, const BuildParams& params);

/// Angle-diversified neighbor selection for one node over its 2-hop KNNG
/// candidates. A candidate is kept iff the angle it subtends at `node` with
/// every already-kept neighbor is at least `angle_degrees`. At most
/// `max_degree` ids, in ascending distance.
std::vector<NodeId> ssg_prune(const NeighborGraph& knng, const VectorDataset& dataset,
                              NodeId node, double angle_degrees, std::size_t max_degree);

/// Greedy angle filter over an already sorted candidate list. Exposed so the
/// selection rule can be checked independently of candidate gathering.
std::vector<NodeId> angle_filter(const VectorDataset& dataset, NodeId node,
                                 std::span<const Neighbor> sorted_candidates,
                                 double angle_degrees, std::size_t max_degree);

/// Id of the point nearest the centroid, as a singleton list.
std::vector<NodeId> select_entry_points(const VectorDataset& dataset);

/// Adds edges until every node is reachable from `entry_points`. Each
/// unreached node gets an in-edge from its nearest reached node that still
/// has spare degree; if none has, the nearest reached node drops its longest
/// edge. Returns the number of edges added.
std::size_t repair_connectivity(NeighborGraph& graph, const VectorDataset& dataset,
                                std::span<const NodeId> entry_points);

/// Number of nodes reachable from the entry points.
std::size_t reachable_count(const NeighborGraph& graph, std::span<const NodeId> entry_points);

/// KNNG -> per-node angle pruning -> connectivity repair.
FullIndex build_full_index(const VectorDataset& dataset, const BuildParams& params);

}  // namespace dqf
