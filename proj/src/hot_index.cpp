#include "dqf/hot_index.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dqf {

AccessCounter::AccessCounter(std::size_t node_count) : counts_(node_count) {}

AccessCounter::AccessCounter(AccessCounter&& other) noexcept
    : counts_(std::move(other.counts_)), total_(other.total_.load()) {}

void AccessCounter::record_access(NodeId node) {
  if (node >= counts_.size()) throw std::invalid_argument("record_access: node out of range");
  counts_[node].fetch_add(1, std::memory_order_relaxed);
  total_.fetch_add(1, std::memory_order_relaxed);
}

std::vector<std::uint64_t> AccessCounter::snapshot() const {
  std::vector<std::uint64_t> out(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) out[i] = counts_[i].load(std::memory_order_relaxed);
  return out;
}

void AccessCounter::restore(std::span<const std::uint64_t> counts, std::uint64_t total) {
  if (counts.size() != counts_.size()) throw std::invalid_argument("restore: size mismatch");
  for (std::size_t i = 0; i < counts.size(); ++i) counts_[i].store(counts[i], std::memory_order_relaxed);
  total_.store(total, std::memory_order_relaxed);
}

void AccessCounter::start_new_epoch() {
  for (auto& c : counts_) {
    std::uint64_t cur = c.load(std::memory_order_relaxed);
    while (!c.compare_exchange_weak(cur, cur / 2, std::memory_order_relaxed)) {
    }
  }
  total_.store(0, std::memory_order_relaxed);
}

std::size_t HotIndexConfig::hot_size(std::size_t n) const {
  return static_cast<std::size_t>(std::ceil(index_ratio * static_cast<double>(n)));
}

void HotIndexConfig::validate(std::size_t n) const {
  if (n_query == 0) throw std::invalid_argument("n_query must be positive");
  if (!(index_ratio > 0.0 && index_ratio <= 1.0))
    throw std::invalid_argument("index ratio must lie in (0, 1]");
  const std::size_t hot = hot_size(n);
  if (hot < scaled_hot_params(build, hot).knng_k + 1)
    throw std::invalid_argument("index ratio leaves too few hot nodes to build a graph");
}

std::vector<NodeId> HotGraph::local_entry_points() const {
  std::vector<NodeId> local;
  for (NodeId g : entry_points) {
    auto it = std::lower_bound(members.begin(), members.end(), g);
    if (it == members.end() || *it != g) throw std::logic_error("hot entry point is not a member");
    local.push_back(static_cast<NodeId>(it - members.begin()));
  }
  return local;
}

bool should_rebuild(const AccessCounter& counter, const HotIndexConfig& config) {
  return counter.total_since_rebuild() > config.n_query;
}

std::vector<NodeId> select_hot_nodes(std::span<const std::uint64_t> counts, std::size_t n_idx) {
  if (n_idx > counts.size()) throw std::invalid_argument("select_hot_nodes: n_idx exceeds node count");
  std::vector<NodeId> ids(counts.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<NodeId>(i);
  auto hotter = [&](NodeId a, NodeId b) {
    return counts[a] > counts[b] || (counts[a] == counts[b] && a < b);
  };
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_idx), ids.end(), hotter);
  ids.resize(n_idx);
  return ids;
}

std::vector<NodeId> select_hot_nodes(const AccessCounter& counter, std::size_t n_idx) {
  const auto counts = counter.snapshot();
  return select_hot_nodes(std::span<const std::uint64_t>(counts), n_idx);
}

BuildParams scaled_hot_params(const BuildParams& build, std::size_t hot_count) {
  BuildParams out = build;
  out.knng_k = std::max<std::size_t>(1, std::min(build.knng_k, hot_count / 5));
  return out;
}

HotGraph build_hot_index(const VectorDataset& dataset, std::span<const NodeId> hot_ids,
                         const BuildParams& build) {
  if (hot_ids.size() < build.knng_k + 1)
    throw std::invalid_argument("build_hot_index: hot subset smaller than knng_k + 1");
  HotGraph hot;
  hot.members.assign(hot_ids.begin(), hot_ids.end());
  std::sort(hot.members.begin(), hot.members.end());
  if (std::adjacent_find(hot.members.begin(), hot.members.end()) != hot.members.end())
    throw std::invalid_argument("build_hot_index: duplicate hot ids");
  if (hot.members.back() >= dataset.count())
    throw std::invalid_argument("build_hot_index: hot id out of range");

  const VectorDataset sub = dataset.subset(hot.members);
  FullIndex local = build_full_index(sub, build);
  hot.graph = std::move(local.graph);
  for (NodeId e : local.entry_points) hot.entry_points.push_back(hot.members[e]);
  hot.source_count = dataset.count();
  hot.source_dim = dataset.dim();
  return hot;
}

DualIndex::DualIndex(std::size_t dim, FullIndex full, HotIndexConfig config)
    : dim_(dim), full_(std::move(full)), config_(config), counter_(full_.graph.node_count()) {}

DualIndex::DualIndex(DualIndex&& other) noexcept
    : dim_(other.dim_),
      full_(std::move(other.full_)),
      config_(other.config_),
      counter_(std::move(other.counter_)),
      hot_(other.hot()) {}

void DualIndex::set_config(const HotIndexConfig& config) { config_ = config; }

std::shared_ptr<const HotGraph> DualIndex::hot() const {
  std::lock_guard guard(hot_mutex_);
  return hot_;
}

void DualIndex::check_compatible(const HotGraph& hot) const {
  if (hot.source_count != node_count() || hot.source_dim != dim_)
    throw std::invalid_argument("hot index was built against a different dataset");
  if (hot.graph.node_count() != hot.members.size())
    throw std::invalid_argument("hot graph size does not match its member list");
}

void DualIndex::publish_hot(HotGraph hot) {
  check_compatible(hot);
  auto next = std::make_shared<const HotGraph>(std::move(hot));
  {
    std::lock_guard guard(hot_mutex_);
    hot_.swap(next);
  }
  counter_.start_new_epoch();
}

void DualIndex::restore_hot(HotGraph hot) {
  check_compatible(hot);
  auto next = std::make_shared<const HotGraph>(std::move(hot));
  std::lock_guard guard(hot_mutex_);
  hot_.swap(next);
}

void DualIndex::rebuild_hot(const VectorDataset& dataset) {
  if (dataset.count() != node_count() || dataset.dim() != dim_)
    throw std::invalid_argument("rebuild_hot: dataset does not match the index");
  const std::size_t n_idx = config_.hot_size(node_count());
  const auto ids = select_hot_nodes(counter_, n_idx);
  publish_hot(build_hot_index(dataset, ids, scaled_hot_params(config_.build, n_idx)));
}

}  // namespace dqf
