#include "dqf/search.hpp"

#include <algorithm>
#include <stdexcept>

namespace dqf {

void SearchParams::validate() const {
  if (k == 0) throw std::invalid_argument("k must be positive");
  if (l < k) throw std::invalid_argument("l must be at least k");
  if (s_l < k) throw std::invalid_argument("s_l must be at least k");
  if (eval_gap == 0) throw std::invalid_argument("eval_gap must be positive");
}

bool CandidatePool::insert(Neighbor n) {
  if (entries_.size() == capacity_ && !(n < entries_.back().n)) return false;
  auto pos = std::lower_bound(entries_.begin(), entries_.end(), n,
                              [](const Entry& e, const Neighbor& v) { return e.n < v; });
  if (pos != entries_.end() && pos->n == n) return false;
  const auto index = static_cast<std::size_t>(pos - entries_.begin());
  entries_.insert(pos, Entry{n, false});
  if (entries_.size() > capacity_) entries_.pop_back();
  cursor_ = std::min(cursor_, index);
  return true;
}

NodeId CandidatePool::expand_next() {
  auto& e = entries_[cursor_];
  e.expanded = true;
  const NodeId id = e.n.id;
  while (cursor_ < entries_.size() && entries_[cursor_].expanded) ++cursor_;
  return id;
}

void CandidatePool::reset_expanded() {
  for (auto& e : entries_) e.expanded = false;
  cursor_ = 0;
}

ResultList CandidatePool::top(std::size_t k) const {
  ResultList out;
  const std::size_t m = std::min(k, entries_.size());
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(entries_[i].n);
  return out;
}

bool CandidatePool::well_formed() const {
  for (std::size_t i = 1; i < entries_.size(); ++i)
    if (!(entries_[i - 1].n < entries_[i].n)) return false;
  return entries_.size() <= capacity_;
}

namespace {

struct Counters {
  std::uint64_t dist = 0;
  std::uint64_t updates = 0;
  std::uint64_t expansions = 0;
};

// Runs expansions until the pool is exhausted or `after_expand` returns
// false. `to_global` maps graph ids to dataset rows.
template <typename ToGlobal, typename AfterExpand>
void beam_loop(const NeighborGraph& graph, ToGlobal to_global, const VectorDataset& dataset,
               std::span<const float> query, CandidatePool& pool, std::vector<char>& seen,
               Counters& counters, std::vector<NodeId>* log, AfterExpand&& after_expand) {
  const std::size_t dim = dataset.dim();
  while (pool.has_unexpanded()) {
    const NodeId p = pool.expand_next();
    ++counters.expansions;
    for (NodeId nb : graph.neighbors(p)) {
      if (seen[nb]) continue;
      seen[nb] = 1;
      const NodeId row = to_global(nb);
      const float d = distance_unchecked(query.data(), dataset.row(row).data(), dim);
      ++counters.dist;
      if (log) log->push_back(row);
      if (pool.insert({nb, d})) ++counters.updates;
    }
    if (!after_expand()) break;
  }
}

void seed_pool(std::span<const NodeId> entry, const NeighborGraph& graph, auto to_global,
               const VectorDataset& dataset, std::span<const float> query, CandidatePool& pool,
               std::vector<char>& seen, Counters& counters, std::vector<NodeId>* log) {
  for (NodeId e : entry) {
    if (e >= graph.node_count()) throw std::invalid_argument("entry point out of range");
    if (seen[e]) continue;
    seen[e] = 1;
    const NodeId row = to_global(e);
    const float d = distance_unchecked(query.data(), dataset.row(row).data(), dataset.dim());
    ++counters.dist;
    if (log) log->push_back(row);
    pool.insert({e, d});
  }
}

void capture_full(SearchTrace& trace, const CandidatePool& pool, std::size_t k) {
  if (pool.size() == 0) return;
  trace.full_first = pool[0].distance;
  trace.full_kth = pool[std::min(k, pool.size()) - 1].distance;
}

}  // namespace

SearchOutcome beam_search(const NeighborGraph& graph, std::span<const NodeId> entry,
                          const VectorDataset& dataset, std::span<const float> query,
                          std::size_t k, std::size_t l, std::vector<NodeId>* evaluation_log) {
  if (graph.node_count() == 0) throw std::invalid_argument("beam_search: empty graph");
  if (entry.empty()) throw std::invalid_argument("beam_search: no entry points");
  if (k == 0 || l < k) throw std::invalid_argument("beam_search: need 0 < k <= l");
  if (query.size() != dataset.dim()) throw std::invalid_argument("beam_search: dimension mismatch");
  if (graph.node_count() > dataset.count())
    throw std::invalid_argument("beam_search: graph larger than dataset");

  auto identity = [](NodeId id) { return id; };
  CandidatePool pool(l);
  std::vector<char> seen(graph.node_count(), 0);
  Counters counters;
  seed_pool(entry, graph, identity, dataset, query, pool, seen, counters, evaluation_log);
  beam_loop(graph, identity, dataset, query, pool, seen, counters, evaluation_log, [] { return true; });

  SearchOutcome out;
  out.results = pool.top(k);
  out.trace.dist_count = counters.dist;
  out.trace.update_count = counters.updates;
  out.trace.expansions = counters.expansions;
  capture_full(out.trace, pool, k);
  return out;
}

SearchOutcome two_phase_search(const FullIndex& full, const HotGraph& hot,
                               const VectorDataset& dataset, std::span<const float> query,
                               const SearchParams& params, const CheckpointPolicy& policy) {
  params.validate();
  if (query.size() != dataset.dim()) throw std::invalid_argument("search: dimension mismatch");
  if (full.graph.node_count() != dataset.count())
    throw std::invalid_argument("search: index does not match dataset");
  if (hot.empty()) throw std::invalid_argument("search: hot graph is empty");

  SearchOutcome out;
  SearchTrace& trace = out.trace;

  // Hot phase, in hot-local ids. Members are sorted, so local and global ids
  // order ties identically.
  auto to_global = [&hot](NodeId local) { return hot.members[local]; };
  CandidatePool hot_pool(params.s_l);
  {
    std::vector<char> seen(hot.graph.node_count(), 0);
    Counters counters;
    seed_pool(hot.local_entry_points(), hot.graph, to_global, dataset, query, hot_pool, seen,
              counters, nullptr);
    beam_loop(hot.graph, to_global, dataset, query, hot_pool, seen, counters, nullptr,
              [] { return true; });
    trace.hot_dist_count = counters.dist;
    trace.hot_first = hot_pool[0].distance;
    trace.hot_kth = hot_pool[std::min(params.k, hot_pool.size()) - 1].distance;
  }

  // Full phase: hot results become unexpanded seeds with their distances.
  CandidatePool pool(params.l);
  std::vector<char> seen(full.graph.node_count(), 0);
  for (std::size_t i = 0; i < hot_pool.size(); ++i) {
    const Neighbor g{to_global(hot_pool[i].id), hot_pool[i].distance};
    seen[g.id] = 1;
    pool.insert(g);
  }
  capture_full(trace, pool, params.k);

  Counters counters;
  std::uint64_t checkpoints_passed = 0;
  bool stopping = false;
  std::size_t extra_left = 0;
  auto identity = [](NodeId id) { return id; };
  beam_loop(full.graph, identity, dataset, query, pool, seen, counters, nullptr, [&] {
    if (stopping) {
      if (extra_left == 0) return false;
      return --extra_left > 0;
    }
    if (!policy) return true;
    const std::uint64_t boundary = counters.dist / params.eval_gap;
    if (boundary <= checkpoints_passed) return true;
    checkpoints_passed = boundary;
    trace.dist_count = counters.dist;
    trace.update_count = counters.updates;
    trace.expansions = counters.expansions;
    capture_full(trace, pool, params.k);
    ++trace.checkpoints_evaluated;
    if (policy(trace, pool) == Verdict::Continue) return true;
    stopping = true;
    trace.terminated_early = true;
    extra_left = params.add_step;
    return extra_left > 0;
  });

  trace.dist_count = counters.dist;
  trace.update_count = counters.updates;
  trace.expansions = counters.expansions;
  capture_full(trace, pool, params.k);
  out.results = pool.top(params.k);
  return out;
}

SearchOutcome dynamic_search(DualIndex& index, const VectorDataset& dataset,
                             std::span<const float> query, const SearchParams& params,
                             const DecisionTree& tree) {
  if (!tree.trained()) throw std::invalid_argument("dynamic_search: tree is not trained");
  if (dataset.count() != index.node_count() || dataset.dim() != index.dim())
    throw std::invalid_argument("dynamic_search: dataset does not match index");
  const auto hot = index.hot();
  if (!hot || hot->empty()) throw std::invalid_argument("dynamic_search: no hot graph");

  auto outcome = two_phase_search(index.full(), *hot, dataset, query, params,
                                  [&tree](const SearchTrace& trace, const CandidatePool&) {
                                    return tree.predict(extract_features(trace));
                                  });
  for (const auto& n : outcome.results) index.counter().record_access(n.id);
  return outcome;
}

FeatureVector extract_features(const SearchTrace& trace) {
  FeatureVector f;
  f.hot_first = trace.hot_first;
  f.hot_first_div_kth = trace.hot_kth > 0.0 ? trace.hot_first / trace.hot_kth : 1.0;
  f.full_first = trace.full_first;
  f.full_first_div_kth = trace.full_kth > 0.0 ? trace.full_first / trace.full_kth : 1.0;
  f.dist_count = trace.dist_count;
  f.update_count = trace.update_count;
  return f;
}

}  // namespace dqf
