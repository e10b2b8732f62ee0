#include "dqf/graph_build.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace dqf {

NeighborGraph::NeighborGraph(std::size_t node_count, std::size_t max_degree)
    : adjacency_(node_count), max_degree_(max_degree) {}

NeighborGraph::NeighborGraph(std::vector<std::vector<NodeId>> adjacency, std::size_t max_degree)
    : adjacency_(std::move(adjacency)), max_degree_(max_degree) {}

std::size_t NeighborGraph::edge_count() const noexcept {
  std::size_t total = 0;
  for (const auto& list : adjacency_) total += list.size();
  return total;
}

void NeighborGraph::validate() const {
  const auto n = adjacency_.size();
  for (std::size_t u = 0; u < n; ++u) {
    const auto& list = adjacency_[u];
    if (list.size() > max_degree_)
      throw std::logic_error("node " + std::to_string(u) + " exceeds max degree");
    std::vector<NodeId> sorted(list);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::logic_error("node " + std::to_string(u) + " has duplicate neighbors");
    for (NodeId v : list) {
      if (v >= n) throw std::logic_error("node " + std::to_string(u) + " has out-of-range neighbor");
      if (v == u) throw std::logic_error("node " + std::to_string(u) + " has a self-loop");
    }
  }
}

void BuildParams::validate() const {
  if (knng_k == 0) throw std::invalid_argument("knng_k must be positive");
  if (max_degree == 0) throw std::invalid_argument("max_degree must be positive");
  if (!(angle_threshold_degrees > 0.0 && angle_threshold_degrees < 180.0))
    throw std::invalid_argument("angle threshold must lie in (0, 180) degrees");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::mt19937_64 node_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t node) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream * 0x100000001b3ull + node)));
}

// Bounded best-k list for NN-descent. The final contents after a batch of
// inserts depend only on the set of inserted items, never on their order:
// an evicted item is worse than the k-th survivor and cannot re-enter.
struct KnnPool {
  struct Entry {
    NodeId id;
    float distance;
    bool is_new;
  };
  std::vector<Entry> entries;
  std::mutex lock;

  static bool before(const Entry& a, float d, NodeId id) {
    return a.distance < d || (a.distance == d && a.id < id);
  }

  void insert(NodeId id, float d, std::size_t capacity) {
    std::lock_guard guard(lock);
    if (entries.size() == capacity && before(entries.back(), d, id)) return;
    for (const auto& e : entries)
      if (e.id == id) return;
    auto pos = std::lower_bound(entries.begin(), entries.end(), 0,
                                [&](const Entry& e, int) { return before(e, d, id); });
    entries.insert(pos, Entry{id, d, true});
    if (entries.size() > capacity) entries.pop_back();
  }
};

void sample_into(std::vector<NodeId>& ids, std::size_t cap, std::mt19937_64& rng) {
  if (ids.size() <= cap) return;
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(cap);
}

void merge_unique(std::vector<NodeId>& ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

double squared_distance_f64(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += diff * diff;
  }
  return sum;
}

}  // namespace

NeighborGraph build_knng(const VectorDataset& dataset, const BuildParams& params) {
  params.validate();
  const std::size_t n = dataset.count();
  const std::size_t k = params.knng_k;
  if (k >= n) throw std::invalid_argument("build_knng: knng_k must be smaller than the dataset");
  const std::size_t dim = dataset.dim();
  const float* base = dataset.data().data();
  auto dist = [&](NodeId a, NodeId b) {
    return distance_unchecked(base + std::size_t{a} * dim, base + std::size_t{b} * dim, dim);
  };

  std::vector<KnnPool> pools(n);
  const auto sn = static_cast<std::int64_t>(n);

#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < sn; ++i) {
    const auto u = static_cast<NodeId>(i);
    auto rng = node_rng(params.seed, 0, u);
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
    std::vector<NodeId> chosen;
    chosen.reserve(k);
    while (chosen.size() < k) {
      const NodeId v = pick(rng);
      if (v == u || std::find(chosen.begin(), chosen.end(), v) != chosen.end()) continue;
      chosen.push_back(v);
    }
    for (NodeId v : chosen) pools[u].insert(v, dist(u, v), k);
  }

  const std::size_t sample = std::max<std::size_t>(std::min<std::size_t>(k, 10), (k + 1) / 2);
  std::vector<std::vector<NodeId>> new_ids(n), old_ids(n), new_rev(n), old_rev(n);
  std::vector<std::vector<NodeId>> snapshot(n);

  for (std::size_t iter = 0; iter < params.nn_descent_iters; ++iter) {
    for (std::size_t u = 0; u < n; ++u) {
      new_ids[u].clear();
      old_ids[u].clear();
      new_rev[u].clear();
      old_rev[u].clear();
      snapshot[u].clear();
      for (auto& e : pools[u].entries) {
        snapshot[u].push_back(e.id);
        if (e.is_new) {
          if (new_ids[u].size() < sample) {
            new_ids[u].push_back(e.id);
            e.is_new = false;
          }
        } else if (old_ids[u].size() < sample) {
          old_ids[u].push_back(e.id);
        }
      }
    }
    for (std::size_t u = 0; u < n; ++u) {
      for (NodeId v : new_ids[u]) new_rev[v].push_back(static_cast<NodeId>(u));
      for (NodeId v : old_ids[u]) old_rev[v].push_back(static_cast<NodeId>(u));
    }

#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < sn; ++i) {
      const auto v = static_cast<std::size_t>(i);
      auto rng = node_rng(params.seed, iter + 1, v);
      sample_into(new_rev[v], sample, rng);
      sample_into(old_rev[v], sample, rng);
    }

#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < sn; ++i) {
      const auto v = static_cast<std::size_t>(i);
      std::vector<NodeId> fresh(new_ids[v]);
      fresh.insert(fresh.end(), new_rev[v].begin(), new_rev[v].end());
      merge_unique(fresh);
      std::vector<NodeId> stale(old_ids[v]);
      stale.insert(stale.end(), old_rev[v].begin(), old_rev[v].end());
      merge_unique(stale);
      std::vector<NodeId> only_stale;
      std::set_difference(stale.begin(), stale.end(), fresh.begin(), fresh.end(),
                          std::back_inserter(only_stale));

      for (std::size_t a = 0; a < fresh.size(); ++a) {
        for (std::size_t b = a + 1; b < fresh.size(); ++b) {
          const float d = dist(fresh[a], fresh[b]);
          pools[fresh[a]].insert(fresh[b], d, k);
          pools[fresh[b]].insert(fresh[a], d, k);
        }
        for (NodeId o : only_stale) {
          if (o == fresh[a]) continue;
          const float d = dist(fresh[a], o);
          pools[fresh[a]].insert(o, d, k);
          pools[o].insert(fresh[a], d, k);
        }
      }
    }

    std::size_t changed = 0;
    for (std::size_t u = 0; u < n; ++u) {
      const auto& entries = pools[u].entries;
      bool same = entries.size() == snapshot[u].size();
      for (std::size_t j = 0; same && j < entries.size(); ++j) same = entries[j].id == snapshot[u][j];
      changed += same ? 0 : 1;
    }
    if (changed == 0) break;
  }

  std::vector<std::vector<NodeId>> adjacency(n);
  for (std::size_t u = 0; u < n; ++u) {
    adjacency[u].reserve(k);
    for (const auto& e : pools[u].entries) adjacency[u].push_back(e.id);
  }
  return NeighborGraph(std::move(adjacency), k);
}

std::vector<NodeId> angle_filter(const VectorDataset& dataset, NodeId node,
                                 std::span<const Neighbor> sorted_candidates,
                                 double angle_degrees, std::size_t max_degree) {
  const double cos_threshold = std::cos(angle_degrees * std::numbers::pi / 180.0);
  const auto p = dataset.row(node);

  struct Kept {
    NodeId id;
    double sq_len;
  };
  std::vector<Kept> kept;
  kept.reserve(max_degree);
  for (const auto& cand : sorted_candidates) {
    if (kept.size() >= max_degree) break;
    if (cand.id == node) continue;
    const auto c = dataset.row(cand.id);
    const double a2 = squared_distance_f64(p, c);
    // Coincident with the node: angle undefined.
    if (a2 == 0.0) continue;
    bool keep = true;
    for (const auto& other : kept) {
      const double c2 = squared_distance_f64(c, dataset.row(other.id));
      const double cosine = (a2 + other.sq_len - c2) / (2.0 * std::sqrt(a2 * other.sq_len));
      if (cosine > cos_threshold) {
        keep = false;
        break;
      }
    }
    if (keep) kept.push_back({cand.id, a2});
  }

  std::vector<NodeId> out;
  out.reserve(kept.size());
  for (const auto& k : kept) out.push_back(k.id);
  return out;
}

std::vector<NodeId> ssg_prune(const NeighborGraph& knng, const VectorDataset& dataset,
                              NodeId node, double angle_degrees, std::size_t max_degree) {
  if (node >= knng.node_count()) throw std::invalid_argument("ssg_prune: node out of range");
  // Dedup by stamping instead of sorting ids: the 2-hop set is ~k^2 entries.
  thread_local std::vector<std::uint32_t> stamp;
  thread_local std::uint32_t epoch = 0;
  if (stamp.size() < knng.node_count()) {
    stamp.assign(knng.node_count(), 0);
    epoch = 0;
  }
  if (++epoch == 0) {
    std::fill(stamp.begin(), stamp.end(), 0);
    epoch = 1;
  }
  stamp[node] = epoch;

  // Distances are nonnegative, so their bit patterns order like the values;
  // (bits << 32 | id) sorts exactly as Neighbor's (distance, id) order.
  std::vector<std::uint64_t> keys;
  const auto p = dataset.row(node);
  auto consider = [&](NodeId id) {
    if (stamp[id] == epoch) return;
    stamp[id] = epoch;
    const float d = distance_unchecked(p.data(), dataset.row(id).data(), dataset.dim());
    keys.push_back(static_cast<std::uint64_t>(std::bit_cast<std::uint32_t>(d)) << 32 | id);
  };
  for (NodeId v : knng.neighbors(node)) {
    consider(v);
    for (NodeId w : knng.neighbors(v)) consider(w);
  }
  std::sort(keys.begin(), keys.end());
  std::vector<Neighbor> candidates(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i)
    candidates[i] = {static_cast<NodeId>(keys[i]), std::bit_cast<float>(static_cast<std::uint32_t>(keys[i] >> 32))};
  return angle_filter(dataset, node, candidates, angle_degrees, max_degree);
}

std::vector<NodeId> select_entry_points(const VectorDataset& dataset) {
  if (dataset.empty()) throw std::invalid_argument("select_entry_points: empty dataset");
  const std::size_t dim = dataset.dim();
  std::vector<double> sum(dim, 0.0);
  for (std::size_t i = 0; i < dataset.count(); ++i) {
    auto r = dataset.row(static_cast<NodeId>(i));
    for (std::size_t j = 0; j < dim; ++j) sum[j] += r[j];
  }
  std::vector<float> centroid(dim);
  for (std::size_t j = 0; j < dim; ++j)
    centroid[j] = static_cast<float>(sum[j] / static_cast<double>(dataset.count()));

  Neighbor best{0, std::numeric_limits<float>::infinity()};
  for (std::size_t i = 0; i < dataset.count(); ++i) {
    const Neighbor cand{static_cast<NodeId>(i),
                        distance_unchecked(centroid.data(), dataset.row(static_cast<NodeId>(i)).data(), dim)};
    if (cand < best) best = cand;
  }
  return {best.id};
}

namespace {

void bfs_from(const NeighborGraph& graph, std::deque<NodeId>& frontier, std::vector<char>& reached) {
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    for (NodeId v : graph.neighbors(u)) {
      if (!reached[v]) {
        reached[v] = 1;
        frontier.push_back(v);
      }
    }
  }
}

std::vector<char> bfs(const NeighborGraph& graph, std::span<const NodeId> entry_points) {
  std::vector<char> reached(graph.node_count(), 0);
  std::deque<NodeId> frontier;
  for (NodeId e : entry_points) {
    if (e >= graph.node_count()) throw std::invalid_argument("entry point out of range");
    if (!reached[e]) {
      reached[e] = 1;
      frontier.push_back(e);
    }
  }
  bfs_from(graph, frontier, reached);
  return reached;
}

void insert_by_distance(NeighborGraph& graph, const VectorDataset& dataset, NodeId owner, NodeId target) {
  auto& list = graph.mutable_neighbors(owner);
  const auto o = dataset.row(owner);
  const Neighbor incoming{target, distance(o, dataset.row(target))};
  auto pos = std::find_if(list.begin(), list.end(), [&](NodeId v) {
    return incoming < Neighbor{v, distance(o, dataset.row(v))};
  });
  list.insert(pos, target);
}

}  // namespace

std::size_t reachable_count(const NeighborGraph& graph, std::span<const NodeId> entry_points) {
  const auto reached = bfs(graph, entry_points);
  return static_cast<std::size_t>(std::count(reached.begin(), reached.end(), 1));
}

std::size_t repair_connectivity(NeighborGraph& graph, const VectorDataset& dataset,
                                std::span<const NodeId> entry_points) {
  const std::size_t n = graph.node_count();
  std::size_t added = 0;
  auto reached = bfs(graph, entry_points);

  for (std::size_t next = 0; next < n;) {
    if (reached[next]) {
      ++next;
      continue;
    }
    const auto u = static_cast<NodeId>(next);
    const auto q = dataset.row(u);
    Neighbor best_spare{0, std::numeric_limits<float>::infinity()};
    Neighbor best_any = best_spare;
    for (std::size_t r = 0; r < n; ++r) {
      if (!reached[r]) continue;
      const Neighbor cand{static_cast<NodeId>(r), distance(q, dataset.row(static_cast<NodeId>(r)))};
      if (cand < best_any) best_any = cand;
      if (graph.neighbors(cand.id).size() < graph.max_degree() && cand < best_spare) best_spare = cand;
    }
    ++added;
    if (std::isfinite(best_spare.distance)) {
      insert_by_distance(graph, dataset, best_spare.id, u);
      reached[u] = 1;
      std::deque<NodeId> frontier{u};
      bfs_from(graph, frontier, reached);
    } else {
      graph.mutable_neighbors(best_any.id).pop_back();
      insert_by_distance(graph, dataset, best_any.id, u);
      reached = bfs(graph, entry_points);
      next = 0;
    }
  }
  return added;
}

FullIndex build_full_index(const VectorDataset& dataset, const BuildParams& params) {
  if (dataset.count() < 2) throw std::invalid_argument("build_full_index: need at least two points");
  const NeighborGraph knng = build_knng(dataset, params);
  const std::size_t n = dataset.count();
  std::vector<std::vector<NodeId>> adjacency(n);
  const auto sn = static_cast<std::int64_t>(n);

#pragma omp parallel for schedule(dynamic, 32)
  for (std::int64_t i = 0; i < sn; ++i) {
    const auto u = static_cast<NodeId>(i);
    adjacency[u] = ssg_prune(knng, dataset, u, params.angle_threshold_degrees, params.max_degree);
  }

  FullIndex index{NeighborGraph(std::move(adjacency), params.max_degree), select_entry_points(dataset)};
  repair_connectivity(index.graph, dataset, index.entry_points);
  return index;
}

}  // namespace dqf
