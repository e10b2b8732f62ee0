#include "dqf/training.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <stdexcept>
#include <string>

namespace dqf {

namespace {

std::vector<NodeId> sorted_ids(const ResultList& list) {
  std::vector<NodeId> ids;
  ids.reserve(list.size());
  for (const auto& n : list) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

std::vector<LabeledSample> TrainingSet::labeled() const {
  std::vector<LabeledSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.sample);
  return out;
}

TrainingSet generate_training_data(const DualIndex& index, const VectorDataset& dataset,
                                   const VectorDataset& queries, const SearchParams& params) {
  if (queries.empty()) throw std::invalid_argument("generate_training_data: no queries");
  if (queries.dim() != dataset.dim())
    throw std::invalid_argument("generate_training_data: query dimension mismatch");
  const auto hot = index.hot();
  if (!hot) throw std::invalid_argument("generate_training_data: no hot graph");

  TrainingSet set;
  std::map<std::string, std::size_t> seen;
  for (std::size_t qi = 0; qi < queries.count(); ++qi) {
    const auto q = queries.row(static_cast<NodeId>(qi));
    std::string key(reinterpret_cast<const char*>(q.data()), q.size_bytes());
    if (!seen.emplace(std::move(key), qi).second) continue;

    struct Checkpoint {
      FeatureVector features;
      std::vector<NodeId> topk;
    };
    std::vector<Checkpoint> log;
    auto outcome = two_phase_search(
        index.full(), *hot, dataset, q, params,
        [&](const SearchTrace& trace, const CandidatePool& pool) {
          log.push_back({extract_features(trace), sorted_ids(pool.top(params.k))});
          return Verdict::Continue;
        });
    log.push_back({extract_features(outcome.trace), sorted_ids(outcome.results)});

    const std::size_t query_slot = set.queries.size();
    QueryTraceSummary summary;
    summary.source_index = qi;
    summary.final_topk = log.back().topk;
    summary.dist_count_total = outcome.trace.dist_count;
    summary.checkpoints = log.size();
    for (std::size_t c = 0; c < log.size(); ++c) {
      TrainingSample s;
      s.sample.features = log[c].features;
      s.sample.label = log[c].topk == summary.final_topk ? Verdict::Terminate : Verdict::Continue;
      s.query = query_slot;
      s.checkpoint = c;
      s.completion = c + 1 == log.size();
      set.samples.push_back(s);
    }
    set.queries.push_back(std::move(summary));
  }
  return set;
}

SearchOutcome replay_until_checkpoint(const DualIndex& index, const VectorDataset& dataset,
                                      std::span<const float> query, const SearchParams& params,
                                      std::size_t checkpoint) {
  const auto hot = index.hot();
  if (!hot) throw std::invalid_argument("replay_until_checkpoint: no hot graph");
  SearchParams p = params;
  p.add_step = 0;
  std::size_t calls = 0;
  return two_phase_search(index.full(), *hot, dataset, query, p,
                          [&](const SearchTrace&, const CandidatePool&) {
                            return calls++ == checkpoint ? Verdict::Terminate : Verdict::Continue;
                          });
}

}  // namespace dqf
