#include "dqf/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace dqf {

ZipfSampler::ZipfSampler(double beta, std::size_t universe) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("zipf: beta must be >= 0");
  if (universe == 0) throw std::invalid_argument("zipf: universe must be positive");
  cdf_.resize(universe);
  double total = 0.0;
  for (std::size_t r = 1; r <= universe; ++r) {
    total += std::pow(static_cast<double>(r), -beta);
    cdf_[r - 1] = total;
  }
  for (auto& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

double ZipfSampler::probability(std::size_t rank) const {
  if (rank == 0 || rank > cdf_.size()) throw std::invalid_argument("zipf: rank out of range");
  return rank == 1 ? cdf_[0] : cdf_[rank - 1] - cdf_[rank - 2];
}

std::vector<std::size_t> zipf_sample(const ZipfParams& params, std::size_t count) {
  if (count == 0) throw std::invalid_argument("zipf_sample: count must be positive");
  const ZipfSampler sampler(params.beta, params.universe);
  std::mt19937_64 rng(params.seed);
  std::vector<std::size_t> out(count);
  for (auto& r : out) r = sampler(rng);
  return out;
}

Workload build_workload(const VectorDataset& dataset, const WorkloadSpec& spec, const ZipfParams& zipf) {
  if (!(spec.split > 0.0 && spec.split < 1.0)) throw std::invalid_argument("split must lie in (0, 1)");
  const std::size_t n = dataset.count();
  const auto base_count = static_cast<std::size_t>(std::llround(spec.split * static_cast<double>(n)));
  if (base_count < 2 || base_count >= n)
    throw std::invalid_argument("dataset too small for the requested split");
  const std::size_t test_count = n - base_count;
  const std::size_t universe = zipf.universe == 0 ? test_count : zipf.universe;
  if (universe > test_count)
    throw std::invalid_argument("zipf universe exceeds the test pool size");
  if (spec.truth_k == 0 || spec.truth_k > base_count)
    throw std::invalid_argument("truth_k out of range for the base pool");

  Workload w;
  std::vector<NodeId> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  std::mt19937_64 split_rng(spec.split_seed);
  std::shuffle(rows.begin(), rows.end(), split_rng);
  w.base_rows.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(base_count));
  w.test_rows.assign(rows.begin() + static_cast<std::ptrdiff_t>(base_count), rows.end());
  std::sort(w.base_rows.begin(), w.base_rows.end());
  std::sort(w.test_rows.begin(), w.test_rows.end());
  w.base = dataset.subset(w.base_rows);
  w.test = dataset.subset(w.test_rows);

  std::mt19937_64 rng(zipf.seed);
  w.rank_order.resize(test_count);
  std::iota(w.rank_order.begin(), w.rank_order.end(), 0u);
  std::shuffle(w.rank_order.begin(), w.rank_order.end(), rng);

  const ZipfSampler sampler(zipf.beta, universe);
  w.history.reserve(spec.history_count);
  for (std::size_t i = 0; i < spec.history_count; ++i) w.history.push_back(w.rank_order[sampler(rng) - 1]);
  std::uniform_int_distribution<std::size_t> uniform(1, universe);
  w.eval.reserve(spec.eval_count);
  for (std::size_t i = 0; i < spec.eval_count; ++i) {
    const std::size_t rank = spec.uniform_eval ? uniform(rng) : sampler(rng);
    w.eval.push_back(w.rank_order[rank - 1]);
  }

  std::unordered_map<NodeId, ResultList> cache;
  w.eval_truth.reserve(w.eval.size());
  for (NodeId t : w.eval) {
    auto it = cache.find(t);
    if (it == cache.end()) it = cache.emplace(t, brute_force_knn(w.base, w.test.row(t), spec.truth_k)).first;
    w.eval_truth.push_back(it->second);
  }
  return w;
}

namespace {

void check_model_args(double index_ratio, std::size_t n, double beta) {
  if (beta == 1.0) throw std::invalid_argument("cost model: beta = 1 is not supported");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("cost model: beta must be positive");
  if (n < 2) throw std::invalid_argument("cost model: n must be at least 2");
  if (!(index_ratio > 0.0 && index_ratio <= 1.0))
    throw std::invalid_argument("cost model: index ratio must lie in (0, 1]");
  if (index_ratio * static_cast<double>(n) < 1.0)
    throw std::invalid_argument("cost model: index ratio * n must be at least 1");
}

}  // namespace

double p_miss(double index_ratio, std::size_t n, double beta) {
  check_model_args(index_ratio, n, beta);
  const double nd = static_cast<double>(n);
  const double e = 1.0 - beta;
  return 1.0 - (1.0 - std::pow(index_ratio * nd, e)) / (1.0 - std::pow(nd, e));
}

double complexity(double index_ratio, std::size_t n, double beta) {
  const double p = p_miss(index_ratio, n, beta);
  const double nd = static_cast<double>(n);
  return std::log(index_ratio * nd) + p * std::log(nd);
}

double complexity_derivative(double index_ratio, std::size_t n, double beta) {
  check_model_args(index_ratio, n, beta);
  const double nd = static_cast<double>(n);
  return 1.0 / index_ratio +
         std::log(nd) * (1.0 - beta) * nd * std::pow(index_ratio * nd, -beta) /
             (1.0 - std::pow(nd, 1.0 - beta));
}

double optimal_index_ratio(std::size_t n, double beta) {
  if (!(beta > 1.0)) throw std::invalid_argument("optimal_index_ratio: beta must exceed 1");
  if (n < 2) throw std::invalid_argument("optimal_index_ratio: n must be at least 2");
  const double nd = static_cast<double>(n);
  const double e = 1.0 - beta;
  const double ne = std::pow(nd, e);
  const double ir = std::pow((ne - 1.0) / (e * std::log(nd) * ne), 1.0 / e);
  if (ir * nd >= 1.0 && ir <= 1.0) {
    const double scaled = ir * complexity_derivative(ir, n, beta);
    if (!(std::abs(scaled) < 1e-8)) throw std::logic_error("optimal_index_ratio: derivative does not vanish");
  }
  return ir;
}

}  // namespace dqf
