#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "dqf/core.hpp"

namespace dqf {

struct ZipfParams {
  double beta = 1.2;
  std::size_t universe = 1000;
  std::uint64_t seed = 7;
};

/// Inverse-CDF sampler over ranks 1..universe with P(r) ∝ r^-beta.
class ZipfSampler {
 public:
  ZipfSampler(double beta, std::size_t universe);

  template <typename Rng>
  std::size_t operator()(Rng& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::size_t>(it - cdf_.begin()) + 1;
  }

  double probability(std::size_t rank) const;
  std::size_t universe() const noexcept { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

std::vector<std::size_t> zipf_sample(const ZipfParams& params, std::size_t count);

struct WorkloadSpec {
  std::size_t history_count = 20000;
  std::size_t eval_count = 1000;
  double split = 0.9;
  std::size_t truth_k = 10;
  bool uniform_eval = false;
  std::uint64_t split_seed = 11;
};

/// Base pool (the indexed corpus), held-out test pool, and query streams as
/// test-pool indices. Popularity rank r maps to test vector rank_order[r-1].
struct Workload {
  VectorDataset base;
  VectorDataset test;
  std::vector<NodeId> base_rows;  // original dataset row of each base id
  std::vector<NodeId> test_rows;
  std::vector<NodeId> rank_order;
  std::vector<NodeId> history;
  std::vector<NodeId> eval;
  std::vector<ResultList> eval_truth;  // against `base`, one per eval query

  VectorDataset history_queries() const { return test.subset(history); }
  VectorDataset eval_queries() const { return test.subset(eval); }
};

Workload build_workload(const VectorDataset& dataset, const WorkloadSpec& spec, const ZipfParams& zipf);

/// Integral approximation of the probability that a query misses the hot
/// index: 1 - (1 - (IR n)^(1-b)) / (1 - n^(1-b)).
double p_miss(double index_ratio, std::size_t n, double beta);

/// Search cost model log(IR n) + p_miss * log n, natural log.
double complexity(double index_ratio, std::size_t n, double beta);

/// Closed-form stationary point of `complexity` in IR; beta must exceed 1.
double optimal_index_ratio(std::size_t n, double beta);

/// d complexity / d IR.
double complexity_derivative(double index_ratio, std::size_t n, double beta);

}  // namespace dqf
