#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dqf/decision_tree.hpp"
#include "dqf/graph_build.hpp"
#include "dqf/hot_index.hpp"
#include "dqf/search.hpp"
#include "dqf/workload.hpp"

namespace dqf {

/// Everything one benchmark run needs. Defaults follow the bold values of
/// the evaluation parameter table where one exists.
struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path out_dir = "dqf_run";
  BuildParams build;
  HotIndexConfig hot;
  SearchParams search;
  ZipfParams zipf;
  WorkloadSpec workload;
  TreeParams tree;
  std::string sweep_axis = "none";  // none, l, k, ir, depth, eval_gap, add_step
  std::vector<double> sweep_values;
  std::size_t history_batch = 1000;
  std::size_t max_training_queries = 0;  // 0 = every distinct history query
  bool freeze_tree = false;              // keep the trained tree when the hot index changes
  std::string tree_override;             // "", "continue" or "terminate": constant tree in bench
  std::uint64_t seed = 42;

  /// Derives every component seed from `seed`.
  void apply_seed();
  void validate() const;
};

inline constexpr std::array<std::string_view, 7> kSweepAxes = {
    "none", "l", "k", "ir", "depth", "eval_gap", "add_step"};

struct BuildReport {
  double full_build_seconds = 0.0;
  double hot_build_seconds = 0.0;  // most recent hot rebuild
  std::size_t hot_rebuilds = 0;
  std::uint64_t full_index_bytes = 0;
  std::uint64_t hot_index_bytes = 0;
  std::size_t base_count = 0;
  std::size_t hot_count = 0;
};

struct TrainReport {
  std::size_t distinct_queries = 0;
  std::size_t samples = 0;
  std::size_t terminate_labels = 0;
  std::size_t tree_depth = 0;
  std::array<double, kFeatureCount> importance{};
};

struct BenchRecord {
  std::string axis;
  double value = 0.0;
  SearchParams search;
  double index_ratio = 0.0;
  std::size_t tree_depth = 0;
  double recall = 0.0;
  double no_stop_recall = 0.0;  // same index, tree never consulted
  double baseline_recall = 0.0;
  double mean_dist_count = 0.0;
  double mean_hot_dist_count = 0.0;
  double mean_update_count = 0.0;
  double early_termination_rate = 0.0;
  double baseline_mean_dist_count = 0.0;
  double qps = 0.0;
  double baseline_qps = 0.0;
  double hot_build_seconds = 0.0;
  double full_build_seconds = 0.0;
  std::uint64_t full_index_bytes = 0;
  std::uint64_t hot_index_bytes = 0;
};

struct AnalyzeReport {
  double closed_form = 0.0;
  double grid_argmin = 0.0;
  double grid_log_step = 0.0;
  double complexity_at_one = 0.0;
  std::vector<std::array<double, 3>> rows;  // IR, p_miss, C
};

namespace paths {
inline std::filesystem::path index(const std::filesystem::path& dir) { return dir / "index.dqf"; }
inline std::filesystem::path manifest(const std::filesystem::path& dir) { return dir / "workload.json"; }
inline std::filesystem::path tree(const std::filesystem::path& dir) { return dir / "tree.json"; }
inline std::filesystem::path training(const std::filesystem::path& dir) { return dir / "training.csv"; }
inline std::filesystem::path bench(const std::filesystem::path& dir) { return dir / "bench.csv"; }
inline std::filesystem::path timing(const std::filesystem::path& dir) { return dir / "timing.csv"; }
inline std::filesystem::path per_query(const std::filesystem::path& dir) { return dir / "per_query.csv"; }
inline std::filesystem::path truth(const std::filesystem::path& dir) { return dir / "groundtruth.ivecs"; }
inline std::filesystem::path build_timing(const std::filesystem::path& dir) { return dir / "build_timing.csv"; }
}  // namespace paths

/// `key = value` lines, one per config field, readable back by the CLI's
/// --config option.
std::string config_echo(const RunConfig& config);

/// Splits the corpus, builds the full index, replays the history workload
/// to heat the counters (rebuilding the hot index whenever the trigger
/// fires), then writes the index file and the workload manifest.
BuildReport cmd_build(const RunConfig& config, std::ostream& log);

/// Labels checkpoints from the history queries, trains and saves the tree,
/// writes the training CSV and prints the importance table.
TrainReport cmd_train_tree(const RunConfig& config, std::ostream& log);

/// Runs the eval queries through the dual index and the plain full-index
/// baseline for every sweep value and writes bench, timing and per-query
/// CSVs.
std::vector<BenchRecord> cmd_bench(const RunConfig& config, std::ostream& log);

AnalyzeReport cmd_analyze(std::size_t n, double beta, std::size_t grid_points, std::ostream& out);

/// Synthetic corpus for runs without a downloaded dataset.
void cmd_gen_data(const std::filesystem::path& out, std::size_t count, std::size_t dim,
                  std::size_t clusters, std::uint64_t seed);

/// Rebuilds the workload described by a manifest written by cmd_build.
Workload load_workload(const std::filesystem::path& out_dir, RunConfig& config);

}  // namespace dqf
