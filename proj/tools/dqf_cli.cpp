// Command-line front end: build, train-tree, bench, analyze, gen-data.
// Every run option can also come from a `key = value` file via --config;
// flags given on the command line win.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dqf/harness.hpp"

namespace {

void add_run_options(CLI::App& app, dqf::RunConfig& c) {
  app.set_config("--config", "", "key = value file; command-line flags override it");
  app.allow_config_extras(CLI::config_extras_mode::ignore);

  app.add_option("--dataset", c.dataset, "fvecs corpus");
  app.add_option("--out_dir", c.out_dir, "directory for index, tree and CSV outputs");
  app.add_option("--seed", c.seed, "master seed; every component seed derives from it");

  app.add_option("--knng_k", c.build.knng_k, "neighbors per node in the k-NN graph");
  app.add_option("--nn_descent_iters", c.build.nn_descent_iters);
  app.add_option("--angle", c.build.angle_threshold_degrees, "minimum angle between kept edges, degrees");
  app.add_option("--max_degree", c.build.max_degree);

  app.add_option("--n_query", c.hot.n_query, "accesses between hot-index rebuilds");
  app.add_option("--index_ratio", c.hot.index_ratio, "hot index size as a fraction of the corpus");

  app.add_option("--k", c.search.k);
  app.add_option("--l", c.search.l, "full-phase candidate pool size");
  app.add_option("--s_l", c.search.s_l, "hot-phase candidate pool size");
  app.add_option("--eval_gap", c.search.eval_gap, "distance computations between tree checkpoints");
  app.add_option("--add_step", c.search.add_step, "extra expansions after a terminate verdict");

  app.add_option("--beta", c.zipf.beta, "Zipf exponent of the query workload");
  app.add_option("--universe", c.zipf.universe, "distinct popular queries (0 = whole test pool)");
  app.add_option("--history_count", c.workload.history_count);
  app.add_option("--eval_count", c.workload.eval_count);
  app.add_option("--split", c.workload.split, "fraction of the corpus indexed; the rest are queries");
  app.add_option("--truth_k", c.workload.truth_k);
  app.add_flag("--uniform_eval", c.workload.uniform_eval, "draw eval queries uniformly");

  app.add_option("--max_depth", c.tree.max_depth);
  app.add_option("--min_leaf", c.tree.min_leaf);
  app.add_option("--history_batch", c.history_batch, "history queries between rebuild checks");
  app.add_option("--max_training_queries", c.max_training_queries, "0 = every history query");
  app.add_flag("--freeze_tree", c.freeze_tree, "keep the saved tree across an index-ratio sweep");
  app.add_option("--tree_override", c.tree_override, "bench with a constant tree")
      ->check(CLI::IsMember({"", "continue", "terminate"}));
  app.add_option("--sweep_axis", c.sweep_axis)
      ->check(CLI::IsMember({"none", "l", "k", "ir", "depth", "eval_gap", "add_step"}));
  app.add_option("--sweep_values", c.sweep_values)->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual hot/full graph index with learned early termination"};
  app.require_subcommand(1);

  // Run options live on the top-level app (the only place CLI11 reads
  // config files); the run subcommands fall through to them.
  dqf::RunConfig config;
  add_run_options(app, config);
  auto* build = app.add_subcommand("build", "build the full index, replay history, build the hot index");
  auto* train = app.add_subcommand("train-tree", "label checkpoints from history and train the stop tree");
  auto* bench = app.add_subcommand("bench", "run eval queries over a sweep and write CSVs");
  for (auto* sub : {build, train, bench}) sub->fallthrough();

  auto* analyze = app.add_subcommand("analyze", "evaluate the hot-index cost model");
  std::size_t n = 1000000;
  double beta = 1.2;
  std::size_t grid = 10000;
  analyze->add_option("--n", n, "corpus size");
  analyze->add_option("--beta", beta, "Zipf exponent, > 1");
  analyze->add_option("--grid", grid, "log-spaced grid points over [1/n, 1]");

  auto* gen = app.add_subcommand("gen-data", "write a seeded Gaussian-mixture corpus as fvecs");
  std::string out;
  std::size_t count = 10000, dim = 16, clusters = 1;
  std::uint64_t gen_seed = 1;
  gen->add_option("--out", out, "output fvecs path")->required();
  gen->add_option("--count", count);
  gen->add_option("--dim", dim);
  gen->add_option("--clusters", clusters);
  gen->add_option("--seed", gen_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    config.apply_seed();
    if (build->parsed()) {
      dqf::cmd_build(config, std::cout);
    } else if (train->parsed()) {
      dqf::cmd_train_tree(config, std::cout);
    } else if (bench->parsed()) {
      dqf::cmd_bench(config, std::cout);
    } else if (analyze->parsed()) {
      dqf::cmd_analyze(n, beta, grid, std::cout);
    } else if (gen->parsed()) {
      dqf::cmd_gen_data(out, count, dim, clusters, gen_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
