#include "dqf/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "dqf/index_io.hpp"
#include "dqf/synthetic.hpp"
#include "dqf/training.hpp"

namespace dqf {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Shortest text that reads back as the same double.
std::string fmt(double v) {
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void require_file(const std::filesystem::path& path, const char* what) {
  if (!std::filesystem::is_regular_file(path))
    throw std::runtime_error(std::string("missing ") + what + ": " + path.string());
}

json build_section(const BuildParams& b) {
  return {{"knng_k", b.knng_k},
          {"nn_descent_iters", b.nn_descent_iters},
          {"angle", b.angle_threshold_degrees},
          {"max_degree", b.max_degree}};
}

std::vector<NodeId> ids_of(const ResultList& list, std::size_t k) {
  std::vector<NodeId> ids;
  for (std::size_t i = 0; i < std::min(k, list.size()); ++i) ids.push_back(list[i].id);
  return ids;
}

std::string join_ids(std::span<const NodeId> ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(ids[i]);
  }
  return out;
}

DecisionTree train_from_history(const DualIndex& index, const Workload& workload,
                                const RunConfig& config, TrainingSet* set_out = nullptr) {
  VectorDataset queries = workload.history_queries();
  if (config.max_training_queries > 0 && config.max_training_queries < queries.count()) {
    std::vector<NodeId> head(config.max_training_queries);
    for (std::size_t i = 0; i < head.size(); ++i) head[i] = static_cast<NodeId>(i);
    queries = queries.subset(head);
  }
  TrainingSet set = generate_training_data(index, workload.base, queries, config.search);
  DecisionTree tree = train_tree(set.labeled(), config.tree);
  if (set_out) *set_out = std::move(set);
  return tree;
}

void apply_sweep_value(RunConfig& c, const std::string& axis, double v) {
  const auto as_count = [&] {
    if (!(v >= 0.0) || v != std::floor(v)) throw std::invalid_argument("sweep value must be a whole number");
    return static_cast<std::size_t>(v);
  };
  if (axis == "l") {
    // The hot pool follows the full pool, as in the default s_l = l.
    c.search.l = as_count();
    c.search.s_l = c.search.l;
  } else if (axis == "k") {
    c.search.k = as_count();
  } else if (axis == "ir") {
    c.hot.index_ratio = v;
  } else if (axis == "depth") {
    c.tree.max_depth = as_count();
  } else if (axis == "eval_gap") {
    c.search.eval_gap = as_count();
  } else if (axis == "add_step") {
    c.search.add_step = as_count();
  }
}

}  // namespace

void RunConfig::apply_seed() {
  build.seed = splitmix64(seed ^ 1);
  zipf.seed = splitmix64(seed ^ 2);
  workload.split_seed = splitmix64(seed ^ 3);
  tree.seed = splitmix64(seed ^ 4);
}

void RunConfig::validate() const {
  build.validate();
  search.validate();
  if (hot.n_query == 0) throw std::invalid_argument("n_query must be positive");
  if (!(hot.index_ratio > 0.0 && hot.index_ratio <= 1.0))
    throw std::invalid_argument("index_ratio must lie in (0, 1]");
  if (!(zipf.beta >= 0.0) || !std::isfinite(zipf.beta)) throw std::invalid_argument("beta must be >= 0");
  if (!(workload.split > 0.0 && workload.split < 1.0))
    throw std::invalid_argument("split must lie in (0, 1)");
  if (workload.history_count == 0 || workload.eval_count == 0)
    throw std::invalid_argument("history_count and eval_count must be positive");
  if (workload.truth_k == 0) throw std::invalid_argument("truth_k must be positive");
  if (tree.max_depth == 0 || tree.min_leaf == 0)
    throw std::invalid_argument("max_depth and min_leaf must be positive");
  if (history_batch == 0) throw std::invalid_argument("history_batch must be positive");
  if (!tree_override.empty() && tree_override != "continue" && tree_override != "terminate")
    throw std::invalid_argument("tree_override must be continue or terminate");
  if (std::find(kSweepAxes.begin(), kSweepAxes.end(), sweep_axis) == kSweepAxes.end())
    throw std::invalid_argument("unknown sweep axis: " + sweep_axis);
  if (sweep_axis != "none" && sweep_values.empty())
    throw std::invalid_argument("sweep axis given without sweep values");
  for (double v : sweep_values) {
    RunConfig probe = *this;
    apply_sweep_value(probe, sweep_axis, v);
    probe.search.validate();
    if (!(probe.hot.index_ratio > 0.0 && probe.hot.index_ratio <= 1.0))
      throw std::invalid_argument("sweep index_ratio must lie in (0, 1]");
    if (probe.tree.max_depth == 0) throw std::invalid_argument("sweep depth must be positive");
  }
}

std::string config_echo(const RunConfig& c) {
  std::ostringstream out;
  auto line = [&out](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  auto num = [](auto v) { return std::to_string(v); };
  line("dataset", '"' + c.dataset.string() + '"');
  line("out_dir", '"' + c.out_dir.string() + '"');
  line("seed", num(c.seed));
  line("knng_k", num(c.build.knng_k));
  line("nn_descent_iters", num(c.build.nn_descent_iters));
  line("angle", fmt(c.build.angle_threshold_degrees));
  line("max_degree", num(c.build.max_degree));
  line("n_query", num(c.hot.n_query));
  line("index_ratio", fmt(c.hot.index_ratio));
  line("k", num(c.search.k));
  line("l", num(c.search.l));
  line("s_l", num(c.search.s_l));
  line("eval_gap", num(c.search.eval_gap));
  line("add_step", num(c.search.add_step));
  line("beta", fmt(c.zipf.beta));
  line("universe", num(c.zipf.universe));
  line("history_count", num(c.workload.history_count));
  line("eval_count", num(c.workload.eval_count));
  line("split", fmt(c.workload.split));
  line("truth_k", num(c.workload.truth_k));
  line("uniform_eval", c.workload.uniform_eval ? "true" : "false");
  line("max_depth", num(c.tree.max_depth));
  line("min_leaf", num(c.tree.min_leaf));
  line("history_batch", num(c.history_batch));
  line("max_training_queries", num(c.max_training_queries));
  line("freeze_tree", c.freeze_tree ? "true" : "false");
  line("tree_override", c.tree_override.empty() ? "\"\"" : c.tree_override);
  line("sweep_axis", c.sweep_axis);
  if (!c.sweep_values.empty()) {
    std::string values;
    for (double v : c.sweep_values) values += (values.empty() ? "" : ", ") + fmt(v);
    line("sweep_values", "[" + values + "]");
  }
  return out.str();
}

BuildReport cmd_build(const RunConfig& config, std::ostream& log) {
  config.validate();
  require_file(config.dataset, "dataset");
  const VectorDataset dataset = load_fvecs(config.dataset);
  Workload workload = build_workload(dataset, config.workload, config.zipf);
  HotIndexConfig hot_config = config.hot;
  hot_config.build = config.build;
  hot_config.validate(workload.base.count());
  std::filesystem::create_directories(config.out_dir);

  BuildReport report;
  report.base_count = workload.base.count();
  auto start = Clock::now();
  FullIndex full = build_full_index(workload.base, config.build);
  report.full_build_seconds = seconds_since(start);
  log << "full index: " << report.base_count << " nodes, " << full.graph.edge_count() << " edges, "
      << fmt(report.full_build_seconds) << " s\n";

  DualIndex index(dataset.dim(), std::move(full), hot_config);
  auto rebuild = [&] {
    const auto t0 = Clock::now();
    index.rebuild_hot(workload.base);
    report.hot_build_seconds = seconds_since(t0);
    ++report.hot_rebuilds;
  };
  const auto& graph = index.full().graph;
  const auto& entry = index.full().entry_points;
  for (std::size_t i = 0; i < workload.history.size(); ++i) {
    const auto q = workload.test.row(workload.history[i]);
    const auto outcome = beam_search(graph, entry, workload.base, q, config.search.k, config.search.l);
    for (const auto& n : outcome.results) index.counter().record_access(n.id);
    if ((i + 1) % config.history_batch == 0 && should_rebuild(index.counter(), index.config())) rebuild();
  }
  if (!index.hot()) rebuild();
  const auto hot = index.hot();
  report.hot_count = hot->members.size();
  log << "hot index: " << report.hot_count << " nodes, " << report.hot_rebuilds << " rebuild(s), "
      << fmt(report.hot_build_seconds) << " s (last)\n";

  const auto sizes = save_index(paths::index(config.out_dir), index, workload.base);
  report.full_index_bytes = sizes.full_adjacency;
  report.hot_index_bytes = sizes.hot;
  log << "index file: " << sizes.total << " bytes (full adjacency " << sizes.full_adjacency
      << " + hot " << sizes.hot << ")\n";
  log << "build time: " << fmt(report.full_build_seconds) << " s + " << fmt(report.hot_build_seconds)
      << " s\n";

  json manifest = {{"format", "dqf-workload"},
                   {"version", 1},
                   {"dataset", config.dataset.string()},
                   {"dataset_digest", dataset.digest()},
                   {"seed", config.seed},
                   {"build", build_section(config.build)},
                   {"hot", {{"n_query", config.hot.n_query}, {"index_ratio", config.hot.index_ratio}}},
                   {"zipf", {{"beta", config.zipf.beta}, {"universe", config.zipf.universe}}},
                   {"workload",
                    {{"history_count", config.workload.history_count},
                     {"eval_count", config.workload.eval_count},
                     {"split", config.workload.split},
                     {"truth_k", config.workload.truth_k},
                     {"uniform_eval", config.workload.uniform_eval}}},
                   {"history_batch", config.history_batch},
                   {"base_count", workload.base.count()},
                   {"test_count", workload.test.count()},
                   {"hot_rebuilds", report.hot_rebuilds}};
  open_out(paths::manifest(config.out_dir)) << manifest.dump(1) << '\n';

  auto timing = open_out(paths::build_timing(config.out_dir));
  timing << "full_build_seconds,hot_build_seconds,hot_rebuilds,full_index_bytes,hot_index_bytes\n"
         << fmt(report.full_build_seconds) << ',' << fmt(report.hot_build_seconds) << ','
         << report.hot_rebuilds << ',' << report.full_index_bytes << ',' << report.hot_index_bytes << '\n';
  return report;
}

Workload load_workload(const std::filesystem::path& out_dir, RunConfig& config) {
  const auto path = paths::manifest(out_dir);
  require_file(path, "workload manifest");
  std::ifstream in(path);
  json m;
  try {
    m = json::parse(in);
    if (m.at("format") != "dqf-workload" || m.at("version") != 1)
      throw std::runtime_error("unsupported workload manifest");
    config.dataset = m.at("dataset").get<std::string>();
    config.seed = m.at("seed").get<std::uint64_t>();
    config.apply_seed();
    const auto& b = m.at("build");
    config.build.knng_k = b.at("knng_k");
    config.build.nn_descent_iters = b.at("nn_descent_iters");
    config.build.angle_threshold_degrees = b.at("angle");
    config.build.max_degree = b.at("max_degree");
    config.hot.n_query = m.at("hot").at("n_query");
    config.hot.index_ratio = m.at("hot").at("index_ratio");
    config.hot.build = config.build;
    config.zipf.beta = m.at("zipf").at("beta");
    config.zipf.universe = m.at("zipf").at("universe");
    const auto& w = m.at("workload");
    config.workload.history_count = w.at("history_count");
    config.workload.eval_count = w.at("eval_count");
    config.workload.split = w.at("split");
    config.workload.truth_k = w.at("truth_k");
    config.workload.uniform_eval = w.at("uniform_eval");
    config.history_batch = m.at("history_batch");
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed workload manifest " + path.string() + ": " + e.what());
  }
  require_file(config.dataset, "dataset");
  const VectorDataset dataset = load_fvecs(config.dataset);
  if (dataset.digest() != m.at("dataset_digest").get<std::uint64_t>())
    throw std::runtime_error("dataset changed since the index was built: " + config.dataset.string());
  return build_workload(dataset, config.workload, config.zipf);
}

TrainReport cmd_train_tree(const RunConfig& config_in, std::ostream& log) {
  RunConfig config = config_in;
  require_file(paths::index(config.out_dir), "index file");
  const Workload workload = load_workload(config.out_dir, config);
  config.validate();
  const DualIndex index = load_index(paths::index(config.out_dir), workload.base, config.hot);

  TrainingSet set;
  const DecisionTree tree = train_from_history(index, workload, config, &set);
  tree.save(paths::tree(config.out_dir));

  TrainReport report;
  report.distinct_queries = set.queries.size();
  report.samples = set.samples.size();
  report.tree_depth = tree.depth();
  report.importance = tree.feature_importance();
  for (const auto& s : set.samples) report.terminate_labels += s.sample.label == Verdict::Terminate;

  const VectorDataset history = workload.history_queries();
  std::vector<double> recall(set.queries.size());
  for (std::size_t q = 0; q < set.queries.size(); ++q) {
    const auto& summary = set.queries[q];
    const auto truth = brute_force_knn(workload.base, history.row(static_cast<NodeId>(summary.source_index)),
                                       config.search.k);
    recall[q] = recall_at_k(std::span<const NodeId>(summary.final_topk),
                            std::span<const NodeId>(ids_of(truth, config.search.k)), config.search.k);
  }

  auto csv = open_out(paths::training(config.out_dir));
  csv << "query_id";
  for (auto name : kFeatureNames) csv << ',' << name;
  csv << ",label,dist_count_total,recall\n";
  for (const auto& s : set.samples) {
    const auto& f = s.sample.features;
    csv << set.queries[s.query].source_index << ',' << fmt(f.hot_first) << ',' << fmt(f.hot_first_div_kth)
        << ',' << fmt(f.full_first) << ',' << fmt(f.full_first_div_kth) << ',' << f.dist_count << ','
        << f.update_count << ',' << (s.sample.label == Verdict::Terminate ? "terminate" : "continue") << ','
        << set.queries[s.query].dist_count_total << ',' << fmt(recall[s.query]) << '\n';
  }

  log << "training: " << report.distinct_queries << " distinct queries, " << report.samples
      << " checkpoints (" << report.terminate_labels << " terminate)\n";
  log << "tree: depth " << report.tree_depth << ", " << tree.leaf_count() << " leaves\n";
  log << "feature,importance\n";
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", report.importance[i]);
    log << kFeatureNames[i] << ',' << buf << '\n';
  }
  return report;
}

std::vector<BenchRecord> cmd_bench(const RunConfig& config_in, std::ostream& log) {
  RunConfig config = config_in;
  require_file(paths::index(config.out_dir), "index file");
  if (config.tree_override.empty()) require_file(paths::tree(config.out_dir), "tree file");
  const Workload workload = load_workload(config.out_dir, config);
  config.validate();

  BuildReport built;
  {
    std::ifstream timing(paths::build_timing(config.out_dir));
    std::string header;
    char comma;
    if (std::getline(timing, header))
      timing >> built.full_build_seconds >> comma >> built.hot_build_seconds;
  }
  const VectorDataset eval = workload.eval_queries();

  std::vector<double> values = config.sweep_values;
  if (config.sweep_axis == "none") values = {0.0};

  auto bench = open_out(paths::bench(config.out_dir));
  auto timing = open_out(paths::timing(config.out_dir));
  auto per_query = open_out(paths::per_query(config.out_dir));
  {
    std::istringstream echo(config_echo(config));
    for (std::string line; std::getline(echo, line);) bench << "# " << line << '\n';
  }
  bench << "axis,value,k,l,s_l,eval_gap,add_step,index_ratio,hot_count,tree_depth,recall,no_stop_recall,"
           "baseline_recall,mean_dist_count,mean_hot_dist_count,mean_update_count,early_termination_rate,"
           "baseline_mean_dist_count,full_index_bytes,hot_index_bytes\n";
  timing << "axis,value,qps,baseline_qps,hot_build_seconds,full_build_seconds\n";
  per_query << "axis,value,query,test_index,method,ids\n";

  std::vector<BenchRecord> records;
  for (double v : values) {
    RunConfig c = config;
    apply_sweep_value(c, c.sweep_axis, v);
    const std::size_t k = c.search.k;
    DualIndex index = load_index(paths::index(c.out_dir), workload.base, c.hot);

    BenchRecord r;
    r.axis = c.sweep_axis;
    r.value = v;
    r.search = c.search;
    r.index_ratio = c.hot.index_ratio;
    r.full_build_seconds = built.full_build_seconds;
    r.hot_build_seconds = built.hot_build_seconds;
    const bool hot_changed = c.sweep_axis == "ir";
    if (hot_changed) {
      const auto t0 = Clock::now();
      index.rebuild_hot(workload.base);
      r.hot_build_seconds = seconds_since(t0);
    }

    DecisionTree tree;
    if (c.tree_override == "continue") {
      tree = DecisionTree::constant(Verdict::Continue);
    } else if (c.tree_override == "terminate") {
      tree = DecisionTree::constant(Verdict::Terminate);
    } else if ((hot_changed && !c.freeze_tree) || c.sweep_axis == "depth" || c.sweep_axis == "k") {
      tree = train_from_history(index, workload, c);
    } else {
      tree = DecisionTree::load(paths::tree(c.out_dir));
    }
    r.tree_depth = tree.depth();
    const auto hot = index.hot();
    r.full_index_bytes = full_section_bytes(index.full().graph);
    r.hot_index_bytes = hot_section_bytes(*hot);

    std::vector<ResultList> truth = workload.eval_truth;
    if (k > c.workload.truth_k) {
      for (std::size_t q = 0; q < eval.count(); ++q)
        truth[q] = brute_force_knn(workload.base, eval.row(static_cast<NodeId>(q)), k);
    }

    const std::size_t n = eval.count();
    std::vector<ResultList> dynamic(n), no_stop(n), baseline(n);
    double dist = 0, hot_dist = 0, updates = 0, early = 0, base_dist = 0;
    auto t0 = Clock::now();
    for (std::size_t q = 0; q < n; ++q) {
      auto out = dynamic_search(index, workload.base, eval.row(static_cast<NodeId>(q)), c.search, tree);
      dist += static_cast<double>(out.trace.dist_count);
      hot_dist += static_cast<double>(out.trace.hot_dist_count);
      updates += static_cast<double>(out.trace.update_count);
      early += out.trace.terminated_early ? 1.0 : 0.0;
      dynamic[q] = std::move(out.results);
    }
    const double dynamic_seconds = seconds_since(t0);
    t0 = Clock::now();
    for (std::size_t q = 0; q < n; ++q) {
      auto out = beam_search(index.full().graph, index.full().entry_points, workload.base,
                             eval.row(static_cast<NodeId>(q)), k, c.search.l);
      base_dist += static_cast<double>(out.trace.dist_count);
      baseline[q] = std::move(out.results);
    }
    const double baseline_seconds = seconds_since(t0);
    for (std::size_t q = 0; q < n; ++q)
      no_stop[q] = two_phase_search(index.full(), *hot, workload.base, eval.row(static_cast<NodeId>(q)),
                                    c.search)
                       .results;

    const double dn = static_cast<double>(n);
    for (std::size_t q = 0; q < n; ++q) {
      r.recall += recall_at_k(dynamic[q], truth[q], k);
      r.no_stop_recall += recall_at_k(no_stop[q], truth[q], k);
      r.baseline_recall += recall_at_k(baseline[q], truth[q], k);
    }
    r.recall /= dn;
    r.no_stop_recall /= dn;
    r.baseline_recall /= dn;
    r.mean_dist_count = dist / dn;
    r.mean_hot_dist_count = hot_dist / dn;
    r.mean_update_count = updates / dn;
    r.early_termination_rate = early / dn;
    r.baseline_mean_dist_count = base_dist / dn;
    r.qps = dynamic_seconds > 0 ? dn / dynamic_seconds : 0.0;
    r.baseline_qps = baseline_seconds > 0 ? dn / baseline_seconds : 0.0;

    bench << r.axis << ',' << fmt(v) << ',' << k << ',' << c.search.l << ',' << c.search.s_l << ','
          << c.search.eval_gap << ',' << c.search.add_step << ',' << fmt(r.index_ratio) << ','
          << hot->members.size() << ',' << r.tree_depth << ',' << fmt(r.recall) << ','
          << fmt(r.no_stop_recall) << ',' << fmt(r.baseline_recall) << ',' << fmt(r.mean_dist_count) << ','
          << fmt(r.mean_hot_dist_count) << ',' << fmt(r.mean_update_count) << ','
          << fmt(r.early_termination_rate) << ',' << fmt(r.baseline_mean_dist_count) << ','
          << r.full_index_bytes << ',' << r.hot_index_bytes << '\n';
    timing << r.axis << ',' << fmt(v) << ',' << fmt(r.qps) << ',' << fmt(r.baseline_qps) << ','
           << fmt(r.hot_build_seconds) << ',' << fmt(r.full_build_seconds) << '\n';
    for (std::size_t q = 0; q < n; ++q) {
      const std::string prefix = r.axis + ',' + fmt(v) + ',' + std::to_string(q) + ',' +
                                 std::to_string(workload.eval[q]) + ',';
      per_query << prefix << "dynamic," << join_ids(ids_of(dynamic[q], k)) << '\n';
      per_query << prefix << "baseline," << join_ids(ids_of(baseline[q], k)) << '\n';
      per_query << prefix << "truth," << join_ids(ids_of(truth[q], k)) << '\n';
    }

    char line[256];
    std::snprintf(line, sizeof line,
                  "%s=%s recall %.4f (baseline %.4f) dist %.1f vs %.1f, early %.3f, qps %.0f vs %.0f\n",
                  r.axis.c_str(), fmt(v).c_str(), r.recall, r.baseline_recall, r.mean_dist_count,
                  r.baseline_mean_dist_count, r.early_termination_rate, r.qps, r.baseline_qps);
    log << line;
    records.push_back(std::move(r));
  }

  std::vector<std::vector<std::int32_t>> rows;
  for (const auto& t : workload.eval_truth) {
    std::vector<std::int32_t> row;
    for (const auto& nb : t) row.push_back(static_cast<std::int32_t>(nb.id));
    rows.push_back(std::move(row));
  }
  write_ivecs(paths::truth(config.out_dir), rows);
  return records;
}

AnalyzeReport cmd_analyze(std::size_t n, double beta, std::size_t grid_points, std::ostream& out) {
  if (!(beta > 1.0)) throw std::invalid_argument("analyze requires beta > 1");
  if (n < 2) throw std::invalid_argument("analyze requires n >= 2");
  if (grid_points < 2) throw std::invalid_argument("analyze requires at least 2 grid points");

  AnalyzeReport report;
  const double lo = std::log(1.0 / static_cast<double>(n));
  report.grid_log_step = -lo / static_cast<double>(grid_points - 1);
  double best = INFINITY;
  for (std::size_t i = 0; i < grid_points; ++i) {
    double ir = i + 1 == grid_points ? 1.0 : std::exp(lo + report.grid_log_step * static_cast<double>(i));
    while (ir * static_cast<double>(n) < 1.0) ir = std::nextafter(ir, 2.0);
    const double c = complexity(ir, n, beta);
    report.rows.push_back({ir, p_miss(ir, n, beta), c});
    if (c < best) {
      best = c;
      report.grid_argmin = ir;
    }
  }
  report.closed_form = optimal_index_ratio(n, beta);
  report.complexity_at_one = complexity(1.0, n, beta);

  const std::size_t stride = std::max<std::size_t>(1, grid_points / 20);
  out << "IR,p_miss,C\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (i % stride != 0 && i + 1 != report.rows.size()) continue;
    char line[96];
    std::snprintf(line, sizeof line, "%.6e,%.6f,%.6f\n", report.rows[i][0], report.rows[i][1],
                  report.rows[i][2]);
    out << line;
  }
  char line[160];
  std::snprintf(line, sizeof line, "optimal IR (closed form): %.6e\noptimal IR (grid argmin): %.6e\n",
                report.closed_form, report.grid_argmin);
  out << line;
  std::snprintf(line, sizeof line, "C(1) = %.6f, log n = %.6f\n", report.complexity_at_one,
                std::log(static_cast<double>(n)));
  out << line;
  return report;
}

void cmd_gen_data(const std::filesystem::path& out, std::size_t count, std::size_t dim,
                  std::size_t clusters, std::uint64_t seed) {
  MixtureParams params;
  params.count = count;
  params.dim = dim;
  params.clusters = clusters;
  params.seed = seed;
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  write_fvecs(out, gaussian_mixture(params));
}

}  // namespace dqf
