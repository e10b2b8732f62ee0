#include "dqf/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace dqf {

namespace {

constexpr double kMinGain = 1e-12;

struct ClassWeights {
  std::array<double, 2> w{1.0, 1.0};
};

double gini(double w0, double w1) {
  const double total = w0 + w1;
  if (total <= 0.0) return 0.0;
  const double p0 = w0 / total;
  const double p1 = w1 / total;
  return 1.0 - p0 * p0 - p1 * p1;
}

class Grower {
 public:
  Grower(std::span<const LabeledSample> samples, const TreeParams& params,
         std::vector<DecisionTree::Node>& out)
      : samples_(samples), params_(params), out_(out) {
    std::array<std::size_t, 2> n{};
    for (const auto& s : samples) ++n[static_cast<int>(s.label)];
    const double total = static_cast<double>(samples.size());
    for (int c = 0; c < 2; ++c)
      if (n[c] > 0) weights_.w[c] = total / (2.0 * static_cast<double>(n[c]));
    values_.reserve(samples.size());
    for (const auto& s : samples) values_.push_back(s.features.values());
  }

  void grow(std::vector<std::uint32_t> ids, std::size_t depth) {
    const auto self = static_cast<std::uint32_t>(out_.size());
    out_.emplace_back();
    std::array<double, 2> wsum{};
    std::array<std::uint64_t, 2> counts{};
    for (auto i : ids) {
      const int c = static_cast<int>(samples_[i].label);
      wsum[c] += weights_.w[c];
      ++counts[c];
    }
    {
      auto& node = out_[self];
      node.class_counts = counts;
      node.verdict = wsum[1] > wsum[0] ? Verdict::Terminate : Verdict::Continue;
    }

    const bool pure = counts[0] == 0 || counts[1] == 0;
    if (pure || depth >= params_.max_depth || ids.size() < 2 * params_.min_leaf) return;

    const double parent = (wsum[0] + wsum[1]) * gini(wsum[0], wsum[1]);
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_gain = kMinGain;

    std::vector<std::uint32_t> order(ids);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return values_[a][f] < values_[b][f] || (values_[a][f] == values_[b][f] && a < b);
      });
      std::array<double, 2> left{};
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const int c = static_cast<int>(samples_[order[i]].label);
        left[c] += weights_.w[c];
        const double lo = values_[order[i]][f];
        const double hi = values_[order[i + 1]][f];
        if (!(lo < hi)) continue;
        const std::size_t n_left = i + 1;
        if (n_left < params_.min_leaf || order.size() - n_left < params_.min_leaf) continue;
        const double r0 = wsum[0] - left[0];
        const double r1 = wsum[1] - left[1];
        const double gain =
            parent - (left[0] + left[1]) * gini(left[0], left[1]) - (r0 + r1) * gini(r0, r1);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) return;

    std::vector<std::uint32_t> left_ids, right_ids;
    for (auto i : ids) {
      (values_[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left_ids : right_ids)
          .push_back(i);
    }
    ids.clear();
    ids.shrink_to_fit();

    out_[self].feature = best_feature;
    out_[self].threshold = best_threshold;
    out_[self].impurity_decrease = best_gain;
    out_[self].left = static_cast<std::uint32_t>(out_.size());
    grow(std::move(left_ids), depth + 1);
    out_[self].right = static_cast<std::uint32_t>(out_.size());
    grow(std::move(right_ids), depth + 1);
  }

 private:
  std::span<const LabeledSample> samples_;
  const TreeParams& params_;
  std::vector<DecisionTree::Node>& out_;
  ClassWeights weights_;
  std::vector<std::array<double, kFeatureCount>> values_;
};

const char* verdict_name(Verdict v) { return v == Verdict::Terminate ? "Terminate" : "Continue"; }

Verdict parse_verdict(const std::string& s) {
  if (s == "Terminate") return Verdict::Terminate;
  if (s == "Continue") return Verdict::Continue;
  throw std::invalid_argument("unknown verdict: " + s);
}

}  // namespace

DecisionTree DecisionTree::constant(Verdict verdict) {
  DecisionTree tree;
  Node leaf;
  leaf.verdict = verdict;
  tree.nodes_.push_back(leaf);
  tree.params_.max_depth = 0;
  return tree;
}

Verdict DecisionTree::predict(const FeatureVector& f) const {
  if (nodes_.empty()) throw std::invalid_argument("predict: tree is not trained");
  const auto values = f.values();
  std::uint32_t at = 0;
  while (nodes_[at].feature >= 0) {
    const auto& node = nodes_[at];
    at = values[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes_[at].verdict;
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [at, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes_[at].feature >= 0) {
      stack.push_back({nodes_[at].left, d + 1});
      stack.push_back({nodes_[at].right, d + 1});
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

std::array<double, kFeatureCount> DecisionTree::feature_importance() const {
  std::array<double, kFeatureCount> out{};
  for (const auto& n : nodes_)
    if (n.feature >= 0) out[static_cast<std::size_t>(n.feature)] += n.impurity_decrease;
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (total > 0.0)
    for (auto& v : out) v /= total;
  return out;
}

DecisionTree train_tree(std::span<const LabeledSample> samples, const TreeParams& params) {
  if (samples.empty()) throw std::invalid_argument("train_tree: no samples");
  for (const auto& s : samples) {
    for (double v : s.features.values())
      if (!std::isfinite(v) || v < 0.0)
        throw std::invalid_argument("train_tree: features must be finite and nonnegative");
  }
  DecisionTree tree;
  tree.params_ = params;
  std::vector<std::uint32_t> ids(samples.size());
  std::iota(ids.begin(), ids.end(), 0u);
  Grower(samples, params, tree.nodes_).grow(std::move(ids), 0);
  return tree;
}

std::string DecisionTree::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "dqf-decision-tree";
  j["version"] = 1;
  j["max_depth"] = params_.max_depth;
  j["min_leaf"] = params_.min_leaf;
  j["seed"] = params_.seed;
  j["features"] = kFeatureNames;
  auto& arr = j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : nodes_) {
    nlohmann::ordered_json node;
    if (n.feature >= 0) {
      node["feature"] = n.feature;
      node["threshold"] = n.threshold;
      node["left"] = n.left;
      node["right"] = n.right;
      node["gain"] = n.impurity_decrease;
    }
    node["verdict"] = verdict_name(n.verdict);
    node["counts"] = n.class_counts;
    arr.push_back(std::move(node));
  }
  return j.dump(1) + "\n";
}

DecisionTree DecisionTree::from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  if (j.at("format") != "dqf-decision-tree") throw std::invalid_argument("not a decision tree file");
  if (j.at("version") != 1) throw std::invalid_argument("unsupported decision tree version");
  DecisionTree tree;
  tree.params_.max_depth = j.at("max_depth");
  tree.params_.min_leaf = j.at("min_leaf");
  tree.params_.seed = j.at("seed");
  for (const auto& node : j.at("nodes")) {
    Node n;
    if (node.contains("feature")) {
      n.feature = node.at("feature");
      n.threshold = node.at("threshold");
      n.left = node.at("left");
      n.right = node.at("right");
      n.impurity_decrease = node.at("gain");
      if (n.feature < 0 || n.feature >= static_cast<int>(kFeatureCount) || !std::isfinite(n.threshold))
        throw std::invalid_argument("malformed split node");
    }
    n.verdict = parse_verdict(node.at("verdict"));
    n.class_counts = node.at("counts");
    tree.nodes_.push_back(n);
  }
  const auto size = static_cast<std::uint32_t>(tree.nodes_.size());
  for (std::uint32_t i = 0; i < size; ++i) {
    const auto& n = tree.nodes_[i];
    if (n.feature >= 0 && (n.left <= i || n.right <= i || n.left >= size || n.right >= size))
      throw std::invalid_argument("malformed child offsets");
  }
  return tree;
}

void DecisionTree::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json();
}

DecisionTree DecisionTree::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return from_json(text);
}

}  // namespace dqf
