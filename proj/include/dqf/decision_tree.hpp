#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dqf {

enum class Verdict : std::uint8_t { Continue = 0, Terminate = 1 };

inline constexpr std::size_t kFeatureCount = 6;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "hotIdx_1st", "hotIdx_1st_div_kth", "fullIdx_1st",
    "fullIdx_1st_div_kth", "dist_count", "update_count"};

/// Checkpoint features, in kFeatureNames order.
struct FeatureVector {
  double hot_first = 0.0;
  double hot_first_div_kth = 1.0;
  double full_first = 0.0;
  double full_first_div_kth = 1.0;
  std::uint64_t dist_count = 0;
  std::uint64_t update_count = 0;

  std::array<double, kFeatureCount> values() const {
    return {hot_first, hot_first_div_kth, full_first, full_first_div_kth,
            static_cast<double>(dist_count), static_cast<double>(update_count)};
  }
  double operator[](std::size_t i) const { return values()[i]; }
};

struct LabeledSample {
  FeatureVector features;
  Verdict label = Verdict::Terminate;
};

struct TreeParams {
  std::size_t max_depth = 10;
  std::size_t min_leaf = 20;
  std::uint64_t seed = 0;
};

/// Axis-aligned binary classifier stored as a preorder node array.
/// Descent goes left iff feature <= threshold.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    Verdict verdict = Verdict::Continue;
    std::array<std::uint64_t, 2> class_counts{};  // indexed by Verdict
    double impurity_decrease = 0.0;             // weighted, splits only
  };

  DecisionTree() = default;
  static DecisionTree constant(Verdict verdict);

  bool trained() const noexcept { return !nodes_.empty(); }
  Verdict predict(const FeatureVector& f) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const TreeParams& params() const noexcept { return params_; }

  /// Normalized weighted impurity decrease per feature; all zeros for a
  /// single leaf.
  std::array<double, kFeatureCount> feature_importance() const;

  std::string to_json() const;
  static DecisionTree from_json(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static DecisionTree load(const std::filesystem::path& path);

 private:
  friend DecisionTree train_tree(std::span<const LabeledSample>, const TreeParams&);
  std::vector<Node> nodes_;
  TreeParams params_;
};

/// CART growth on inverse-frequency-weighted Gini impurity.
DecisionTree train_tree(std::span<const LabeledSample> samples, const TreeParams& params);

inline Verdict predict(const DecisionTree& tree, const FeatureVector& f) { return tree.predict(f); }

}  // namespace dqf
