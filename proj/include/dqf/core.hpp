#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dqf {

using NodeId = std::uint32_t;

/// Thrown when a vector file cannot be parsed. `offset()` is the byte offset
/// of the record that failed.
class LoadError : public std::runtime_error {
 public:
  LoadError(const std::string& what, std::uint64_t offset);
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Row-major, immutable collection of `count` vectors of dimension `dim`.
/// Row i has id i.
class VectorDataset {
 public:
  VectorDataset() = default;
  VectorDataset(std::size_t dim, std::vector<float> data);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  std::span<const float> row(NodeId id) const {
    return {data_.data() + static_cast<std::size_t>(id) * dim_, dim_};
  }
  std::span<const float> data() const noexcept { return data_; }

  /// New dataset holding the given rows, in the given order.
  VectorDataset subset(std::span<const NodeId> ids) const;

  /// FNV-1a over dim, count and the raw float bytes.
  std::uint64_t digest() const;

 private:
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<float> data_;
};

struct Neighbor {
  NodeId id = 0;
  float distance = 0.0f;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Sorted ascending by (distance, id).
using ResultList = std::vector<Neighbor>;

/// Euclidean distance with single-precision accumulation.
/// Throws std::invalid_argument on dimension mismatch.
float distance(std::span<const float> a, std::span<const float> b);

/// Same kernel without the dimension check, for inner loops.
inline float distance_unchecked(const float* a, const float* b, std::size_t dim) {
  float sum = 0.0f;
  for (std::size_t i = 0; i < dim; ++i) {
    const float diff = a[i] - b[i];
    sum += diff * diff;
  }
  return __builtin_sqrtf(sum);
}

VectorDataset load_fvecs(const std::filesystem::path& path);
void write_fvecs(const std::filesystem::path& path, const VectorDataset& dataset);

/// ivecs rows, e.g. ground-truth neighbor lists. All rows must share one width.
std::vector<std::vector<std::int32_t>> load_ivecs(const std::filesystem::path& path);
void write_ivecs(const std::filesystem::path& path,
                 const std::vector<std::vector<std::int32_t>>& rows);

/// Exact k nearest neighbors by full scan; ties broken by ascending id.
ResultList brute_force_knn(const VectorDataset& dataset, std::span<const float> query,
                           std::size_t k);

/// |ids(approx[0..k)) ∩ ids(truth[0..k))| / k.
double recall_at_k(std::span<const Neighbor> approx, std::span<const Neighbor> truth,
                   std::size_t k);
double recall_at_k(std::span<const NodeId> approx, std::span<const NodeId> truth,
                   std::size_t k);

}  // namespace dqf
