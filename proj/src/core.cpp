#include "dqf/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <unordered_set>

namespace dqf {

static_assert(std::endian::native == std::endian::little,
              "vector file IO assumes a little-endian host");

LoadError::LoadError(const std::string& what, std::uint64_t offset)
    : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
      offset_(offset) {}

VectorDataset::VectorDataset(std::size_t dim, std::vector<float> data)
    : dim_(dim), data_(std::move(data)) {
  if (dim_ == 0) throw std::invalid_argument("dataset dimension must be positive");
  if (data_.size() % dim_ != 0)
    throw std::invalid_argument("dataset size is not a multiple of its dimension");
  count_ = data_.size() / dim_;
  for (float v : data_) {
    if (!std::isfinite(v)) throw std::invalid_argument("dataset contains a non-finite value");
  }
}

VectorDataset VectorDataset::subset(std::span<const NodeId> ids) const {
  std::vector<float> out;
  out.reserve(ids.size() * dim_);
  for (NodeId id : ids) {
    if (id >= count_) throw std::invalid_argument("subset id out of range");
    auto r = row(id);
    out.insert(out.end(), r.begin(), r.end());
  }
  return VectorDataset(dim_, std::move(out));
}

std::uint64_t VectorDataset::digest() const {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  const std::uint64_t header[2] = {dim_, count_};
  mix(header, sizeof(header));
  mix(data_.data(), data_.size() * sizeof(float));
  return h;
}

float distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw std::invalid_argument("distance: dimension mismatch");
  return distance_unchecked(a.data(), b.data(), a.size());
}

namespace {

std::vector<char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string(), 0);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Shared record walker for fvecs/ivecs: each record is an int32 width then
// `width` 4-byte payload words.
template <typename T, typename Sink>
std::size_t parse_vecs(const std::vector<char>& bytes, const std::string& name, Sink&& sink) {
  std::size_t offset = 0;
  std::int32_t dim = -1;
  while (offset < bytes.size()) {
    if (bytes.size() - offset < sizeof(std::int32_t))
      throw LoadError(name + ": truncated record header", offset);
    std::int32_t d;
    std::memcpy(&d, bytes.data() + offset, sizeof(d));
    if (d <= 0) throw LoadError(name + ": non-positive record dimension", offset);
    if (dim < 0) dim = d;
    if (d != dim) throw LoadError(name + ": inconsistent record dimension", offset);
    const std::size_t payload = static_cast<std::size_t>(d) * sizeof(T);
    if (bytes.size() - offset - sizeof(d) < payload)
      throw LoadError(name + ": truncated record payload", offset);
    const char* p = bytes.data() + offset + sizeof(d);
    for (std::int32_t i = 0; i < d; ++i) {
      T v;
      std::memcpy(&v, p + i * sizeof(T), sizeof(T));
      sink(v, offset);
    }
    offset += sizeof(d) + payload;
  }
  if (dim < 0) throw LoadError(name + ": empty file", 0);
  return static_cast<std::size_t>(dim);
}

template <typename T>
void write_record(std::ofstream& out, std::span<const T> values) {
  const auto d = static_cast<std::int32_t>(values.size());
  out.write(reinterpret_cast<const char*>(&d), sizeof(d));
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(T)));
}

}  // namespace

VectorDataset load_fvecs(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  std::vector<float> data;
  data.reserve(bytes.size() / sizeof(float));
  const std::size_t dim =
      parse_vecs<float>(bytes, path.string(), [&](float v, std::size_t record_offset) {
        if (!std::isfinite(v)) throw LoadError(path.string() + ": non-finite value", record_offset);
        data.push_back(v);
      });
  return VectorDataset(dim, std::move(data));
}

void write_fvecs(const std::filesystem::path& path, const VectorDataset& dataset) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < dataset.count(); ++i)
    write_record(out, dataset.row(static_cast<NodeId>(i)));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::vector<std::int32_t>> load_ivecs(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  std::vector<std::int32_t> flat;
  const std::size_t dim =
      parse_vecs<std::int32_t>(bytes, path.string(), [&](std::int32_t v, std::size_t) {
        flat.push_back(v);
      });
  std::vector<std::vector<std::int32_t>> rows;
  for (std::size_t i = 0; i < flat.size(); i += dim)
    rows.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(i),
                      flat.begin() + static_cast<std::ptrdiff_t>(i + dim));
  return rows;
}

void write_ivecs(const std::filesystem::path& path,
                 const std::vector<std::vector<std::int32_t>>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : rows) {
    if (r.empty()) throw std::invalid_argument("write_ivecs: empty row");
    write_record(out, std::span<const std::int32_t>(r));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ResultList brute_force_knn(const VectorDataset& dataset, std::span<const float> query,
                           std::size_t k) {
  if (k == 0 || k > dataset.count())
    throw std::invalid_argument("brute_force_knn: k out of range");
  if (query.size() != dataset.dim())
    throw std::invalid_argument("brute_force_knn: dimension mismatch");
  ResultList all(dataset.count());
  for (std::size_t i = 0; i < dataset.count(); ++i) {
    const auto id = static_cast<NodeId>(i);
    all[i] = {id, distance_unchecked(query.data(), dataset.row(id).data(), dataset.dim())};
  }
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  all.resize(k);
  return all;
}

double recall_at_k(std::span<const NodeId> approx, std::span<const NodeId> truth,
                   std::size_t k) {
  if (k == 0) throw std::invalid_argument("recall_at_k: k must be positive");
  if (approx.size() < k || truth.size() < k)
    throw std::invalid_argument("recall_at_k: list shorter than k");
  std::unordered_set<NodeId> expected(truth.begin(), truth.begin() + static_cast<std::ptrdiff_t>(k));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += expected.count(approx[i]);
  return static_cast<double>(hits) / static_cast<double>(k);
}

double recall_at_k(std::span<const Neighbor> approx, std::span<const Neighbor> truth,
                   std::size_t k) {
  std::vector<NodeId> a, t;
  a.reserve(approx.size());
  t.reserve(truth.size());
  for (const auto& n : approx) a.push_back(n.id);
  for (const auto& n : truth) t.push_back(n.id);
  return recall_at_k(std::span<const NodeId>(a), std::span<const NodeId>(t), k);
}

}  // namespace dqf
