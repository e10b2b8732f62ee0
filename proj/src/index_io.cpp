#include "dqf/index_io.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dqf {

namespace {

enum Tag : std::uint32_t {
  kDataset = 1,
  kFullGraph = 2,
  kEntries = 3,
  kHotMembers = 4,
  kHotGraph = 5,
  kHotEntries = 6,
  kCounters = 7,
};

constexpr char kMagic[4] = {'D', 'Q', 'F', '1'};

class Writer {
 public:
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint64_t v) {
    if (v > 0xffffffffull) throw std::overflow_error("index value does not fit in 32 bits");
    put(v, 4);
  }
  void u64(std::uint64_t v) { put(v, 8); }
  void ids(std::span<const NodeId> v) {
    u32(v.size());
    for (NodeId id : v) u32(id);
  }
  void graph(const NeighborGraph& g) {
    u32(g.node_count());
    u32(g.max_degree());
    for (const auto& list : g.adjacency()) {
      u32(list.size());
      for (NodeId id : list) u32(id);
    }
  }
  std::vector<char> take() { return std::move(bytes_); }

 private:
  void put(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::vector<char> bytes_;
};

class Reader {
 public:
  Reader(const char* data, std::size_t size, std::uint64_t base) : data_(data), size_(size), base_(base) {}

  std::uint64_t u32() { return get(4); }
  std::uint64_t u64() { return get(8); }
  std::vector<NodeId> ids() {
    const auto m = u32();
    std::vector<NodeId> out;
    out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(m, remaining() / 4)));
    for (std::uint64_t i = 0; i < m; ++i) out.push_back(static_cast<NodeId>(u32()));
    return out;
  }
  NeighborGraph graph() {
    const auto nodes = u32();
    const auto max_degree = u32();
    std::vector<std::vector<NodeId>> adjacency;
    adjacency.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(nodes, remaining() / 4)));
    for (std::uint64_t u = 0; u < nodes; ++u) {
      const auto degree = u32();
      std::vector<NodeId> list;
      for (std::uint64_t j = 0; j < degree; ++j) list.push_back(static_cast<NodeId>(u32()));
      adjacency.push_back(std::move(list));
    }
    NeighborGraph g(std::move(adjacency), max_degree);
    try {
      g.validate();
    } catch (const std::logic_error& e) {
      throw LoadError(std::string("invalid graph section: ") + e.what(), base_);
    }
    return g;
  }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  std::uint64_t get(int width) {
    if (remaining() < static_cast<std::size_t>(width)) throw LoadError("truncated section", base_ + pos_);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  const char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::uint64_t base_;
};

struct Section {
  std::uint64_t offset;  // payload start
  std::uint64_t length;
};

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string(), 0);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::uint32_t, Section> scan_sections(const std::vector<char>& bytes) {
  if (bytes.size() < 6 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw LoadError("not a DQF index file", 0);
  const std::uint16_t v = static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[4]) |
                                                     (static_cast<unsigned char>(bytes[5]) << 8));
  if (v != kIndexFormatVersion) throw LoadError("unsupported index format version", 4);

  std::map<std::uint32_t, Section> sections;
  std::size_t pos = 6;
  while (pos < bytes.size()) {
    Reader r(bytes.data() + pos, bytes.size() - pos, pos);
    const auto tag = static_cast<std::uint32_t>(r.u32());
    const auto length = r.u64();
    const std::uint64_t payload = pos + 12;
    if (length > bytes.size() - payload) throw LoadError("section overruns file", pos);
    sections[tag] = {payload, length};
    pos = static_cast<std::size_t>(payload + length);
  }
  return sections;
}

}  // namespace

IndexFileSizes save_index(const std::filesystem::path& path, const DualIndex& index,
                          const VectorDataset& dataset) {
  if (dataset.count() != index.node_count() || dataset.dim() != index.dim())
    throw std::invalid_argument("save_index: dataset does not match index");
  const auto hot = index.hot();
  if (!hot) throw std::invalid_argument("save_index: index has no hot graph");

  IndexFileSizes sizes;
  std::vector<char> out(kMagic, kMagic + 4);
  {
    Writer w;
    w.u16(kIndexFormatVersion);
    auto b = w.take();
    out.insert(out.end(), b.begin(), b.end());
  }
  auto emit = [&out](std::uint32_t tag, Writer& payload) {
    auto body = payload.take();
    Writer head;
    head.u32(tag);
    head.u64(body.size());
    auto h = head.take();
    out.insert(out.end(), h.begin(), h.end());
    out.insert(out.end(), body.begin(), body.end());
    return static_cast<std::uint64_t>(h.size() + body.size());
  };

  Writer ds;
  ds.u32(dataset.count());
  ds.u32(dataset.dim());
  ds.u64(dataset.digest());
  emit(kDataset, ds);

  Writer full;
  full.graph(index.full().graph);
  sizes.full_adjacency = emit(kFullGraph, full);

  Writer entries;
  entries.ids(index.full().entry_points);
  emit(kEntries, entries);

  Writer members, hot_graph, hot_entries;
  members.ids(hot->members);
  hot_graph.graph(hot->graph);
  hot_entries.ids(hot->entry_points);
  sizes.hot = emit(kHotMembers, members) + emit(kHotGraph, hot_graph) + emit(kHotEntries, hot_entries);

  Writer counters;
  const auto counts = index.counter().snapshot();
  counters.u32(counts.size());
  counters.u64(index.counter().total_since_rebuild());
  for (auto c : counts) counters.u64(c);
  emit(kCounters, counters);

  sizes.total = out.size();
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw std::runtime_error("write failed: " + path.string());
  return sizes;
}

DualIndex load_index(const std::filesystem::path& path, const VectorDataset& dataset,
                     const HotIndexConfig& config) {
  const auto bytes = read_file(path);
  const auto sections = scan_sections(bytes);
  auto reader = [&](std::uint32_t tag) {
    auto it = sections.find(tag);
    if (it == sections.end()) throw LoadError("missing section " + std::to_string(tag), bytes.size());
    return Reader(bytes.data() + it->second.offset, static_cast<std::size_t>(it->second.length),
                  it->second.offset);
  };

  auto ds = reader(kDataset);
  const auto count = ds.u32();
  const auto dim = ds.u32();
  const auto digest = ds.u64();
  if (count != dataset.count() || dim != dataset.dim() || digest != dataset.digest())
    throw std::invalid_argument("index file was built from a different dataset");

  FullIndex full;
  auto fg = reader(kFullGraph);
  full.graph = fg.graph();
  auto en = reader(kEntries);
  full.entry_points = en.ids();
  if (full.graph.node_count() != count) throw LoadError("full graph size mismatch", 0);

  HotGraph hot;
  auto hm = reader(kHotMembers);
  hot.members = hm.ids();
  auto hg = reader(kHotGraph);
  hot.graph = hg.graph();
  auto he = reader(kHotEntries);
  hot.entry_points = he.ids();
  hot.source_count = count;
  hot.source_dim = dim;
  for (NodeId m : hot.members)
    if (m >= count) throw LoadError("hot member out of range", 0);

  auto ct = reader(kCounters);
  const auto n = ct.u32();
  const auto total = ct.u64();
  if (n != count) throw LoadError("counter snapshot size mismatch", 0);
  std::vector<std::uint64_t> counts(n);
  for (auto& c : counts) c = ct.u64();

  DualIndex index(dim, std::move(full), config);
  index.counter().restore(counts, total);
  index.restore_hot(std::move(hot));
  return index;
}

IndexFileSizes index_file_sizes(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const auto sections = scan_sections(bytes);
  IndexFileSizes sizes;
  for (const auto& [tag, s] : sections) {
    const std::uint64_t with_header = s.length + 12;
    if (tag == kFullGraph) sizes.full_adjacency = with_header;
    if (tag == kHotMembers || tag == kHotGraph || tag == kHotEntries) sizes.hot += with_header;
  }
  sizes.total = bytes.size();
  return sizes;
}

namespace {

constexpr std::uint64_t kSectionHeader = 12;

std::uint64_t graph_payload(const NeighborGraph& g) {
  return 8 + 4 * (g.node_count() + g.edge_count());
}

}  // namespace

std::uint64_t full_section_bytes(const NeighborGraph& graph) {
  return kSectionHeader + graph_payload(graph);
}

std::uint64_t hot_section_bytes(const HotGraph& hot) {
  return 3 * kSectionHeader + (4 + 4 * hot.members.size()) + graph_payload(hot.graph) +
         (4 + 4 * hot.entry_points.size());
}

}  // namespace dqf
