#pragma once

#include <cstdint>
#include <filesystem>

#include "dqf/core.hpp"
#include "dqf/hot_index.hpp"

namespace dqf {

// Combined index file:
//   "DQF1" | u16 version | sections...
//   section = u32 tag | u64 payload bytes | payload
// Integers are little-endian u32 unless noted. Sections, in write order:
//   1 dataset     u32 count, u32 dim, u64 digest
//   2 full graph  u32 nodes, u32 max_degree, per node: u32 degree, ids
//   3 entries     u32 m, ids
//   4 hot members u32 m, global ids (ascending)
//   5 hot graph   same layout as 2, local ids
//   6 hot entries u32 m, global ids
//   7 counters    u32 n, u64 total_since_rebuild, n x u64 counts
inline constexpr std::uint16_t kIndexFormatVersion = 1;

struct IndexFileSizes {
  std::uint64_t full_adjacency = 0;
  std::uint64_t hot = 0;  // sections 4 + 5 + 6, headers included
  std::uint64_t total = 0;
};

IndexFileSizes save_index(const std::filesystem::path& path, const DualIndex& index,
                          const VectorDataset& dataset);

/// Throws LoadError on malformed files and std::invalid_argument when the
/// file was built against a different dataset.
DualIndex load_index(const std::filesystem::path& path, const VectorDataset& dataset,
                     const HotIndexConfig& config);

IndexFileSizes index_file_sizes(const std::filesystem::path& path);

/// Bytes the graph sections occupy in the file, headers included.
std::uint64_t full_section_bytes(const NeighborGraph& graph);
std::uint64_t hot_section_bytes(const HotGraph& hot);

}  // namespace dqf
