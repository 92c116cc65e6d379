#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ownet/graph.hpp"

namespace ownet {

/// Where affiliate degrees are counted.
enum class DegreeScope {
  Within,  // subgraph induced by the MNC's affiliates and headquarters
  Global,  // the whole substantial view
};

/// One multinational: its headquarters and every company that reaches the
/// headquarters through substantial capital-flow edges.
struct MncSubtree {
  NodeIndex hq = 0;
  /// Ordered by (layer, node index).
  std::vector<NodeIndex> affiliates;
  std::vector<std::uint32_t> layer;  // aligned with affiliates
  std::vector<std::uint32_t> k_in;   // aligned with affiliates
  std::vector<std::uint32_t> k_out;  // aligned with affiliates
  std::unordered_map<NodeIndex, std::uint32_t> position;

  // Sums over affiliates only; the headquarters is excluded.
  std::uint64_t sum_k_in = 0;
  std::uint64_t sum_k_total = 0;
  std::uint64_t sum_k_product = 0;

  std::size_t size() const noexcept { return affiliates.size(); }
  bool contains(NodeIndex v) const { return position.contains(v); }
  std::optional<std::uint32_t> find(NodeIndex v) const {
    auto it = position.find(v);
    if (it == position.end()) return std::nullopt;
    return it->second;
  }
};

/// Affiliate set and layers (reverse BFS from the headquarters), followed by
/// degrees under `scope`.
MncSubtree extract_mnc(const SubstantialView& view, NodeIndex hq, DegreeScope scope = DegreeScope::Within);
MncSubtree extract_mnc(const SubstantialView& view, std::string_view hq_id,
                       DegreeScope scope = DegreeScope::Within);

/// Shortest substantial path length from each affiliate to the headquarters.
std::vector<std::uint32_t> assign_layers(const SubstantialView& view, const MncSubtree& subtree);

struct MncDegrees {
  std::vector<std::uint32_t> k_in, k_out;  // aligned with affiliates
  std::uint64_t sum_k_in = 0, sum_k_total = 0, sum_k_product = 0;
};
MncDegrees mnc_degrees(const SubstantialView& view, const MncSubtree& subtree,
                       DegreeScope scope = DegreeScope::Within);

/// Direct substantial subsidiaries of `v` that are affiliates of the subtree.
std::vector<NodeIndex> subtree_subsidiaries(const SubstantialView& view, const MncSubtree& subtree, NodeIndex v);

struct HqEntry {
  std::string hq_id;
  std::string mnc_name;
};
/// Reads `hq_node_id,mnc_name`.
std::vector<HqEntry> load_hq_list(const std::string& path);

}  // namespace ownet
