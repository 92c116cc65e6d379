#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ownet {

using NodeIndex = std::uint32_t;

/// Jurisdiction sentinel for companies without location data.
inline constexpr std::string_view kUnknownJurisdiction = "n.a.";
/// Industry sentinel for companies without a NACE section.
inline constexpr std::string_view kUnknownIndustry = "V";
/// Default substantial-ownership threshold, in percent.
inline constexpr double kSubstantialPct = 10.0;

struct NodeRecord {
  std::string id;
  std::string jurisdiction;
  std::string industry;
  std::string name;
  bool is_hq = false;
};

/// One shareholding row: `shareholder` owns `pct` percent of `subsidiary`.
struct OwnershipEdge {
  std::string subsidiary;
  std::string shareholder;
  double pct = 0.0;
};

struct EdgeLoadStats {
  std::size_t self_loops = 0;  // dropped on ingest
  std::size_t blank_pct = 0;   // ingested as pct = 0
};

struct EdgeList {
  std::vector<OwnershipEdge> edges;
  EdgeLoadStats stats;
};

bool is_valid_jurisdiction(std::string_view code);

/// Jurisdiction inequality where the "n.a." sentinel never equals anything,
/// itself included.
bool jurisdictions_differ(std::string_view a, std::string_view b);

std::vector<NodeRecord> load_nodes(const std::string& path);

/// Loads an edge file. When `known_nodes` is given, unknown ids are an error
/// (strict mode); otherwise validation is deferred to `OwnershipGraph::build`.
EdgeList load_edges(const std::string& path, const std::vector<NodeRecord>* known_nodes = nullptr);

/// Compressed sparse adjacency of a simple directed graph, indexed both ways.
class Digraph {
 public:
  Digraph() = default;

  /// `edges` must be sorted by (source, target) and free of duplicates.
  static Digraph from_sorted_edges(NodeIndex node_count,
                                   std::span<const std::pair<NodeIndex, NodeIndex>> edges);

  NodeIndex node_count() const noexcept { return node_count_; }
  std::size_t edge_count() const noexcept { return out_targets_.size(); }

  std::span<const NodeIndex> successors(NodeIndex v) const noexcept {
    return {out_targets_.data() + out_offsets_[v], out_targets_.data() + out_offsets_[v + 1]};
  }
  std::span<const NodeIndex> predecessors(NodeIndex v) const noexcept {
    return {in_sources_.data() + in_offsets_[v], in_sources_.data() + in_offsets_[v + 1]};
  }
  std::uint32_t out_degree(NodeIndex v) const noexcept {
    return static_cast<std::uint32_t>(out_offsets_[v + 1] - out_offsets_[v]);
  }
  std::uint32_t in_degree(NodeIndex v) const noexcept {
    return static_cast<std::uint32_t>(in_offsets_[v + 1] - in_offsets_[v]);
  }
  /// Position of v's first out-edge; out-edges of v occupy a contiguous range.
  std::size_t out_begin(NodeIndex v) const noexcept { return out_offsets_[v]; }

  bool has_edge(NodeIndex u, NodeIndex v) const noexcept;

  /// Sorted (source, target) pairs.
  std::vector<std::pair<NodeIndex, NodeIndex>> edge_pairs() const;

 private:
  NodeIndex node_count_ = 0;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<NodeIndex> out_targets_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<NodeIndex> in_sources_;
};

/// Immutable ownership network. Edges point subsidiary -> shareholder, the
/// direction in which dividends and capital travel, so a node's in-degree is
/// the number of subsidiaries it holds.
class OwnershipGraph {
 public:
  OwnershipGraph() = default;

  /// Node ids are mapped to dense indexes in input order. Duplicate
  /// (subsidiary, shareholder) rows are merged keeping the largest pct.
  static OwnershipGraph build(std::vector<NodeRecord> nodes, const std::vector<OwnershipEdge>& edges,
                              EdgeLoadStats load_stats = {});

  /// Assembles a graph from already-indexed parts (cache loader, subgraphs).
  struct IndexedEdge {
    NodeIndex subsidiary;
    NodeIndex shareholder;
    double pct;
  };
  static OwnershipGraph from_indexed(std::vector<NodeRecord> nodes, std::vector<IndexedEdge> edges,
                                     EdgeLoadStats load_stats = {});

  NodeIndex node_count() const noexcept { return topology_.node_count(); }
  std::size_t edge_count() const noexcept { return topology_.edge_count(); }

  const std::vector<NodeRecord>& nodes() const noexcept { return nodes_; }
  const NodeRecord& node(NodeIndex v) const { return nodes_[v]; }
  std::optional<NodeIndex> find(std::string_view id) const;
  /// Throws when the id is unknown.
  NodeIndex index_of(std::string_view id) const;

  const Digraph& topology() const noexcept { return topology_; }
  /// Ownership percentage of each out-edge of v, aligned with successors(v).
  std::span<const double> out_pcts(NodeIndex v) const noexcept {
    auto b = topology_.out_begin(v);
    return {pcts_.data() + b, pcts_.data() + b + topology_.out_degree(v)};
  }
  std::optional<double> pct(NodeIndex subsidiary, NodeIndex shareholder) const;

  const EdgeLoadStats& load_stats() const noexcept { return load_stats_; }
  std::size_t merged_duplicates() const noexcept { return merged_duplicates_; }

 private:
  std::vector<NodeRecord> nodes_;
  std::unordered_map<std::string, NodeIndex> index_;
  Digraph topology_;
  std::vector<double> pcts_;
  EdgeLoadStats load_stats_;
  std::size_t merged_duplicates_ = 0;
};

/// The edges of a graph whose ownership percentage reaches a threshold.
class SubstantialView {
 public:
  SubstantialView(const OwnershipGraph& graph, double threshold_pct = kSubstantialPct);

  const OwnershipGraph& graph() const noexcept { return *graph_; }
  double threshold() const noexcept { return threshold_; }
  const Digraph& topology() const noexcept { return topology_; }
  std::size_t edge_count() const noexcept { return topology_.edge_count(); }
  /// Edges of the parent graph left out of the view.
  std::size_t dropped_edges() const noexcept { return graph_->edge_count() - topology_.edge_count(); }
  bool contains(NodeIndex subsidiary, NodeIndex shareholder) const noexcept {
    return topology_.has_edge(subsidiary, shareholder);
  }

 private:
  const OwnershipGraph* graph_;
  double threshold_;
  Digraph topology_;
};

SubstantialView substantial_view(const OwnershipGraph& graph, double threshold_pct = kSubstantialPct);

struct DegreeRecord {
  NodeIndex node;
  std::uint32_t k_in;   // capital entering: subsidiaries owned
  std::uint32_t k_out;  // capital leaving: shareholders
};

std::vector<DegreeRecord> degrees(const Digraph& g);

/// Fraction of edges (u, v) whose reverse (v, u) is also present.
double reciprocal_link_ratio(const Digraph& g);

/// Subgraph on `members` (kept in the given order, duplicates ignored) with
/// every edge whose endpoints are both members.
OwnershipGraph induced_subgraph(const OwnershipGraph& graph, std::span<const NodeIndex> members);
OwnershipGraph induced_subgraph(const OwnershipGraph& graph, std::span<const std::string> member_ids);

/// Versioned binary snapshot of a built graph.
inline constexpr std::uint32_t kGraphCacheVersion = 1;
void save_graph_cache(const OwnershipGraph& graph, const std::string& path);
OwnershipGraph load_graph_cache(const std::string& path);

}  // namespace ownet
