#include "ownet/graph.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_set>

#include "ownet/csv.hpp"
#include "ownet/error.hpp"

namespace ownet {

namespace {

const csv::Row kNodeHeader = {"node_id", "jurisdiction", "nace_section", "name", "is_hq"};
const csv::Row kEdgeHeader = {"subsidiary_id", "shareholder_id", "pct"};

bool parse_flag(std::string_view s, bool& out) {
  if (s.empty() || s == "0" || s == "false" || s == "FALSE" || s == "no") {
    out = false;
    return true;
  }
  if (s == "1" || s == "true" || s == "TRUE" || s == "yes") {
    out = true;
    return true;
  }
  return false;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

bool is_valid_jurisdiction(std::string_view code) {
  if (code == kUnknownJurisdiction) return true;
  return code.size() == 2 && code[0] >= 'A' && code[0] <= 'Z' && code[1] >= 'A' && code[1] <= 'Z';
}

bool jurisdictions_differ(std::string_view a, std::string_view b) {
  if (a == kUnknownJurisdiction || b == kUnknownJurisdiction) return true;
  return a != b;
}

std::vector<NodeRecord> load_nodes(const std::string& path) {
  auto table = csv::read_file(path, kNodeHeader);
  std::vector<NodeRecord> nodes;
  nodes.reserve(table.rows.size());
  std::unordered_set<std::string> seen;
  seen.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    auto& row = table.rows[r];
    std::size_t line = table.lines[r];
    NodeRecord rec;
    rec.id = std::string(trim(row[0]));
    if (rec.id.empty()) throw ParseError(path, line, "empty node_id");
    rec.jurisdiction = std::string(trim(row[1]));
    if (rec.jurisdiction.empty()) rec.jurisdiction = std::string(kUnknownJurisdiction);
    if (!is_valid_jurisdiction(rec.jurisdiction)) {
      throw ParseError(path, line, "invalid jurisdiction `" + rec.jurisdiction + "`");
    }
    rec.industry = std::string(trim(row[2]));
    if (rec.industry.empty()) rec.industry = std::string(kUnknownIndustry);
    if (rec.industry.size() != 1 || rec.industry[0] < 'A' || rec.industry[0] > 'Z') {
      throw ParseError(path, line, "invalid nace_section `" + rec.industry + "`");
    }
    rec.name = std::move(row[3]);
    if (!parse_flag(trim(row[4]), rec.is_hq)) throw ParseError(path, line, "invalid is_hq `" + row[4] + "`");
    if (!seen.insert(rec.id).second) throw ParseError(path, line, "duplicate node_id `" + rec.id + "`");
    nodes.push_back(std::move(rec));
  }
  return nodes;
}

EdgeList load_edges(const std::string& path, const std::vector<NodeRecord>* known_nodes) {
  auto table = csv::read_file(path, kEdgeHeader);
  std::unordered_set<std::string_view> known;
  if (known_nodes) {
    known.reserve(known_nodes->size());
    for (const auto& n : *known_nodes) known.insert(n.id);
  }
  EdgeList out;
  out.edges.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    auto& row = table.rows[r];
    std::size_t line = table.lines[r];
    OwnershipEdge e;
    e.subsidiary = std::string(trim(row[0]));
    e.shareholder = std::string(trim(row[1]));
    if (e.subsidiary.empty() || e.shareholder.empty()) throw ParseError(path, line, "empty node id");
    auto pct_text = trim(row[2]);
    if (pct_text.empty()) {
      e.pct = 0.0;
      ++out.stats.blank_pct;
    } else {
      auto [ptr, ec] = std::from_chars(pct_text.data(), pct_text.data() + pct_text.size(), e.pct);
      if (ec != std::errc() || ptr != pct_text.data() + pct_text.size()) {
        throw ParseError(path, line, "invalid pct `" + std::string(pct_text) + "`");
      }
      if (!(e.pct >= 0.0 && e.pct <= 100.0)) {
        throw ParseError(path, line, "pct out of range [0,100]: " + std::string(pct_text));
      }
    }
    if (known_nodes) {
      for (const auto* id : {&e.subsidiary, &e.shareholder}) {
        if (!known.contains(*id)) throw ParseError(path, line, "unknown node_id `" + *id + "`");
      }
    }
    if (e.subsidiary == e.shareholder) {
      ++out.stats.self_loops;
      continue;
    }
    out.edges.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------

Digraph Digraph::from_sorted_edges(NodeIndex node_count,
                                   std::span<const std::pair<NodeIndex, NodeIndex>> edges) {
  Digraph g;
  g.node_count_ = node_count;
  g.out_offsets_.assign(std::size_t(node_count) + 1, 0);
  g.in_offsets_.assign(std::size_t(node_count) + 1, 0);
  for (auto [u, v] : edges) {
    ++g.out_offsets_[u + 1];
    ++g.in_offsets_[v + 1];
  }
  for (NodeIndex v = 0; v < node_count; ++v) {
    g.out_offsets_[v + 1] += g.out_offsets_[v];
    g.in_offsets_[v + 1] += g.in_offsets_[v];
  }
  g.out_targets_.resize(edges.size());
  g.in_sources_.resize(edges.size());
  std::vector<std::size_t> fill(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto [u, v] = edges[i];
    g.out_targets_[i] = v;
    // Sources arrive in ascending order, so every in-list ends up sorted.
    g.in_sources_[fill[v]++] = u;
  }
  return g;
}

bool Digraph::has_edge(NodeIndex u, NodeIndex v) const noexcept {
  auto succ = successors(u);
  return std::binary_search(succ.begin(), succ.end(), v);
}

std::vector<std::pair<NodeIndex, NodeIndex>> Digraph::edge_pairs() const {
  std::vector<std::pair<NodeIndex, NodeIndex>> out;
  out.reserve(edge_count());
  for (NodeIndex u = 0; u < node_count_; ++u) {
    for (NodeIndex v : successors(u)) out.emplace_back(u, v);
  }
  return out;
}

// ---------------------------------------------------------------------------

OwnershipGraph OwnershipGraph::build(std::vector<NodeRecord> nodes, const std::vector<OwnershipEdge>& edges,
                                     EdgeLoadStats load_stats) {
  std::unordered_map<std::string, NodeIndex> index;
  index.reserve(nodes.size());
  for (NodeIndex i = 0; i < nodes.size(); ++i) {
    if (!index.emplace(nodes[i].id, i).second) throw Error("duplicate node_id `" + nodes[i].id + "`");
  }
  std::vector<IndexedEdge> indexed;
  indexed.reserve(edges.size());
  for (const auto& e : edges) {
    auto s = index.find(e.subsidiary);
    auto h = index.find(e.shareholder);
    if (s == index.end()) throw Error("edge references missing node `" + e.subsidiary + "`");
    if (h == index.end()) throw Error("edge references missing node `" + e.shareholder + "`");
    indexed.push_back({s->second, h->second, e.pct});
  }
  auto g = from_indexed(std::move(nodes), std::move(indexed), load_stats);
  return g;
}

OwnershipGraph OwnershipGraph::from_indexed(std::vector<NodeRecord> nodes, std::vector<IndexedEdge> edges,
                                            EdgeLoadStats load_stats) {
  OwnershipGraph g;
  g.load_stats_ = load_stats;
  g.nodes_ = std::move(nodes);
  g.index_.reserve(g.nodes_.size());
  for (NodeIndex i = 0; i < g.nodes_.size(); ++i) {
    if (!g.index_.emplace(g.nodes_[i].id, i).second) throw Error("duplicate node_id `" + g.nodes_[i].id + "`");
  }
  const auto n = static_cast<NodeIndex>(g.nodes_.size());
  for (const auto& e : edges) {
    if (e.subsidiary >= n || e.shareholder >= n) throw Error("edge references missing node index");
    if (e.subsidiary == e.shareholder) throw Error("self-loop on node `" + g.nodes_[e.subsidiary].id + "`");
  }
  std::sort(edges.begin(), edges.end(), [](const IndexedEdge& a, const IndexedEdge& b) {
    if (a.subsidiary != b.subsidiary) return a.subsidiary < b.subsidiary;
    if (a.shareholder != b.shareholder) return a.shareholder < b.shareholder;
    return a.pct > b.pct;
  });
  std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
  pairs.reserve(edges.size());
  g.pcts_.reserve(edges.size());
  for (const auto& e : edges) {
    if (!pairs.empty() && pairs.back() == std::pair{e.subsidiary, e.shareholder}) {
      ++g.merged_duplicates_;  // sorted by descending pct, first one wins
      continue;
    }
    pairs.emplace_back(e.subsidiary, e.shareholder);
    g.pcts_.push_back(e.pct);
  }
  g.topology_ = Digraph::from_sorted_edges(n, pairs);
  return g;
}

std::optional<NodeIndex> OwnershipGraph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex OwnershipGraph::index_of(std::string_view id) const {
  auto v = find(id);
  if (!v) throw Error("unknown node_id `" + std::string(id) + "`");
  return *v;
}

std::optional<double> OwnershipGraph::pct(NodeIndex subsidiary, NodeIndex shareholder) const {
  auto succ = topology_.successors(subsidiary);
  auto it = std::lower_bound(succ.begin(), succ.end(), shareholder);
  if (it == succ.end() || *it != shareholder) return std::nullopt;
  return pcts_[topology_.out_begin(subsidiary) + static_cast<std::size_t>(it - succ.begin())];
}

// ---------------------------------------------------------------------------

SubstantialView::SubstantialView(const OwnershipGraph& graph, double threshold_pct)
    : graph_(&graph), threshold_(threshold_pct) {
  if (!(threshold_pct > 0.0 && threshold_pct <= 100.0)) {
    throw Error("substantial threshold must lie in (0, 100]");
  }
  const auto& topo = graph.topology();
  std::vector<std::pair<NodeIndex, NodeIndex>> kept;
  kept.reserve(topo.edge_count());
  for (NodeIndex u = 0; u < topo.node_count(); ++u) {
    auto succ = topo.successors(u);
    auto pcts = graph.out_pcts(u);
    for (std::size_t i = 0; i < succ.size(); ++i) {
      if (pcts[i] >= threshold_pct) kept.emplace_back(u, succ[i]);
    }
  }
  topology_ = Digraph::from_sorted_edges(topo.node_count(), kept);
}

SubstantialView substantial_view(const OwnershipGraph& graph, double threshold_pct) {
  return SubstantialView(graph, threshold_pct);
}

std::vector<DegreeRecord> degrees(const Digraph& g) {
  std::vector<DegreeRecord> out(g.node_count());
  for (NodeIndex v = 0; v < g.node_count(); ++v) out[v] = {v, g.in_degree(v), g.out_degree(v)};
  return out;
}

double reciprocal_link_ratio(const Digraph& g) {
  if (g.edge_count() == 0) return 0.0;
  std::size_t reciprocal = 0;
  for (NodeIndex u = 0; u < g.node_count(); ++u) {
    for (NodeIndex v : g.successors(u)) {
      if (g.has_edge(v, u)) ++reciprocal;
    }
  }
  return static_cast<double>(reciprocal) / static_cast<double>(g.edge_count());
}

OwnershipGraph induced_subgraph(const OwnershipGraph& graph, std::span<const NodeIndex> members) {
  std::vector<NodeIndex> local(graph.node_count(), NodeIndex(-1));
  std::vector<NodeRecord> nodes;
  std::vector<NodeIndex> order;
  for (NodeIndex v : members) {
    if (v >= graph.node_count()) throw Error("induced_subgraph: node index out of range");
    if (local[v] != NodeIndex(-1)) continue;
    local[v] = static_cast<NodeIndex>(order.size());
    order.push_back(v);
    nodes.push_back(graph.node(v));
  }
  std::vector<OwnershipGraph::IndexedEdge> edges;
  for (NodeIndex v : order) {
    auto succ = graph.topology().successors(v);
    auto pcts = graph.out_pcts(v);
    for (std::size_t i = 0; i < succ.size(); ++i) {
      if (local[succ[i]] != NodeIndex(-1)) edges.push_back({local[v], local[succ[i]], pcts[i]});
    }
  }
  return OwnershipGraph::from_indexed(std::move(nodes), std::move(edges), graph.load_stats());
}

OwnershipGraph induced_subgraph(const OwnershipGraph& graph, std::span<const std::string> member_ids) {
  std::vector<NodeIndex> members;
  members.reserve(member_ids.size());
  for (const auto& id : member_ids) members.push_back(graph.index_of(id));
  return induced_subgraph(graph, members);
}

}  // namespace ownet
