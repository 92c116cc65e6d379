#include "ownet/mnc.hpp"

#include <algorithm>

#include "ownet/csv.hpp"
#include "ownet/error.hpp"

namespace ownet {

MncSubtree extract_mnc(const SubstantialView& view, NodeIndex hq, DegreeScope scope) {
  const auto& g = view.topology();
  if (hq >= g.node_count()) throw Error("unknown headquarters index");
  MncSubtree t;
  t.hq = hq;

  // Capital flows subsidiary -> shareholder, so affiliates are the nodes that
  // reach the headquarters; walk predecessors outwards from it.
  std::unordered_map<NodeIndex, std::uint32_t> dist{{hq, 0}};
  std::vector<NodeIndex> frontier{hq}, next;
  std::vector<std::pair<std::uint32_t, NodeIndex>> found;
  for (std::uint32_t level = 1; !frontier.empty(); ++level) {
    next.clear();
    for (NodeIndex v : frontier) {
      for (NodeIndex s : g.predecessors(v)) {
        if (dist.emplace(s, level).second) {
          next.push_back(s);
          found.emplace_back(level, s);
        }
      }
    }
    frontier.swap(next);
  }
  std::sort(found.begin(), found.end());
  t.affiliates.reserve(found.size());
  for (auto [level, v] : found) {
    t.position.emplace(v, static_cast<std::uint32_t>(t.affiliates.size()));
    t.affiliates.push_back(v);
  }
  t.layer = assign_layers(view, t);
  auto deg = mnc_degrees(view, t, scope);
  t.k_in = std::move(deg.k_in);
  t.k_out = std::move(deg.k_out);
  t.sum_k_in = deg.sum_k_in;
  t.sum_k_total = deg.sum_k_total;
  t.sum_k_product = deg.sum_k_product;
  return t;
}

MncSubtree extract_mnc(const SubstantialView& view, std::string_view hq_id, DegreeScope scope) {
  return extract_mnc(view, view.graph().index_of(hq_id), scope);
}

std::vector<std::uint32_t> assign_layers(const SubstantialView& view, const MncSubtree& subtree) {
  const auto& g = view.topology();
  std::vector<std::uint32_t> layer(subtree.size(), 0);
  std::vector<NodeIndex> frontier{subtree.hq}, next;
  for (std::uint32_t level = 1; !frontier.empty(); ++level) {
    next.clear();
    for (NodeIndex v : frontier) {
      for (NodeIndex s : g.predecessors(v)) {
        auto pos = subtree.find(s);
        if (!pos || layer[*pos] != 0) continue;
        layer[*pos] = level;
        next.push_back(s);
      }
    }
    frontier.swap(next);
  }
  return layer;
}

MncDegrees mnc_degrees(const SubstantialView& view, const MncSubtree& subtree, DegreeScope scope) {
  const auto& g = view.topology();
  MncDegrees d;
  d.k_in.resize(subtree.size());
  d.k_out.resize(subtree.size());
  auto inside = [&](NodeIndex v) { return v == subtree.hq || subtree.contains(v); };
  for (std::size_t i = 0; i < subtree.size(); ++i) {
    NodeIndex a = subtree.affiliates[i];
    if (scope == DegreeScope::Global) {
      d.k_in[i] = g.in_degree(a);
      d.k_out[i] = g.out_degree(a);
    } else {
      for (NodeIndex s : g.predecessors(a)) d.k_in[i] += inside(s);
      for (NodeIndex s : g.successors(a)) d.k_out[i] += inside(s);
    }
    d.sum_k_in += d.k_in[i];
    d.sum_k_total += std::uint64_t(d.k_in[i]) + d.k_out[i];
    d.sum_k_product += std::uint64_t(d.k_in[i]) * d.k_out[i];
  }
  return d;
}

std::vector<NodeIndex> subtree_subsidiaries(const SubstantialView& view, const MncSubtree& subtree, NodeIndex v) {
  std::vector<NodeIndex> out;
  for (NodeIndex s : view.topology().predecessors(v)) {
    if (subtree.contains(s)) out.push_back(s);
  }
  return out;
}

std::vector<HqEntry> load_hq_list(const std::string& path) {
  auto table = csv::read_file(path, {"hq_node_id", "mnc_name"});
  std::vector<HqEntry> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    auto& row = table.rows[r];
    if (row[0].empty()) throw ParseError(path, table.lines[r], "empty hq_node_id");
    if (row[1].empty()) throw ParseError(path, table.lines[r], "empty mnc_name");
    out.push_back({std::move(row[0]), std::move(row[1])});
  }
  return out;
}

}  // namespace ownet
