#include "ownet/netstats.hpp"

#include <algorithm>
#include <cmath>

#include "ownet/error.hpp"

namespace ownet {

const char* direction_name(DegreeDirection d) {
  switch (d) {
    case DegreeDirection::In: return "in";
    case DegreeDirection::Out: return "out";
    case DegreeDirection::Total: return "total";
  }
  return "?";
}

std::vector<LogBin> log_bin(const std::map<std::uint64_t, std::size_t>& counts, double bin_ratio) {
  if (!(bin_ratio > 1.0)) throw Error("log-bin ratio must exceed 1");
  std::size_t total = 0;
  for (auto [x, c] : counts) {
    if (x > 0) total += c;
  }
  std::vector<LogBin> bins;
  if (total == 0) return bins;
  int index = 0;
  double lo = 1.0, hi = bin_ratio;
  std::size_t acc = 0;
  auto flush = [&] {
    if (acc) bins.push_back({lo, hi, acc, double(acc) / (double(total) * (hi - lo))});
    acc = 0;
  };
  for (auto [x, c] : counts) {
    if (x == 0) continue;
    while (double(x) >= hi) {
      flush();
      ++index;
      lo = hi;
      hi = std::pow(bin_ratio, index + 1);
    }
    acc += c;
  }
  flush();
  return bins;
}

std::vector<std::uint64_t> degree_samples(const Digraph& g, DegreeDirection direction) {
  std::vector<std::uint64_t> out(g.node_count());
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    switch (direction) {
      case DegreeDirection::In: out[v] = g.in_degree(v); break;
      case DegreeDirection::Out: out[v] = g.out_degree(v); break;
      case DegreeDirection::Total: out[v] = std::uint64_t(g.in_degree(v)) + g.out_degree(v); break;
    }
  }
  return out;
}

DegreeHistogram degree_histogram(const Digraph& g, DegreeDirection direction, double bin_ratio) {
  if (!(bin_ratio > 1.0)) throw Error("log-bin ratio must exceed 1");
  DegreeHistogram h{direction, bin_ratio, {}, {}};
  for (auto k : degree_samples(g, direction)) ++h.raw[k];
  h.bins = log_bin(h.raw, bin_ratio);
  return h;
}

double binned_exponent(std::span<const LogBin> bins) {
  if (bins.size() < 2) throw Error("need at least two occupied bins for a slope");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(bins.size());
  for (const auto& b : bins) {
    double x = 0.5 * (std::log(b.lo) + std::log(b.hi));
    double y = std::log(b.density);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw Error("degenerate bins");
  return -(n * sxy - sx * sy) / denom;
}

// ---------------------------------------------------------------------------

UndirectedAdjacency undirected_view(const Digraph& g) {
  UndirectedAdjacency adj;
  const NodeIndex n = g.node_count();
  adj.offsets.assign(std::size_t(n) + 1, 0);
  adj.neighbors.reserve(2 * g.edge_count());
  std::vector<NodeIndex> scratch;
  for (NodeIndex v = 0; v < n; ++v) {
    // Both lists are sorted; merge and drop the duplicates of reciprocal pairs.
    auto out = g.successors(v);
    auto in = g.predecessors(v);
    scratch.clear();
    std::set_union(out.begin(), out.end(), in.begin(), in.end(), std::back_inserter(scratch));
    adj.neighbors.insert(adj.neighbors.end(), scratch.begin(), scratch.end());
    adj.offsets[v + 1] = adj.neighbors.size();
  }
  return adj;
}

std::vector<std::uint64_t> triangles_per_node(const UndirectedAdjacency& adj) {
  const auto n = static_cast<NodeIndex>(adj.offsets.size() - 1);
  // Orient each edge from lower to higher (degree, index) rank; every triangle
  // is then found exactly once from its lowest-ranked corner.
  auto before = [&](NodeIndex a, NodeIndex b) {
    auto da = adj.degree(a), db = adj.degree(b);
    return da != db ? da < db : a < b;
  };
  std::vector<std::uint64_t> tri(n, 0);
  std::vector<char> mark(n, 0);
  std::vector<NodeIndex> higher_u;
  for (NodeIndex u = 0; u < n; ++u) {
    higher_u.clear();
    for (NodeIndex v : adj.of(u)) {
      if (before(u, v)) {
        higher_u.push_back(v);
        mark[v] = 1;
      }
    }
    for (NodeIndex v : higher_u) {
      for (NodeIndex w : adj.of(v)) {
        if (mark[w] && before(v, w)) {
          ++tri[u];
          ++tri[v];
          ++tri[w];
        }
      }
    }
    for (NodeIndex v : higher_u) mark[v] = 0;
  }
  return tri;
}

namespace {

StatCurve average_by_degree(const UndirectedAdjacency& adj, const std::vector<double>& value) {
  std::map<std::uint32_t, std::pair<double, std::size_t>> acc;
  for (NodeIndex v = 0; v + 1 < adj.offsets.size(); ++v) {
    auto k = adj.degree(v);
    if (k == 0) continue;
    auto& slot = acc[k];
    slot.first += value[v];
    ++slot.second;
  }
  StatCurve curve;
  for (auto& [k, s] : acc) curve[k] = {s.first / double(s.second), s.second};
  return curve;
}

}  // namespace

StatCurve clustering_by_degree(const Digraph& g) {
  auto adj = undirected_view(g);
  auto tri = triangles_per_node(adj);
  std::vector<double> c(g.node_count(), 0.0);
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    double k = adj.degree(v);
    if (k >= 2) c[v] = 2.0 * double(tri[v]) / (k * (k - 1.0));
  }
  return average_by_degree(adj, c);
}

StatCurve knn_by_degree(const Digraph& g) {
  auto adj = undirected_view(g);
  std::vector<double> knn(g.node_count(), 0.0);
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    auto nb = adj.of(v);
    if (nb.empty()) continue;
    std::uint64_t sum = 0;
    for (NodeIndex w : nb) sum += adj.degree(w);
    knn[v] = double(sum) / double(nb.size());
  }
  return average_by_degree(adj, knn);
}

}  // namespace ownet
