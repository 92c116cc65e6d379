#include "ownet/components.hpp"

#include <algorithm>
#include <numeric>

#include "ownet/error.hpp"

namespace ownet {

namespace {

constexpr std::uint32_t kUnset = std::uint32_t(-1);

// Relabels arbitrary component representatives so ids follow the smallest
// node index of each component.
ComponentLabeling canonicalize(std::vector<std::uint32_t> raw) {
  ComponentLabeling out;
  std::vector<std::uint32_t> remap(raw.size(), kUnset);
  out.label.resize(raw.size());
  for (std::size_t v = 0; v < raw.size(); ++v) {
    auto& id = remap[raw[v]];
    if (id == kUnset) {
      id = static_cast<std::uint32_t>(out.sizes.size());
      out.sizes.push_back(0);
    }
    out.label[v] = id;
    ++out.sizes[id];
  }
  for (std::uint32_t c = 1; c < out.sizes.size(); ++c) {
    if (out.sizes[c] > out.sizes[out.largest]) out.largest = c;
  }
  return out;
}

}  // namespace

ComponentLabeling weak_components(const Digraph& g) {
  const NodeIndex n = g.node_count();
  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (NodeIndex u = 0; u < n; ++u) {
    for (NodeIndex v : g.successors(u)) {
      auto a = find(u), b = find(v);
      if (a == b) continue;
      if (a < b) parent[b] = a;
      else parent[a] = b;
    }
  }
  std::vector<std::uint32_t> raw(n);
  for (NodeIndex v = 0; v < n; ++v) raw[v] = find(v);
  return canonicalize(std::move(raw));
}

ComponentLabeling strong_components(const Digraph& g) {
  const NodeIndex n = g.node_count();
  std::vector<std::uint32_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<NodeIndex> stack;
  struct Frame {
    NodeIndex v;
    std::uint32_t next;  // position in successors(v)
  };
  std::vector<Frame> call;
  std::uint32_t counter = 0;
  std::vector<bool> on_stack(n, false);

  for (NodeIndex root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& frame = call.back();
      const NodeIndex v = frame.v;
      auto succ = g.successors(v);
      if (frame.next < succ.size()) {
        NodeIndex w = succ[frame.next++];
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        NodeIndex w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = v;
        } while (w != v);
      }
      call.pop_back();
      if (!call.empty()) {
        NodeIndex parent = call.back().v;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return canonicalize(std::move(comp));
}

const char* region_name(Region r) {
  switch (r) {
    case Region::GSCC: return "GSCC";
    case Region::IN: return "IN";
    case Region::OUT: return "OUT";
    case Region::TE: return "TE";
    case Region::REST: return "REST";
  }
  return "?";
}

std::size_t BowTie::count(Region r) const {
  switch (r) {
    case Region::GSCC: return gscc;
    case Region::IN: return in;
    case Region::OUT: return out;
    case Region::TE: return te;
    case Region::REST: return region.size() - gwcc_size();
  }
  return 0;
}

BowTie bowtie_decompose(const Digraph& g) {
  if (g.node_count() == 0) throw Error("bow-tie decomposition of an empty graph");
  const NodeIndex n = g.node_count();
  auto weak = weak_components(g);
  auto strong = strong_components(g);

  // Largest SCC inside the GWCC (not necessarily the globally largest one).
  std::uint32_t gscc_id = kUnset;
  for (NodeIndex v = 0; v < n; ++v) {
    if (weak.label[v] != weak.largest) continue;
    auto c = strong.label[v];
    if (gscc_id == kUnset || strong.sizes[c] > strong.sizes[gscc_id]) gscc_id = c;
  }

  BowTie bt;
  bt.region.assign(n, Region::REST);
  std::vector<NodeIndex> queue;
  std::vector<char> fwd(n, 0), bwd(n, 0);
  for (NodeIndex v = 0; v < n; ++v) {
    if (strong.label[v] == gscc_id) {
      fwd[v] = bwd[v] = 1;
      queue.push_back(v);
    }
  }
  auto sweep = [&](std::vector<char>& seen, bool forward) {
    std::vector<NodeIndex> q = queue;
    for (std::size_t head = 0; head < q.size(); ++head) {
      NodeIndex v = q[head];
      auto nbrs = forward ? g.successors(v) : g.predecessors(v);
      for (NodeIndex w : nbrs) {
        if (!seen[w]) {
          seen[w] = 1;
          q.push_back(w);
        }
      }
    }
  };
  sweep(fwd, true);
  sweep(bwd, false);

  for (NodeIndex v = 0; v < n; ++v) {
    if (weak.label[v] != weak.largest) continue;
    if (strong.label[v] == gscc_id) {
      bt.region[v] = Region::GSCC;
      ++bt.gscc;
    } else if (bwd[v]) {
      bt.region[v] = Region::IN;
      ++bt.in;
    } else if (fwd[v]) {
      bt.region[v] = Region::OUT;
      ++bt.out;
    } else {
      bt.region[v] = Region::TE;
      ++bt.te;
    }
  }
  return bt;
}

std::string format_ratio(std::size_t count, std::size_t total) {
  if (total == 0) throw Error("format_ratio: zero total");
  // thousandths of a percent, half-up: floor((2 * count * 1e5 + total) / (2 * total))
  unsigned __int128 num = static_cast<unsigned __int128>(count) * 200000u + total;
  auto milli = static_cast<std::uint64_t>(num / (static_cast<unsigned __int128>(total) * 2));
  std::string frac = std::to_string(milli % 1000);
  frac.insert(0, 3 - frac.size(), '0');
  return std::to_string(milli / 1000) + "." + frac;
}

std::map<std::size_t, std::size_t> component_size_histogram(const ComponentLabeling& labeling,
                                                            bool exclude_largest) {
  std::map<std::size_t, std::size_t> hist;
  for (std::uint32_t c = 0; c < labeling.sizes.size(); ++c) {
    if (exclude_largest && c == labeling.largest) continue;
    ++hist[labeling.sizes[c]];
  }
  return hist;
}

double DistanceHistogram::ratio(std::uint32_t d) const {
  auto it = counts.find(d);
  if (it == counts.end() || total == 0) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(total);
}

DistanceHistogram distance_distribution(const Digraph& g, const BowTie& bowtie, DistanceDirection direction,
                                        bool reverse_orientation) {
  const NodeIndex n = g.node_count();
  if (bowtie.region.size() != n) throw Error("bow-tie was computed on a different graph");
  const Region target = direction == DistanceDirection::InToGscc ? Region::IN : Region::OUT;
  // IN nodes reach the GSCC along edges, so distances come from walking
  // predecessors out of the GSCC; OUT nodes are reached along successors.
  bool walk_forward = direction == DistanceDirection::GsccToOut;
  if (reverse_orientation) walk_forward = !walk_forward;

  std::vector<std::uint32_t> dist(n, kUnset);
  std::vector<NodeIndex> frontier, next;
  for (NodeIndex v = 0; v < n; ++v) {
    if (bowtie.region[v] == Region::GSCC) {
      dist[v] = 0;
      frontier.push_back(v);
    }
  }
  for (std::uint32_t level = 1; !frontier.empty(); ++level) {
    next.clear();
    for (NodeIndex v : frontier) {
      for (NodeIndex w : walk_forward ? g.successors(v) : g.predecessors(v)) {
        if (dist[w] == kUnset && bowtie.region[w] == target) {
          dist[w] = level;
          next.push_back(w);
        }
      }
    }
    frontier.swap(next);
  }

  DistanceHistogram hist{direction, {}, 0};
  for (NodeIndex v = 0; v < n; ++v) {
    if (bowtie.region[v] != target) continue;
    ++hist.total;
    if (dist[v] != kUnset) ++hist.counts[dist[v]];
  }
  return hist;
}

DistanceDirection parse_direction(const std::string& text) {
  if (text == "in") return DistanceDirection::InToGscc;
  if (text == "out") return DistanceDirection::GsccToOut;
  throw Error("invalid distance direction `" + text + "` (want in|out)");
}

}  // namespace ownet
