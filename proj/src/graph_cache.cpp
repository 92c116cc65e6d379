#include <cstring>
#include <fstream>

#include "ownet/error.hpp"
#include "ownet/graph.hpp"

// Layout (little-endian host order):
//   magic "OWNETGC\0", u32 version, u64 node count, u64 edge count,
//   u64 self_loops, u64 blank_pct,
//   per node: str id, str jurisdiction, str industry, str name, u8 is_hq
//   per edge: u32 subsidiary, u32 shareholder, f64 pct
// where str = u32 length + bytes.

namespace ownet {

namespace {

constexpr char kMagic[8] = {'O', 'W', 'N', 'E', 'T', 'G', 'C', '\0'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_str(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error("truncated graph cache " + path);
  return v;
}

std::string get_str(std::istream& in, const std::string& path) {
  auto n = get<std::uint32_t>(in, path);
  std::string s(n, '\0');
  if (n && !in.read(s.data(), n)) throw Error("truncated graph cache " + path);
  return s;
}

}  // namespace

void save_graph_cache(const OwnershipGraph& graph, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kGraphCacheVersion);
  put<std::uint64_t>(out, graph.node_count());
  put<std::uint64_t>(out, graph.edge_count());
  put<std::uint64_t>(out, graph.load_stats().self_loops);
  put<std::uint64_t>(out, graph.load_stats().blank_pct);
  for (const auto& n : graph.nodes()) {
    put_str(out, n.id);
    put_str(out, n.jurisdiction);
    put_str(out, n.industry);
    put_str(out, n.name);
    put<std::uint8_t>(out, n.is_hq ? 1 : 0);
  }
  const auto& topo = graph.topology();
  for (NodeIndex u = 0; u < topo.node_count(); ++u) {
    auto succ = topo.successors(u);
    auto pcts = graph.out_pcts(u);
    for (std::size_t i = 0; i < succ.size(); ++i) {
      put<std::uint32_t>(out, u);
      put<std::uint32_t>(out, succ[i]);
      put<double>(out, pcts[i]);
    }
  }
  if (!out) throw Error("failed writing " + path);
}

OwnershipGraph load_graph_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open graph cache " + path);
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(path + " is not a graph cache");
  }
  auto version = get<std::uint32_t>(in, path);
  if (version != kGraphCacheVersion) {
    throw Error(path + ": cache version " + std::to_string(version) + " unsupported, rebuild it");
  }
  auto n = get<std::uint64_t>(in, path);
  auto m = get<std::uint64_t>(in, path);
  EdgeLoadStats stats;
  stats.self_loops = get<std::uint64_t>(in, path);
  stats.blank_pct = get<std::uint64_t>(in, path);
  std::vector<NodeRecord> nodes(n);
  for (auto& rec : nodes) {
    rec.id = get_str(in, path);
    rec.jurisdiction = get_str(in, path);
    rec.industry = get_str(in, path);
    rec.name = get_str(in, path);
    rec.is_hq = get<std::uint8_t>(in, path) != 0;
  }
  std::vector<OwnershipGraph::IndexedEdge> edges(m);
  for (auto& e : edges) {
    e.subsidiary = get<std::uint32_t>(in, path);
    e.shareholder = get<std::uint32_t>(in, path);
    e.pct = get<double>(in, path);
  }
  return OwnershipGraph::from_indexed(std::move(nodes), std::move(edges), stats);
}

}  // namespace ownet
