#include "ownet/pipeline.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ownet/csv.hpp"
#include "ownet/error.hpp"
#include "ownet/hash.hpp"
#include "ownet/netstats.hpp"

namespace fs = std::filesystem;

namespace ownet {

namespace {

using nlohmann::ordered_json;

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const ordered_json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

std::string fmt(double v) { return csv::format_double(v); }

void write_tally_csv(const fs::path& path, const std::string& key_name, const std::vector<TallyRow>& rows) {
  auto out = open_out(path);
  csv::write_row(out, {key_name, "count", "pct"});
  for (const auto& r : rows) csv::write_row(out, {r.key, std::to_string(r.count), fmt(r.pct)});
}

const char* role_slug(Role r) {
  switch (r) {
    case Role::Holding: return "holding";
    case Role::HoldingAndConduit: return "hc";
    case Role::Conduit: return "conduit";
    case Role::None: return "none";
  }
  return "?";
}

std::string safe_file_name(const std::string& name) {
  std::string out;
  for (char c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
              c == '.';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

ordered_json regression_json(const RegressionResult& r) {
  ordered_json j;
  j["n"] = r.n;
  j["intercept"] = number_or_null(r.intercept);
  j["slope"] = number_or_null(r.slope);
  j["se_intercept"] = number_or_null(r.se_intercept);
  j["se_slope"] = number_or_null(r.se_slope);
  j["t_intercept"] = number_or_null(r.t_intercept);
  j["t_slope"] = number_or_null(r.t_slope);
  j["p_intercept"] = number_or_null(r.p_intercept);
  j["p_slope"] = number_or_null(r.p_slope);
  j["r_squared"] = number_or_null(r.r_squared);
  j["adjusted_r_squared"] = number_or_null(r.adjusted_r_squared);
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("config " + path + ": " + e.what());
  }
  RunConfig c;
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (base / p).lexically_normal().string();
  };
  try {
    auto str = [&](const char* key, std::string& field, bool is_path) {
      if (j.contains(key)) field = is_path ? resolve(j.at(key).get<std::string>()) : j.at(key).get<std::string>();
    };
    str("nodes", c.nodes, true);
    str("edges", c.edges, true);
    str("hqs", c.hqs, true);
    str("profiles", c.profiles, true);
    str("edge_values", c.edge_values, true);
    str("out_dir", c.out_dir, true);
    str("cache", c.cache_path, true);
    if (j.contains("rebuild_cache")) c.rebuild_cache = j["rebuild_cache"].get<bool>();
    if (j.contains("threshold")) c.threshold = j["threshold"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j["threads"].get<unsigned>();
    if (j.contains("communities_full_graph")) c.communities_full_graph = j["communities_full_graph"].get<bool>();
    if (j.contains("global_degrees") && j["global_degrees"].get<bool>()) c.degree_scope = DegreeScope::Global;
    if (j.contains("bin_ratio")) c.bin_ratio = j["bin_ratio"].get<double>();
    if (j.contains("top_k")) c.top_k = j["top_k"].get<std::size_t>();
    if (j.contains("reverse_distances")) c.reverse_distances = j["reverse_distances"].get<bool>();
    if (j.contains("stages")) {
      const auto& s = j["stages"];
      auto flag = [&](const char* key, bool& field) {
        if (s.contains(key)) field = s.at(key).get<bool>();
      };
      flag("bowtie", c.stages.bowtie);
      flag("stats", c.stages.stats);
      flag("communities", c.stages.communities);
      flag("extract", c.stages.extract);
      flag("identify", c.stages.identify);
      flag("jurisdiction", c.stages.jurisdiction);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("config " + path + ": " + e.what());
  }
  return c;
}

void validate_config(const RunConfig& c) {
  auto need = [](const std::string& path, const char* what) {
    if (path.empty()) throw Error(std::string("missing input: no ") + what + " file configured");
    if (!fs::exists(path)) throw Error(std::string("missing input: ") + what + " file " + path + " does not exist");
  };
  const bool have_cache = !c.rebuild_cache && !c.cache_path.empty() && fs::exists(c.cache_path);
  if (!have_cache) {
    need(c.nodes, "nodes");
    need(c.edges, "edges");
  }
  if (c.stages.extract || c.stages.identify || c.stages.jurisdiction) need(c.hqs, "hqs");
  if (c.stages.jurisdiction) need(c.profiles, "profiles");
  if (!c.edge_values.empty()) need(c.edge_values, "edge_values");
  if (!(c.threshold > 0.0 && c.threshold <= 100.0)) throw Error("threshold must lie in (0, 100]");
  if (c.stages.jurisdiction && !(c.stages.extract || c.stages.identify)) {
    throw Error("jurisdiction stage needs the identify stage");
  }
}

std::string default_cache_path(const std::string& out_dir) {
  if (const char* env = std::getenv("OWNET_CACHE_DIR"); env && *env) return (fs::path(env) / "graph.bin").string();
  return (fs::path(out_dir) / "cache" / "graph.bin").string();
}

// ---------------------------------------------------------------------------

std::string Manifest::to_json() const {
  ordered_json j;
  j["format"] = "ownet-manifest/1";
  j["ok"] = ok;
  j["stages"] = ordered_json::array();
  for (const auto& s : stages) {
    ordered_json st;
    st["name"] = s.name;
    st["status"] = s.status;
    if (!s.error.empty()) st["error"] = s.error;
    st["artifacts"] = ordered_json::array();
    for (const auto& a : s.artifacts) st["artifacts"].push_back({{"path", a.path}, {"sha256", a.sha256}});
    j["stages"].push_back(st);
  }
  return j.dump(2) + "\n";
}

Manifest Manifest::from_json(const std::string& text) {
  Manifest m;
  try {
    auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "ownet-manifest/1") throw Error("unsupported manifest format");
    m.ok = j.at("ok").get<bool>();
    for (const auto& st : j.at("stages")) {
      StageEntry s;
      s.name = st.at("name").get<std::string>();
      s.status = st.at("status").get<std::string>();
      if (st.contains("error")) s.error = st["error"].get<std::string>();
      for (const auto& a : st.at("artifacts")) {
        s.artifacts.push_back({a.at("path").get<std::string>(), a.at("sha256").get<std::string>()});
      }
      m.stages.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("corrupt manifest: ") + e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------

OwnershipGraph load_or_build_graph(const std::string& nodes, const std::string& edges, const std::string& cache_path,
                                   bool rebuild) {
  if (!rebuild && !cache_path.empty() && fs::exists(cache_path)) return load_graph_cache(cache_path);
  auto node_records = load_nodes(nodes);
  auto edge_list = load_edges(edges);
  auto graph = OwnershipGraph::build(std::move(node_records), edge_list.edges, edge_list.stats);
  if (!cache_path.empty()) {
    if (fs::path(cache_path).has_parent_path()) fs::create_directories(fs::path(cache_path).parent_path());
    save_graph_cache(graph, cache_path);
  }
  return graph;
}

std::vector<std::string> write_ingest_summary(const OwnershipGraph& graph, const std::string& dir) {
  ordered_json j;
  j["nodes"] = graph.node_count();
  j["edges"] = graph.edge_count();
  j["self_loops_dropped"] = graph.load_stats().self_loops;
  j["blank_pct_rows"] = graph.load_stats().blank_pct;
  j["duplicate_edges_merged"] = graph.merged_duplicates();
  j["mean_degree"] = graph.node_count() ? double(graph.edge_count()) / double(graph.node_count()) : 0.0;
  j["reciprocal_link_ratio"] = reciprocal_link_ratio(graph.topology());
  const auto view = substantial_view(graph);
  j["substantial_edges"] = view.edge_count();
  j["non_substantial_edges"] = view.dropped_edges();
  write_json(fs::path(dir) / "ingest.json", j);

  // dense index -> node id, for joining outputs
  auto out = open_out(fs::path(dir) / "node_index.csv");
  csv::write_row(out, {"index", "node_id"});
  for (NodeIndex v = 0; v < graph.node_count(); ++v) csv::write_row(out, {std::to_string(v), graph.node(v).id});
  return {"ingest.json", "node_index.csv"};
}

void write_distance_csv(const DistanceHistogram& hist, const std::string& path) {
  auto out = open_out(path);
  csv::write_row(out, {"distance", "count", "ratio"});
  for (auto [d, c] : hist.counts) csv::write_row(out, {std::to_string(d), std::to_string(c), fmt(hist.ratio(d))});
}

std::vector<std::string> write_bowtie(const OwnershipGraph& graph, const BowTie& bowtie, const std::string& dir,
                                      bool reverse_distances) {
  const fs::path base(dir);
  {
    auto out = open_out(base / "bowtie.csv");
    csv::write_row(out, {"node_id", "region"});
    for (NodeIndex v = 0; v < graph.node_count(); ++v) {
      csv::write_row(out, {graph.node(v).id, region_name(bowtie.region[v])});
    }
  }
  {
    auto out = open_out(base / "table2.csv");
    csv::write_row(out, {"component", "count", "ratio"});
    const auto total = bowtie.gwcc_size();
    for (auto r : {Region::GSCC, Region::IN, Region::OUT, Region::TE}) {
      csv::write_row(out, {region_name(r), std::to_string(bowtie.count(r)), format_ratio(bowtie.count(r), total)});
    }
  }
  write_distance_csv(distance_distribution(graph.topology(), bowtie, DistanceDirection::InToGscc, reverse_distances),
                     (base / "distances_in.csv").string());
  write_distance_csv(distance_distribution(graph.topology(), bowtie, DistanceDirection::GsccToOut, reverse_distances),
                     (base / "distances_out.csv").string());
  {
    auto weak = weak_components(graph.topology());
    auto out = open_out(base / "nx.csv");
    csv::write_row(out, {"size", "count"});
    for (auto [size, count] : component_size_histogram(weak, true)) {
      csv::write_row(out, {std::to_string(size), std::to_string(count)});
    }
    ordered_json j;
    j["weak_components"] = weak.component_count();
    j["gwcc_nodes"] = weak.sizes.empty() ? 0 : weak.sizes[weak.largest];
    j["gwcc_share_pct"] = graph.node_count() ? format_ratio(weak.sizes[weak.largest], graph.node_count()) : "0.000";
    write_json(base / "components.json", j);
  }
  return {"bowtie.csv", "table2.csv", "distances_in.csv", "distances_out.csv", "nx.csv", "components.json"};
}

std::vector<std::string> write_stats(const OwnershipGraph& graph, const std::string& dir, double bin_ratio) {
  const fs::path base(dir);
  const auto& g = graph.topology();
  ordered_json fits;
  for (auto [direction, file] : {std::pair{DegreeDirection::In, "pk_in.csv"}, {DegreeDirection::Out, "pk_out.csv"}}) {
    auto hist = degree_histogram(g, direction, bin_ratio);
    auto out = open_out(base / file);
    csv::write_row(out, {"bin_lo", "bin_hi", "count", "density"});
    for (const auto& b : hist.bins) csv::write_row(out, {fmt(b.lo), fmt(b.hi), std::to_string(b.count), fmt(b.density)});
    ordered_json f;
    try {
      auto samples = degree_samples(g, direction);
      auto fit = fit_power_law(samples);
      f["gamma"] = fit.gamma;
      f["x_min"] = fit.x_min;
      f["n"] = fit.n;
      f["ks_distance"] = fit.ks_distance;
      f["log_likelihood"] = fit.log_likelihood;
    } catch (const Error& e) {
      f["error"] = e.what();
    }
    try {
      f["binned_exponent"] = binned_exponent(hist.bins);
    } catch (const Error&) {
      f["binned_exponent"] = nullptr;
    }
    fits[direction_name(direction)] = f;
  }
  write_json(base / "fits.json", fits);
  for (auto [curve, file, column] : {std::tuple{clustering_by_degree(g), "ck.csv", "clustering"},
                                     std::tuple{knn_by_degree(g), "knn.csv", "knn"}}) {
    auto out = open_out(base / file);
    csv::write_row(out, {"k", column, "nodes"});
    for (const auto& [k, p] : curve) csv::write_row(out, {std::to_string(k), fmt(p.mean), std::to_string(p.count)});
  }
  return {"pk_in.csv", "pk_out.csv", "fits.json", "ck.csv", "knn.csv"};
}

std::vector<std::string> write_communities(const OwnershipGraph& graph, const std::string& dir, std::uint64_t seed,
                                           bool full_graph) {
  const fs::path base(dir);
  std::vector<NodeIndex> members;
  if (full_graph) {
    members.resize(graph.node_count());
    for (NodeIndex v = 0; v < graph.node_count(); ++v) members[v] = v;
  } else {
    auto weak = weak_components(graph.topology());
    for (NodeIndex v = 0; v < graph.node_count(); ++v) {
      if (weak.label[v] == weak.largest) members.push_back(v);
    }
  }
  auto sub = induced_subgraph(graph, members);
  CommunityOptions opts;
  opts.seed = seed;
  auto partition = detect_communities(sub.topology(), opts);
  {
    auto out = open_out(base / "communities.csv");
    csv::write_row(out, {"node_id", "community_id"});
    for (NodeIndex v = 0; v < sub.node_count(); ++v) {
      csv::write_row(out, {sub.node(v).id, std::to_string(partition.module[v])});
    }
  }
  auto hist = community_size_histogram(partition);
  {
    auto out = open_out(base / "dsizes.csv");
    csv::write_row(out, {"size", "count", "density"});
    const double total = double(partition.module_count);
    for (auto [size, count] : hist) csv::write_row(out, {std::to_string(size), std::to_string(count), fmt(count / total)});
  }
  ordered_json j;
  j["scope"] = full_graph ? "full" : "gwcc";
  j["nodes"] = sub.node_count();
  j["communities"] = partition.module_count;
  j["codelength_bits"] = partition.codelength;
  if (sub.node_count() > 0) {
    auto flow = stationary_flow(sub.topology());
    j["one_module_codelength_bits"] = flow_entropy(flow);
  }
  std::vector<std::uint64_t> sizes;
  for (auto [size, count] : hist) sizes.insert(sizes.end(), count, size);
  try {
    auto fit = fit_power_law(sizes);
    j["size_exponent"] = fit.gamma;
    j["size_x_min"] = fit.x_min;
  } catch (const Error&) {
    j["size_exponent"] = nullptr;
  }
  write_json(base / "communities.json", j);
  return {"communities.csv", "dsizes.csv", "communities.json"};
}

std::vector<std::string> write_extract(const OwnershipGraph& graph, const Classification& c, const std::string& dir) {
  std::vector<std::string> written;
  ordered_json j = ordered_json::array();
  for (const auto& m : c.mncs) {
    ordered_json e;
    e["mnc"] = m.entry.mnc_name;
    e["hq"] = m.entry.hq_id;
    if (m.error) {
      e["error"] = *m.error;
      j.push_back(e);
      continue;
    }
    const std::string rel = "mnc/" + safe_file_name(m.entry.mnc_name) + ".csv";
    auto out = open_out(fs::path(dir) / rel);
    csv::write_row(out, {"node_id", "layer", "k_in", "k_out"});
    const auto& t = m.subtree;
    for (std::size_t i = 0; i < t.size(); ++i) {
      csv::write_row(out, {graph.node(t.affiliates[i]).id, std::to_string(t.layer[i]), std::to_string(t.k_in[i]),
                           std::to_string(t.k_out[i])});
    }
    e["affiliates"] = t.size();
    e["sum_k_in"] = t.sum_k_in;
    e["sum_k_total"] = t.sum_k_total;
    e["sum_k_product"] = t.sum_k_product;
    j.push_back(e);
    written.push_back(rel);
  }
  write_json(fs::path(dir) / "mnc.json", j);
  written.push_back("mnc.json");
  return written;
}

std::vector<std::string> write_identify(const OwnershipGraph& graph, const Classification& c, const std::string& dir) {
  {
    auto out = open_out(fs::path(dir) / "keyfirms.csv");
    write_keyfirms_csv(out, keyfirm_rows(c, graph));
  }
  ordered_json j;
  j["mncs"] = c.mncs.size();
  j["failed"] = c.failed;
  j["holding"] = c.total.holding;
  j["holding_and_conduit"] = c.total.holding_and_conduit;
  j["conduit"] = c.total.conduit;
  j["per_mnc"] = ordered_json::array();
  for (const auto& m : c.mncs) {
    ordered_json e;
    e["mnc"] = m.entry.mnc_name;
    if (m.error) e["error"] = *m.error;
    e["affiliates"] = m.subtree.size();
    e["holding"] = m.tally.holding;
    e["holding_and_conduit"] = m.tally.holding_and_conduit;
    e["conduit"] = m.tally.conduit;
    j["per_mnc"].push_back(e);
  }
  write_json(fs::path(dir) / "identify.json", j);
  return {"keyfirms.csv", "identify.json"};
}

HqLookup make_hq_lookup(const std::vector<HqEntry>& hqs) {
  HqLookup out;
  for (const auto& h : hqs) out[h.mnc_name] = h.hq_id;
  return out;
}

std::vector<std::string> write_jurisdiction(const SubstantialView& view, const std::vector<KeyFirmRow>& rows,
                                            const std::map<std::string, JurisdictionProfile>& profiles,
                                            const HqLookup* hqs, const BowTie* bowtie, const EdgeValues* values,
                                            const std::string& dir, std::size_t top_k) {
  const auto& graph = view.graph();
  const fs::path base(dir);
  std::vector<std::string> written;
  ordered_json summary;
  summary["flow_mode"] = values ? "value" : "link_count";
  {
    std::set<int> years;
    for (const auto& [code, p] : profiles) {
      if (p.gdp_year) years.insert(*p.gdp_year);
    }
    summary["gdp_years"] = years;
  }

  // Jurisdiction centralities.
  auto flows = cross_border_flows(view, values);
  std::set<std::string> sinks;
  {
    auto out = open_out(base / "sink.csv");
    csv::write_row(out, {"code", "v_in", "v_out", "sink_centrality", "sink"});
    try {
      auto report = sink_centrality(flows, profiles);
      for (const auto& s : report.scores) {
        const auto& f = flows.at(s.code);
        csv::write_row(out, {s.code, fmt(f.in), fmt(f.out), fmt(s.value), s.flagged ? "1" : "0"});
        if (s.flagged) sinks.insert(s.code);
      }
      summary["sink_skipped_no_gdp"] = report.skipped;
    } catch (const Error& e) {
      summary["sink_error"] = e.what();
    }
  }
  written.push_back("sink.csv");
  add_pass_flows(view, sinks, flows, values);
  {
    auto out = open_out(base / "conduit.csv");
    csv::write_row(out, {"code", "v_pass", "conduit_centrality", "conduit"});
    try {
      auto report = conduit_outward_centrality(flows, profiles);
      for (const auto& s : report.scores) {
        csv::write_row(out, {s.code, fmt(flows.at(s.code).pass), fmt(s.value), s.flagged ? "1" : "0"});
      }
      summary["conduit_skipped_no_gdp"] = report.skipped;
    } catch (const Error& e) {
      summary["conduit_error"] = e.what();
    }
  }
  written.push_back("conduit.csv");

  // Tallies by jurisdiction and bow-tie region.
  for (auto d : {TallyDimension::Hq, TallyDimension::Holding, TallyDimension::HoldingAndConduit,
                 TallyDimension::Conduit, TallyDimension::Affiliates}) {
    if (d == TallyDimension::Hq && !hqs) continue;
    const std::string rel = std::string("tallies/") + dimension_name(d) + ".csv";
    write_tally_csv(base / rel, "jurisdiction", tally_by_jurisdiction(rows, graph, d, hqs));
    written.push_back(rel);
    if (bowtie) {
      auto counts = tally_by_bowtie(rows, graph, *bowtie, d, hqs);
      std::size_t total = 0;
      for (auto [r, c] : counts) total += c;
      const std::string brel = std::string("tallies/bowtie_") + dimension_name(d) + ".csv";
      auto out = open_out(base / brel);
      csv::write_row(out, {"region", "count", "pct"});
      for (auto [r, c] : counts) {
        csv::write_row(out, {region_name(r), std::to_string(c), fmt(total ? 100.0 * double(c) / double(total) : 0.0)});
      }
      written.push_back(brel);
    }
  }
  if (hqs) {
    auto tables = hq_tables(rows, graph, *hqs, top_k);
    {
      auto out = open_out(base / "tallies/hq_by_role.csv");
      csv::write_row(out, {"role", "hq_jurisdiction", "count", "pct"});
      for (const auto& [role, list] : tables.by_role) {
        for (const auto& r : list) csv::write_row(out, {role_slug(role), r.key, std::to_string(r.count), fmt(r.pct)});
      }
    }
    {
      auto out = open_out(base / "tallies/hq_breakdown.csv");
      csv::write_row(out, {"hq_jurisdiction", "role", "jurisdiction", "count", "pct"});
      for (const auto& b : tables.breakdowns) {
        for (const auto& [role, list] : b.locations) {
          for (const auto& r : list) {
            csv::write_row(out, {b.hq_jurisdiction, role_slug(role), r.key, std::to_string(r.count), fmt(r.pct)});
          }
        }
      }
    }
    written.push_back("tallies/hq_by_role.csv");
    written.push_back("tallies/hq_breakdown.csv");
  }

  // Ownership chains around the leading key-firm jurisdictions.
  for (Role role : {Role::Holding, Role::HoldingAndConduit, Role::Conduit}) {
    auto dim = role == Role::Holding ? TallyDimension::Holding
               : role == Role::Conduit ? TallyDimension::Conduit
                                       : TallyDimension::HoldingAndConduit;
    auto top = tally_by_jurisdiction(rows, graph, dim);
    if (top.size() > top_k) top.resize(top_k);
    for (const auto& t : top) {
      auto chains = chain_tables(rows, view, role, t.key, top_k);
      const std::string rel = std::string("chains/") + role_slug(role) + "_" + safe_file_name(t.key) + ".csv";
      auto out = open_out(base / rel);
      csv::write_row(out, {"direction", "jurisdiction", "count", "pct"});
      for (const auto& r : chains.subsidiaries) csv::write_row(out, {"subsidiary", r.key, std::to_string(r.count), fmt(r.pct)});
      for (const auto& r : chains.shareholders) csv::write_row(out, {"shareholder", r.key, std::to_string(r.count), fmt(r.pct)});
      written.push_back(rel);
    }
  }

  // Key-firm counts against withholding-tax centrality.
  ordered_json reg;
  for (Role role : {Role::Holding, Role::HoldingAndConduit, Role::Conduit}) {
    try {
      reg[role_slug(role)] = regression_json(wtc_regression(rows, graph, profiles, role));
    } catch (const Error& e) {
      reg[role_slug(role)] = {{"error", e.what()}};
    }
  }
  write_json(base / "regression.json", reg);
  written.push_back("regression.json");
  write_json(base / "jurisdiction.json", summary);
  written.push_back("jurisdiction.json");
  return written;
}

// ---------------------------------------------------------------------------

PipelineResult run_pipeline(const RunConfig& config_in) {
  RunConfig config = config_in;
  if (config.cache_path.empty()) config.cache_path = default_cache_path(config.out_dir);
  PipelineResult result;
  const fs::path out(config.out_dir);
  fs::create_directories(out);

  auto finish = [&](int status) {
    result.exit_status = status;
    result.manifest.ok = status == 0;
    auto f = open_out(out / "manifest.json");
    f << result.manifest.to_json();
    return result;
  };

  try {
    validate_config(config);
  } catch (const Error& e) {
    result.manifest.stages.push_back({"validate", "failed", {}, e.what()});
    return finish(2);
  }

  auto record = [&](const std::string& name, const std::vector<std::string>& rel_paths, const fs::path& dir) {
    StageEntry s{name, "ok", {}, ""};
    for (const auto& rel : rel_paths) {
      const fs::path full = dir / rel;
      const std::string manifest_path = fs::relative(full, out).generic_string();
      s.artifacts.push_back({manifest_path, sha256_file(full.string())});
    }
    result.manifest.stages.push_back(std::move(s));
  };
  auto skipped = [&](const std::string& name) { result.manifest.stages.push_back({name, "skipped", {}, ""}); };

  std::string stage = "ingest";
  try {
    auto graph = load_or_build_graph(config.nodes, config.edges, config.cache_path, config.rebuild_cache);
    auto ingest = write_ingest_summary(graph, (out / "ingest").string());
    record("ingest", ingest, out / "ingest");

    std::optional<BowTie> bowtie;
    stage = "bowtie";
    if (config.stages.bowtie) {
      bowtie = bowtie_decompose(graph.topology());
      record(stage, write_bowtie(graph, *bowtie, (out / "bowtie").string(), config.reverse_distances), out / "bowtie");
    } else {
      skipped(stage);
    }

    stage = "stats";
    if (config.stages.stats) record(stage, write_stats(graph, (out / "stats").string(), config.bin_ratio), out / "stats");
    else skipped(stage);

    stage = "communities";
    if (config.stages.communities) {
      record(stage, write_communities(graph, (out / "communities").string(), config.seed, config.communities_full_graph),
             out / "communities");
    } else {
      skipped(stage);
    }

    const auto view = substantial_view(graph, config.threshold);
    std::optional<Classification> classification;
    std::vector<HqEntry> hqs;
    if (config.stages.extract || config.stages.identify || config.stages.jurisdiction) {
      hqs = load_hq_list(config.hqs);
      classification = classify_all(view, hqs, config.degree_scope, config.threads);
    }

    stage = "extract";
    if (config.stages.extract) record(stage, write_extract(graph, *classification, (out / "extract").string()), out / "extract");
    else skipped(stage);

    stage = "identify";
    if (config.stages.identify) {
      record(stage, write_identify(graph, *classification, (out / "identify").string()), out / "identify");
    } else {
      skipped(stage);
    }

    stage = "jurisdiction";
    if (config.stages.jurisdiction) {
      auto profiles = load_profiles(config.profiles);
      auto rows = keyfirm_rows(*classification, graph);
      auto lookup = make_hq_lookup(hqs);
      std::optional<EdgeValues> values;
      if (!config.edge_values.empty()) values = load_edge_values(config.edge_values, graph);
      record(stage,
             write_jurisdiction(view, rows, profiles, &lookup, bowtie ? &*bowtie : nullptr, values ? &*values : nullptr,
                                (out / "jurisdiction").string(), config.top_k),
             out / "jurisdiction");
    } else {
      skipped(stage);
    }
  } catch (const std::exception& e) {
    result.manifest.stages.push_back({stage, "failed", {}, e.what()});
    return finish(1);
  }
  return finish(0);
}

}  // namespace ownet
