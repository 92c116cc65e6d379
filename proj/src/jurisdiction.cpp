#include "ownet/jurisdiction.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>

#include "ownet/csv.hpp"
#include "ownet/error.hpp"

namespace ownet {

namespace {

std::optional<double> parse_optional_double(const std::string& text, const std::string& file, std::size_t line) {
  if (text.empty()) return std::nullopt;
  double v;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(file, line, "invalid number `" + text + "`");
  }
  return v;
}

std::uint32_t parse_u32(const std::string& text, const std::string& file, std::size_t line) {
  std::uint32_t v;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(file, line, "invalid integer `" + text + "`");
  }
  return v;
}

std::vector<TallyRow> to_rows(const std::map<std::string, std::size_t>& counts, std::size_t top_k = 0) {
  std::size_t total = 0;
  for (const auto& [k, c] : counts) total += c;
  std::vector<TallyRow> rows;
  for (const auto& [k, c] : counts) rows.push_back({k, c, total ? 100.0 * double(c) / double(total) : 0.0});
  std::stable_sort(rows.begin(), rows.end(), [](const TallyRow& a, const TallyRow& b) { return a.count > b.count; });
  if (top_k && rows.size() > top_k) rows.resize(top_k);
  return rows;
}

bool selected(const KeyFirmRow& r, TallyDimension d) {
  switch (d) {
    case TallyDimension::Holding: return r.role == Role::Holding;
    case TallyDimension::HoldingAndConduit: return r.role == Role::HoldingAndConduit;
    case TallyDimension::Conduit: return r.role == Role::Conduit;
    case TallyDimension::Affiliates: return true;
    case TallyDimension::Hq: return false;
  }
  return false;
}

// Nodes selected by a tally dimension, one entry per (MNC, firm) pair or per MNC.
std::vector<NodeIndex> selected_nodes(const std::vector<KeyFirmRow>& rows, const OwnershipGraph& graph,
                                      TallyDimension dimension, const HqLookup* hqs) {
  std::vector<NodeIndex> nodes;
  if (dimension == TallyDimension::Hq) {
    if (!hqs) throw Error("headquarters tally needs the HQ list");
    std::set<std::string> mncs;
    for (const auto& r : rows) mncs.insert(r.mnc);
    for (const auto& m : mncs) {
      auto it = hqs->find(m);
      if (it == hqs->end()) throw Error("no headquarters listed for MNC `" + m + "`");
      nodes.push_back(graph.index_of(it->second));
    }
    return nodes;
  }
  for (const auto& r : rows) {
    if (selected(r, dimension)) nodes.push_back(graph.index_of(r.affiliate_id));
  }
  return nodes;
}

}  // namespace

std::map<std::string, JurisdictionProfile> load_profiles(const std::string& path) {
  auto table = csv::read_file(path, {"code", "gdp", "gdp_year", "statutory_rate", "wtc"});
  std::map<std::string, JurisdictionProfile> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.lines[r];
    JurisdictionProfile p;
    p.code = row[0];
    if (!is_valid_jurisdiction(p.code)) throw ParseError(path, line, "invalid jurisdiction `" + p.code + "`");
    p.gdp = parse_optional_double(row[1], path, line);
    if (p.gdp && !(*p.gdp > 0.0)) throw ParseError(path, line, "gdp must be positive");
    if (!row[2].empty()) p.gdp_year = static_cast<int>(parse_u32(row[2], path, line));
    p.statutory_rate = parse_optional_double(row[3], path, line);
    p.wtc = parse_optional_double(row[4], path, line);
    if (p.wtc && *p.wtc < 0.0) throw ParseError(path, line, "wtc must be nonnegative");
    if (!out.emplace(p.code, p).second) throw ParseError(path, line, "duplicate jurisdiction `" + p.code + "`");
  }
  return out;
}

EdgeValues load_edge_values(const std::string& path, const OwnershipGraph& graph) {
  auto table = csv::read_file(path, {"subsidiary_id", "shareholder_id", "value"});
  EdgeValues out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto v = parse_optional_double(row[2], path, table.lines[r]);
    if (!v || *v < 0.0) throw ParseError(path, table.lines[r], "value must be a nonnegative number");
    out[{graph.index_of(row[0]), graph.index_of(row[1])}] = *v;
  }
  return out;
}

FlowAggregate cross_border_flows(const SubstantialView& view, const EdgeValues* values) {
  const auto& g = view.graph();
  const auto& topo = view.topology();
  FlowAggregate flows;
  for (NodeIndex u = 0; u < topo.node_count(); ++u) {
    const auto& ju = g.node(u).jurisdiction;
    for (NodeIndex v : topo.successors(u)) {
      const auto& jv = g.node(v).jurisdiction;
      if (ju == jv) continue;
      double amount = 1.0;
      if (values) {
        auto it = values->find({u, v});
        amount = it == values->end() ? 0.0 : it->second;
      }
      flows[ju].out += amount;
      flows[jv].in += amount;
    }
  }
  return flows;
}

void add_pass_flows(const SubstantialView& view, const std::set<std::string>& sinks, FlowAggregate& flows,
                    const EdgeValues* values) {
  const auto& g = view.graph();
  const auto& topo = view.topology();
  auto value = [&](NodeIndex a, NodeIndex b) {
    if (!values) return 1.0;
    auto it = values->find({a, b});
    return it == values->end() ? 0.0 : it->second;
  };
  for (auto& [code, f] : flows) f.pass = 0.0;
  for (NodeIndex m = 0; m < topo.node_count(); ++m) {
    const auto& jm = g.node(m).jurisdiction;
    double pass = 0.0;
    if (!values) {
      std::size_t inbound = 0, to_sink = 0;
      for (NodeIndex x : topo.predecessors(m)) inbound += g.node(x).jurisdiction != jm;
      if (inbound == 0) continue;
      for (NodeIndex y : topo.successors(m)) {
        const auto& jy = g.node(y).jurisdiction;
        to_sink += jy != jm && sinks.contains(jy);
      }
      pass = double(inbound) * double(to_sink);
    } else {
      for (NodeIndex x : topo.predecessors(m)) {
        if (g.node(x).jurisdiction == jm) continue;
        for (NodeIndex y : topo.successors(m)) {
          const auto& jy = g.node(y).jurisdiction;
          if (jy != jm && sinks.contains(jy)) pass += std::min(value(x, m), value(m, y));
        }
      }
    }
    if (pass > 0.0) flows[jm].pass += pass;
  }
}

namespace {

double total_gdp(const std::map<std::string, JurisdictionProfile>& profiles) {
  double total = 0.0;
  for (const auto& [code, p] : profiles) {
    if (p.gdp) total += *p.gdp;
  }
  return total;
}

template <typename Numerator>
ScoreReport score(const FlowAggregate& flows, const std::map<std::string, JurisdictionProfile>& profiles,
                  double denominator, double threshold, Numerator numerator) {
  ScoreReport report;
  const double gdp_total = total_gdp(profiles);
  for (const auto& [code, f] : flows) {
    auto it = profiles.find(code);
    if (it == profiles.end() || !it->second.gdp) {
      report.skipped.push_back(code);
      continue;
    }
    const double s = numerator(f) / denominator * (gdp_total / *it->second.gdp);
    report.scores.push_back({code, s, s > threshold});
  }
  return report;
}

}  // namespace

ScoreReport sink_centrality(const FlowAggregate& flows, const std::map<std::string, JurisdictionProfile>& profiles) {
  double total_in = 0.0;
  for (const auto& [code, f] : flows) total_in += f.in;
  if (!(total_in > 0.0)) throw Error("sink centrality: no inbound capital flow");
  return score(flows, profiles, total_in, kSinkThreshold, [](const JurisdictionFlow& f) { return f.in - f.out; });
}

ScoreReport conduit_outward_centrality(const FlowAggregate& flows,
                                       const std::map<std::string, JurisdictionProfile>& profiles) {
  double total_pass = 0.0;
  for (const auto& [code, f] : flows) total_pass += f.pass;
  if (!(total_pass > 0.0)) throw Error("conduit centrality: no pass-through capital flow");
  return score(flows, profiles, total_pass, kConduitThreshold, [](const JurisdictionFlow& f) { return f.pass; });
}

// ---------------------------------------------------------------------------

std::vector<KeyFirmRow> keyfirm_rows(const Classification& c, const OwnershipGraph& graph) {
  std::vector<KeyFirmRow> rows;
  for (const auto& m : c.mncs) {
    for (const auto& r : m.records) {
      rows.push_back({m.entry.mnc_name, graph.node(r.affiliate).id, r.layer, r.k_in, r.k_out, r.holding, r.conduit,
                      r.third_country, r.role});
    }
  }
  return rows;
}

void write_keyfirms_csv(std::ostream& out, const std::vector<KeyFirmRow>& rows) {
  csv::write_row(out, {"mnc", "affiliate_id", "layer", "k_in", "k_out", "H", "T", "third_country", "role"});
  auto opt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
  for (const auto& r : rows) {
    csv::write_row(out, {r.mnc, r.affiliate_id, std::to_string(r.layer), std::to_string(r.k_in),
                         std::to_string(r.k_out), opt(r.holding), opt(r.conduit), r.third_country ? "1" : "0",
                         role_name(r.role)});
  }
}

std::vector<KeyFirmRow> load_keyfirms_csv(const std::string& path) {
  auto table =
      csv::read_file(path, {"mnc", "affiliate_id", "layer", "k_in", "k_out", "H", "T", "third_country", "role"});
  std::vector<KeyFirmRow> rows;
  rows.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto line = table.lines[i];
    KeyFirmRow r;
    r.mnc = row[0];
    r.affiliate_id = row[1];
    r.layer = parse_u32(row[2], path, line);
    r.k_in = parse_u32(row[3], path, line);
    r.k_out = parse_u32(row[4], path, line);
    r.holding = parse_optional_double(row[5], path, line);
    r.conduit = parse_optional_double(row[6], path, line);
    if (row[7] != "0" && row[7] != "1") throw ParseError(path, line, "third_country must be 0 or 1");
    r.third_country = row[7] == "1";
    try {
      r.role = parse_role(row[8]);
    } catch (const Error& e) {
      throw ParseError(path, line, e.what());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

const char* dimension_name(TallyDimension d) {
  switch (d) {
    case TallyDimension::Hq: return "hq";
    case TallyDimension::Holding: return "holding";
    case TallyDimension::HoldingAndConduit: return "hc";
    case TallyDimension::Conduit: return "conduit";
    case TallyDimension::Affiliates: return "affiliates";
  }
  return "?";
}

TallyDimension parse_dimension(std::string_view text) {
  for (auto d : {TallyDimension::Hq, TallyDimension::Holding, TallyDimension::HoldingAndConduit,
                 TallyDimension::Conduit, TallyDimension::Affiliates}) {
    if (text == dimension_name(d)) return d;
  }
  throw Error("unknown tally dimension `" + std::string(text) + "`");
}

std::vector<TallyRow> tally_by_jurisdiction(const std::vector<KeyFirmRow>& rows, const OwnershipGraph& graph,
                                            TallyDimension dimension, const HqLookup* hqs) {
  std::map<std::string, std::size_t> counts;
  for (NodeIndex v : selected_nodes(rows, graph, dimension, hqs)) ++counts[graph.node(v).jurisdiction];
  return to_rows(counts);
}

std::map<Region, std::size_t> tally_by_bowtie(const std::vector<KeyFirmRow>& rows, const OwnershipGraph& graph,
                                              const BowTie& bowtie, TallyDimension dimension,
                                              const HqLookup* hqs) {
  if (bowtie.region.size() != graph.node_count()) throw Error("bow-tie was computed on a different graph");
  std::map<Region, std::size_t> counts;
  for (auto r : {Region::GSCC, Region::IN, Region::OUT, Region::TE, Region::REST}) counts[r] = 0;
  for (NodeIndex v : selected_nodes(rows, graph, dimension, hqs)) ++counts[bowtie.region[v]];
  return counts;
}

ChainTables chain_tables(const std::vector<KeyFirmRow>& rows, const SubstantialView& view, Role role,
                         const std::string& jurisdiction, std::size_t top_k) {
  if (role == Role::None) throw Error("chain tables need a key-company role");
  const auto& g = view.graph();
  std::set<NodeIndex> firms;
  for (const auto& r : rows) {
    if (r.role != role) continue;
    NodeIndex v = g.index_of(r.affiliate_id);
    if (g.node(v).jurisdiction == jurisdiction) firms.insert(v);
  }
  std::map<std::string, std::size_t> subs, holders;
  for (NodeIndex v : firms) {
    for (NodeIndex s : view.topology().predecessors(v)) ++subs[g.node(s).jurisdiction];
    for (NodeIndex h : view.topology().successors(v)) ++holders[g.node(h).jurisdiction];
  }
  return {to_rows(subs, top_k), to_rows(holders, top_k)};
}

HqTables hq_tables(const std::vector<KeyFirmRow>& rows, const OwnershipGraph& graph, const HqLookup& hqs,
                   std::size_t top_k) {
  const Role roles[] = {Role::Holding, Role::HoldingAndConduit, Role::Conduit};
  std::map<Role, std::map<std::string, std::size_t>> per_role;
  std::map<std::string, std::size_t> key_firms_per_hq;
  std::map<std::string, std::map<Role, std::map<std::string, std::size_t>>> locations;
  for (const auto& r : rows) {
    if (r.role == Role::None) continue;
    auto it = hqs.find(r.mnc);
    if (it == hqs.end()) throw Error("no headquarters listed for MNC `" + r.mnc + "`");
    const auto& hq_j = graph.node(graph.index_of(it->second)).jurisdiction;
    const auto& firm_j = graph.node(graph.index_of(r.affiliate_id)).jurisdiction;
    ++per_role[r.role][hq_j];
    ++key_firms_per_hq[hq_j];
    ++locations[hq_j][r.role][firm_j];
  }
  HqTables out;
  for (Role role : roles) out.by_role[role] = to_rows(per_role[role], top_k);
  for (const auto& top : to_rows(key_firms_per_hq, top_k)) {
    HqTables::Breakdown b{top.key, {}};
    for (Role role : roles) b.locations[role] = to_rows(locations[top.key][role], top_k);
    out.breakdowns.push_back(std::move(b));
  }
  return out;
}

RegressionResult wtc_regression(const std::vector<KeyFirmRow>& rows, const OwnershipGraph& graph,
                                const std::map<std::string, JurisdictionProfile>& profiles, Role role) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : rows) {
    if (r.role == role) ++counts[graph.node(graph.index_of(r.affiliate_id)).jurisdiction];
  }
  std::vector<double> x, y;
  for (const auto& [code, p] : profiles) {
    if (!p.wtc) continue;
    x.push_back(*p.wtc);
    auto it = counts.find(code);
    y.push_back(it == counts.end() ? 0.0 : double(it->second));
  }
  return ols_regression(x, y);
}

}  // namespace ownet
