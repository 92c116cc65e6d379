#include "ownet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "ownet/csv.hpp"
#include "ownet/error.hpp"

namespace ownet::synth {

PowerLawSampler::PowerLawSampler(double gamma, std::uint64_t x_min, std::uint64_t table_size)
    : gamma_(gamma), x_min_(x_min), cutoff_(x_min + table_size) {
  if (!(gamma > 1.0)) throw Error("power-law sampler needs gamma > 1");
  if (x_min == 0) throw Error("power-law sampler needs x_min >= 1");
  cdf_.resize(table_size);
  double acc = 0.0, first_moment = 0.0;
  for (std::uint64_t i = 0; i < table_size; ++i) {
    const double x = double(x_min + i);
    const double w = std::pow(x, -gamma);
    acc += w;
    first_moment += x * w;
    cdf_[i] = acc;
  }
  // Tail beyond the table, midpoint-rule integral of x^-gamma.
  const double edge = double(cutoff_) - 0.5;
  const double tail = std::pow(edge, 1.0 - gamma) / (gamma - 1.0);
  const double total = acc + tail;
  for (auto& c : cdf_) c /= total;
  table_mass_ = acc / total;
  const double tail_moment = gamma > 2.0 ? std::pow(edge, 2.0 - gamma) / (gamma - 2.0) : INFINITY;
  mean_ = (first_moment + tail_moment) / total;
}

std::uint64_t PowerLawSampler::operator()(Rng& rng) const {
  const double u = rng.uniform();
  if (u < table_mass_) {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return x_min_ + static_cast<std::uint64_t>(it - cdf_.begin());
  }
  const double v = rng.uniform();
  const double x = (double(cutoff_) - 0.5) * std::pow(1.0 - v, -1.0 / (gamma_ - 1.0)) + 0.5;
  return x > 1e15 ? std::uint64_t(1e15) : std::max(cutoff_, static_cast<std::uint64_t>(x));
}

// ---------------------------------------------------------------------------

SynthSpec parse_spec_json(const std::string& json_text) {
  SynthSpec s;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("synth spec: ") + e.what());
  }
  static const std::set<std::string> known = {
      "seed", "nodes", "gamma_in", "gamma_out", "mean_degree", "noise_edge_rate", "mncs", "mnc_min_affiliates",
      "mnc_max_affiliates", "multi_parent_rate", "cycle_rate", "in_target_fraction", "include_toy", "core_size"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error("synth spec: unknown field `" + key + "`");
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  try {
    get("seed", s.seed);
    get("nodes", s.nodes);
    get("gamma_in", s.gamma_in);
    get("gamma_out", s.gamma_out);
    get("mean_degree", s.mean_degree);
    get("noise_edge_rate", s.noise_edge_rate);
    get("mncs", s.mncs);
    get("mnc_min_affiliates", s.mnc_min_affiliates);
    get("mnc_max_affiliates", s.mnc_max_affiliates);
    get("multi_parent_rate", s.multi_parent_rate);
    get("cycle_rate", s.cycle_rate);
    get("in_target_fraction", s.in_target_fraction);
    get("include_toy", s.include_toy);
    get("core_size", s.core_size);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("synth spec: ") + e.what());
  }
  return s;
}

std::string spec_to_json(const SynthSpec& s) {
  nlohmann::ordered_json j;
  j["seed"] = s.seed;
  j["nodes"] = s.nodes;
  j["gamma_in"] = s.gamma_in;
  j["gamma_out"] = s.gamma_out;
  j["mean_degree"] = s.mean_degree;
  j["noise_edge_rate"] = s.noise_edge_rate;
  j["mncs"] = s.mncs;
  j["mnc_min_affiliates"] = s.mnc_min_affiliates;
  j["mnc_max_affiliates"] = s.mnc_max_affiliates;
  j["multi_parent_rate"] = s.multi_parent_rate;
  j["cycle_rate"] = s.cycle_rate;
  j["in_target_fraction"] = s.in_target_fraction;
  j["include_toy"] = s.include_toy;
  j["core_size"] = s.core_size;
  return j.dump(2);
}

// ---------------------------------------------------------------------------

namespace {

const char* const kPool[] = {"US", "GB", "NL", "LU", "IE", "JP", "FR", "DE", "CH", "SG", "KY", "BM", "CN", "HK"};
constexpr std::size_t kPoolSize = sizeof(kPool) / sizeof(kPool[0]);

std::string pick_jurisdiction(Rng& rng) { return kPool[rng.below(kPoolSize)]; }

std::string industry(Rng& rng) { return std::string(1, char('A' + rng.below(21))); }

std::string pct_text(double pct) {
  std::ostringstream os;
  os.precision(4);
  os << pct;
  return os.str();
}

double substantial_pct(Rng& rng) { return std::round((10.0 + 90.0 * rng.uniform()) * 100.0) / 100.0; }

}  // namespace

MncTemplate toy_m1_template() {
  // 0 HQ, 1 a, 2 b, 3 c, 4 d, 5 e, 6 f, 7 g, 8 h
  MncTemplate t;
  t.name = "M1";
  t.jurisdiction = {"JP", "NL", "GB", "FR", "FR", "LU", "GB", "IE", "US"};
  t.edges = {{1, 0}, {8, 0}, {2, 1}, {3, 1}, {4, 1}, {5, 2}, {6, 2}, {7, 5}};
  t.intended = {{1, Role::Holding}, {2, Role::HoldingAndConduit}, {5, Role::Conduit}};
  return t;
}

MncTemplate random_template(Rng& rng, const std::string& name, std::size_t affiliates, double multi_parent_rate,
                            double cycle_rate) {
  MncTemplate t;
  t.name = name;
  const std::uint32_t n = static_cast<std::uint32_t>(affiliates) + 1;
  t.jurisdiction.resize(n);
  t.jurisdiction[0] = pick_jurisdiction(rng);
  for (std::uint32_t i = 1; i < n; ++i) {
    t.jurisdiction[i] = rng.chance(0.3) ? t.jurisdiction[0] : pick_jurisdiction(rng);
  }
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  auto add = [&](std::uint32_t sub, std::uint32_t holder) {
    if (sub != holder && seen.emplace(sub, holder).second) t.edges.emplace_back(sub, holder);
  };
  std::vector<std::uint32_t> parent(n, 0);
  for (std::uint32_t i = 1; i < n; ++i) {
    // Bias towards recent nodes to get deeper layers.
    std::uint32_t p = rng.chance(0.6) && i > 1 ? i - 1 - static_cast<std::uint32_t>(rng.below(std::min<std::uint32_t>(i - 1, 3)))
                                               : static_cast<std::uint32_t>(rng.below(i));
    parent[i] = p;
    add(i, p);
    if (i > 2 && rng.chance(multi_parent_rate)) add(i, static_cast<std::uint32_t>(1 + rng.below(i - 1)));
    // Cross-shareholding with the parent; never involving the headquarters.
    if (p != 0 && rng.chance(cycle_rate)) add(p, i);
  }
  return t;
}

std::vector<Role> evaluate_template(const MncTemplate& t) {
  const std::size_t n = t.jurisdiction.size();
  std::vector<std::vector<std::uint32_t>> subs(n), holders(n);
  for (auto [s, h] : t.edges) {
    subs[h].push_back(s);
    holders[s].push_back(h);
  }
  // Layers by BFS from the headquarters against capital flow.
  std::vector<std::int64_t> layer(n, -1);
  layer[0] = 0;
  std::vector<std::uint32_t> queue{0};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (auto s : subs[queue[head]]) {
      if (layer[s] < 0) {
        layer[s] = layer[queue[head]] + 1;
        queue.push_back(s);
      }
    }
  }
  for (std::size_t v = 1; v < n; ++v) {
    if (layer[v] < 0) throw Error("template " + t.name + ": node " + std::to_string(v) + " does not reach the HQ");
  }
  std::vector<std::int64_t> kin(n), kout(n);
  std::int64_t sum_in = 0, sum_prod = 0;
  for (std::size_t v = 1; v < n; ++v) {
    kin[v] = std::int64_t(subs[v].size());
    kout[v] = std::int64_t(holders[v].size());
    sum_in += kin[v];
    sum_prod += kin[v] * kout[v];
  }
  auto third = [&](std::size_t v) {
    if (t.jurisdiction[v] == t.jurisdiction[0]) return false;
    for (auto s : subs[v]) {
      if (s != 0 && t.jurisdiction[s] != t.jurisdiction[v]) return true;
    }
    return false;
  };
  // Sign of H is sign(k_in - k_out) and T > 0 iff k_in > 0, whenever the
  // normalizing sums are positive.
  auto h_pos = [&](std::size_t v) { return sum_in > 0 && kin[v] > kout[v] && third(v); };
  auto t_pos = [&](std::size_t v) { return sum_prod > 0 && kin[v] > 0 && third(v); };

  std::vector<char> expandable(n, 0), holding(n, 0), conduit(n, 0);
  for (std::size_t v = 1; v < n; ++v) expandable[v] = layer[v] == 1 && h_pos(v);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t p = 1; p < n; ++p) {
      if (!expandable[p]) continue;
      for (auto c : subs[p]) {
        if (c == 0 || !t_pos(c)) continue;
        if (!holding[p]) holding[p] = 1, changed = true;
        if (!conduit[c]) conduit[c] = 1, changed = true;
        if (h_pos(c) && !expandable[c]) expandable[c] = 1, changed = true;
        if (h_pos(c) && !holding[c]) holding[c] = 1, changed = true;
      }
    }
  }
  std::vector<Role> roles(n, Role::None);
  for (std::size_t v = 1; v < n; ++v) {
    roles[v] = static_cast<Role>((holding[v] ? 1 : 0) | (conduit[v] ? 2 : 0));
  }
  return roles;
}

PlantedMnc plant_mnc(const MncTemplate& t, const std::string& id_prefix, Rng& rng) {
  auto roles = evaluate_template(t);
  for (auto [v, want] : t.intended) {
    if (v >= roles.size() || roles[v] != want) {
      throw Error("template " + t.name + ": intended role of node " + std::to_string(v) + " is " + role_name(want) +
                  " but direct evaluation gives " + (v < roles.size() ? role_name(roles[v]) : "nothing"));
    }
  }
  PlantedMnc m;
  m.hq_id = id_prefix + "0";
  for (std::size_t v = 0; v < t.jurisdiction.size(); ++v) {
    NodeRecord rec;
    rec.id = id_prefix + std::to_string(v);
    rec.jurisdiction = t.jurisdiction[v];
    rec.industry = industry(rng);
    rec.name = v == 0 ? t.name + " HQ" : t.name + " affiliate " + std::to_string(v);
    rec.is_hq = v == 0;
    m.nodes.push_back(std::move(rec));
    if (v > 0) m.truth.emplace_back(id_prefix + std::to_string(v), roles[v]);
  }
  for (auto [s, h] : t.edges) {
    m.edges.push_back({id_prefix + std::to_string(s), id_prefix + std::to_string(h), substantial_pct(rng)});
  }
  return m;
}

RoleTally Corpus::planted_tally() const {
  RoleTally t;
  for (const auto& r : truth) t.add(r.role);
  return t;
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kMaxRedraws = 100;

// Configuration-model wiring of background nodes [0, n) with ids "n<i>".
void wire_background(const SynthSpec& spec, Rng& rng, Corpus& corpus) {
  const std::size_t n = spec.nodes;
  for (std::size_t i = 0; i < n; ++i) {
    corpus.nodes.push_back({"n" + std::to_string(i), pick_jurisdiction(rng), industry(rng),
                            "synthetic company " + std::to_string(i), false});
  }
  if (n < 2 || spec.mean_degree <= 0.0) return;
  if (!(spec.gamma_in > 2.0) || !(spec.gamma_out > 2.0)) throw Error("scale-free generator needs gamma > 2");

  PowerLawSampler in_law(spec.gamma_in), out_law(spec.gamma_out);
  const double p_in = std::min(1.0, spec.mean_degree / in_law.mean());
  const double p_out = std::min(1.0, spec.mean_degree / out_law.mean());

  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    std::vector<std::uint32_t> kin(n, 0), kout(n, 0);
    std::vector<std::uint32_t> in_stubs, out_stubs;
    for (std::size_t v = 0; v < n; ++v) {
      if (rng.chance(p_in)) kin[v] = static_cast<std::uint32_t>(std::min<std::uint64_t>(in_law(rng), n - 1));
      if (rng.chance(p_out)) kout[v] = static_cast<std::uint32_t>(std::min<std::uint64_t>(out_law(rng), n - 1));
      in_stubs.insert(in_stubs.end(), kin[v], static_cast<std::uint32_t>(v));
      out_stubs.insert(out_stubs.end(), kout[v], static_cast<std::uint32_t>(v));
    }
    // Balance by deleting uniformly chosen stubs from the longer list, which
    // thins every degree class proportionally.
    auto& longer = in_stubs.size() > out_stubs.size() ? in_stubs : out_stubs;
    const std::size_t target = std::min(in_stubs.size(), out_stubs.size());
    if (longer.size() - target > 0.05 * double(longer.size()) + 10) continue;
    while (longer.size() > target) {
      std::size_t k = rng.below(longer.size());
      longer[k] = longer.back();
      longer.pop_back();
    }
    std::shuffle(in_stubs.begin(), in_stubs.end(), rng.engine());
    std::sort(out_stubs.begin(), out_stubs.end());

    const std::size_t m = out_stubs.size();
    auto key = [](std::uint32_t a, std::uint32_t b) { return (std::uint64_t(a) << 32) | b; };
    std::unordered_set<std::uint64_t> present;
    present.reserve(m * 2);
    std::vector<std::size_t> bad;
    std::vector<char> ok(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      if (out_stubs[i] != in_stubs[i] && present.insert(key(out_stubs[i], in_stubs[i])).second) ok[i] = 1;
      else bad.push_back(i);
    }
    // Repair conflicts by swapping in-stubs with random valid pairs.
    std::size_t retries = 0;
    const std::size_t cap = 100 * std::max<std::size_t>(m, 1);
    bool failed = false;
    for (std::size_t i : bad) {
      while (true) {
        if (++retries > cap) {
          failed = true;
          break;
        }
        std::size_t j = rng.below(m);
        if (!ok[j]) continue;
        auto a = out_stubs[i], b = in_stubs[j], c = out_stubs[j], d = in_stubs[i];
        if (a == b || c == d) continue;
        auto k1 = key(a, b), k2 = key(c, d);
        if (k1 == k2 || present.contains(k1) || present.contains(k2)) continue;
        present.erase(key(c, in_stubs[j]));
        present.insert(k1);
        present.insert(k2);
        std::swap(in_stubs[i], in_stubs[j]);
        ok[i] = 1;
        break;
      }
      if (failed) break;
    }
    if (failed) continue;

    // Edge u -> v: v is the shareholder of u.
    for (std::size_t i = 0; i < m; ++i) {
      double pct = std::round((0.5 + 99.5 * rng.uniform()) * 100.0) / 100.0;
      corpus.edges.push_back({corpus.nodes[out_stubs[i]].id, corpus.nodes[in_stubs[i]].id, pct});
    }
    corpus.noise_rows = static_cast<std::size_t>(std::llround(spec.noise_edge_rate * double(m)));
    return;
  }
  throw Error("scale-free generator: infeasible degree sequence after " + std::to_string(kMaxRedraws) + " draws");
}

void add_profiles(Rng& rng, Corpus& corpus) {
  for (const char* code : kPool) {
    JurisdictionProfile p;
    p.code = code;
    p.gdp = std::round((50.0 + 5000.0 * rng.uniform()) * 10.0) / 10.0;
    p.gdp_year = 2015;
    p.statutory_rate = std::round(35.0 * rng.uniform()) / 100.0;
    p.wtc = std::round(rng.uniform() * 1e4) / 1e6;
    corpus.profiles.emplace(p.code, p);
  }
}

}  // namespace

Corpus generate_scale_free(const SynthSpec& spec) {
  Rng rng(spec.seed);
  Corpus corpus;
  wire_background(spec, rng, corpus);
  add_profiles(rng, corpus);
  return corpus;
}

Corpus generate_corpus(const SynthSpec& spec) {
  Rng rng(spec.seed);
  Corpus corpus;
  wire_background(spec, rng, corpus);
  add_profiles(rng, corpus);

  // Strongly connected core: a ring plus chords, all substantial.
  const std::size_t core = std::max<std::size_t>(spec.core_size, 3);
  const std::size_t core_base = corpus.nodes.size();
  for (std::size_t i = 0; i < core; ++i) {
    corpus.nodes.push_back({"c" + std::to_string(i), pick_jurisdiction(rng), industry(rng),
                            "core company " + std::to_string(i), false});
  }
  auto core_id = [&](std::size_t i) { return corpus.nodes[core_base + (i % core)].id; };
  for (std::size_t i = 0; i < core; ++i) {
    corpus.edges.push_back({core_id(i), core_id(i + 1), 50.0});
    if (i % 7 == 0) corpus.edges.push_back({core_id(i), core_id(i + core / 2 + 1), 25.0});
  }
  // Join the background to the core without creating paths back into it.
  for (std::size_t v = 0; v < spec.nodes; v += 97) {
    corpus.edges.push_back({core_id(v), corpus.nodes[v].id, 5.0});
  }

  std::vector<MncTemplate> templates;
  if (spec.include_toy) templates.push_back(toy_m1_template());
  const std::size_t span = spec.mnc_max_affiliates >= spec.mnc_min_affiliates
                               ? spec.mnc_max_affiliates - spec.mnc_min_affiliates + 1
                               : 1;
  for (std::size_t k = 0; k < spec.mncs; ++k) {
    std::size_t size = spec.mnc_min_affiliates + rng.below(span);
    templates.push_back(
        random_template(rng, "MNC" + std::to_string(k + 1), size, spec.multi_parent_rate, spec.cycle_rate));
  }
  for (std::size_t k = 0; k < templates.size(); ++k) {
    const auto& t = templates[k];
    auto planted = plant_mnc(t, "m" + std::to_string(k) + "_", rng);
    const bool to_in = k == 0 && spec.include_toy ? true : rng.chance(spec.in_target_fraction);
    corpus.nodes.insert(corpus.nodes.end(), planted.nodes.begin(), planted.nodes.end());
    corpus.edges.insert(corpus.edges.end(), planted.edges.begin(), planted.edges.end());
    // A 5% stake is below the substantial threshold, so it shapes the bow-tie
    // without touching the MNC subtree.
    if (to_in) corpus.edges.push_back({planted.hq_id, core_id(k * 13), 5.0});
    else corpus.edges.push_back({core_id(k * 13), planted.hq_id, 5.0});
    corpus.hqs.push_back({planted.hq_id, t.name});
    for (const auto& [id, role] : planted.truth) {
      corpus.truth.push_back({t.name, id, role, to_in ? Region::IN : Region::TE});
    }
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + dir + "/" + name);
    return out;
  };
  {
    auto out = open("nodes.csv");
    csv::write_row(out, {"node_id", "jurisdiction", "nace_section", "name", "is_hq"});
    for (const auto& n : corpus.nodes) csv::write_row(out, {n.id, n.jurisdiction, n.industry, n.name, n.is_hq ? "1" : "0"});
  }
  {
    auto out = open("edges.csv");
    csv::write_row(out, {"subsidiary_id", "shareholder_id", "pct"});
    for (const auto& e : corpus.edges) csv::write_row(out, {e.subsidiary, e.shareholder, pct_text(e.pct)});
    for (std::size_t i = 0; i < corpus.noise_rows && !corpus.nodes.empty(); ++i) {
      const auto& id = corpus.nodes[i % corpus.nodes.size()].id;
      csv::write_row(out, {id, id, "50"});
    }
  }
  {
    auto out = open("hqs.csv");
    csv::write_row(out, {"hq_node_id", "mnc_name"});
    for (const auto& h : corpus.hqs) csv::write_row(out, {h.hq_id, h.mnc_name});
  }
  {
    auto out = open("truth.csv");
    csv::write_row(out, {"mnc", "affiliate_id", "role", "target_region"});
    for (const auto& t : corpus.truth) csv::write_row(out, {t.mnc, t.affiliate_id, role_name(t.role), region_name(t.target)});
  }
  {
    auto out = open("profiles.csv");
    csv::write_row(out, {"code", "gdp", "gdp_year", "statutory_rate", "wtc"});
    for (const auto& [code, p] : corpus.profiles) {
      csv::write_row(out, {code, p.gdp ? csv::format_double(*p.gdp) : "", p.gdp_year ? std::to_string(*p.gdp_year) : "",
                           p.statutory_rate ? csv::format_double(*p.statutory_rate) : "",
                           p.wtc ? csv::format_double(*p.wtc) : ""});
    }
  }
}

}  // namespace ownet::synth
