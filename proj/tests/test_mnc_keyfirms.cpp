#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "ownet/error.hpp"
#include "ownet/keyfirms.hpp"
#include "ownet/mnc.hpp"
#include "ownet/synth.hpp"
#include "tempdir.hpp"

using namespace ownet;

namespace {

// Toy M1: 0 HQ, 1 a, 2 b, 3 c, 4 d, 5 e, 6 f, 7 g, 8 h (ids v0..v8)
OwnershipGraph toy_graph() {
  return oracle::make_graph(9, {{1, 0}, {8, 0}, {2, 1}, {3, 1}, {4, 1}, {5, 2}, {6, 2}, {7, 5}},
                            {"JP", "NL", "GB", "FR", "FR", "LU", "GB", "IE", "US"});
}

OwnershipGraph template_graph(const synth::MncTemplate& t) {
  std::vector<oracle::Edge> edges(t.edges.begin(), t.edges.end());
  return oracle::make_graph(t.jurisdiction.size(), edges, t.jurisdiction);
}

// Roles from a fixpoint over the identification rule, using integer sign
// tests: H > 0 iff k_in > k_out, T > 0 iff k_in > 0 (given valid denominators).
std::map<NodeIndex, Role> fixpoint_roles(const OwnershipGraph& g, NodeIndex hq) {
  const auto& d = g.topology();
  const std::size_t n = g.node_count();
  // affiliates and layers by BFS against the arrows
  std::vector<int> layer(n, -1);
  layer[hq] = 0;
  std::vector<NodeIndex> q{hq};
  for (std::size_t h = 0; h < q.size(); ++h)
    for (auto s : d.predecessors(q[h]))
      if (layer[s] < 0) layer[s] = layer[q[h]] + 1, q.push_back(s);
  auto member = [&](NodeIndex v) { return layer[v] >= 0; };
  std::vector<long> kin(n, 0), kout(n, 0);
  long sum_kin = 0, sum_prod = 0;
  for (auto [u, v] : d.edge_pairs()) {
    if (member(u) && member(v)) ++kout[u], ++kin[v];
  }
  for (NodeIndex v = 0; v < n; ++v)
    if (member(v) && v != hq) sum_kin += kin[v], sum_prod += kin[v] * kout[v];
  auto differ = [&](NodeIndex a, NodeIndex b) { return jurisdictions_differ(g.node(a).jurisdiction, g.node(b).jurisdiction); };
  auto third = [&](NodeIndex v) {
    if (!differ(v, hq)) return false;
    for (auto s : d.predecessors(v))
      if (member(s) && s != hq && differ(s, v)) return true;
    return false;
  };
  auto holds = [&](NodeIndex v) { return sum_kin > 0 && kin[v] + kout[v] > 0 && kin[v] > kout[v] && third(v); };
  auto conduit = [&](NodeIndex v) { return sum_prod > 0 && kin[v] + kout[v] > 0 && kin[v] > 0 && third(v); };

  std::map<NodeIndex, Role> role;
  std::set<NodeIndex> examined;
  for (NodeIndex v = 0; v < n; ++v)
    if (layer[v] == 1 && holds(v)) examined.insert(v);
  for (bool changed = true; changed;) {
    changed = false;
    for (NodeIndex p : std::set<NodeIndex>(examined)) {
      for (auto c : d.predecessors(p)) {
        if (!member(c) || c == hq || !conduit(c)) continue;
        role[p] = merge_roles(role[p], Role::Holding);
        role[c] = merge_roles(role[c], Role::Conduit);
        if (holds(c)) {
          role[c] = merge_roles(role[c], Role::Holding);
          changed |= examined.insert(c).second;
        }
      }
    }
  }
  return role;
}

}  // namespace

TEST_CASE("toy M1 subtree layers and degrees") {
  auto g = toy_graph();
  SubstantialView view(g);
  auto t = extract_mnc(view, "v0");
  REQUIRE(t.size() == 8);
  std::map<std::string, std::uint32_t> layer;
  for (std::size_t i = 0; i < t.size(); ++i) layer[g.node(t.affiliates[i]).id] = t.layer[i];
  CHECK(layer == std::map<std::string, std::uint32_t>{{"v1", 1}, {"v2", 2}, {"v3", 2}, {"v4", 2}, {"v5", 3},
                                                       {"v6", 3}, {"v7", 4}, {"v8", 1}});
  CHECK(t.sum_k_in == 6);
  CHECK(t.sum_k_total == 14);
  CHECK(t.sum_k_product == 3 * 1 + 2 * 1 + 1 * 1);
  CHECK(assign_layers(view, t) == t.layer);
  CHECK_FALSE(t.contains(g.index_of("v0")));
}

TEST_CASE("toy M1 centralities equal the rational values") {
  auto g = toy_graph();
  SubstantialView view(g);
  auto t = extract_mnc(view, "v0");
  auto at = [&](const char* id) { return *t.find(g.index_of(id)); };
  CHECK(std::fabs(holding_centrality(t, at("v1")) - 7.0 / 6) < 1e-12);
  CHECK(std::fabs(holding_centrality(t, at("v2")) - 7.0 / 9) < 1e-12);
  CHECK(std::fabs(conduit_centrality(t, at("v2")) - 14.0 / 9) < 1e-12);
  CHECK(std::fabs(conduit_centrality(t, at("v5")) - 7.0 / 6) < 1e-12);
  CHECK(holding_centrality(t, at("v5")) == 0.0);
  CHECK(std::fabs(holding_centrality(t, at("v8")) + 7.0 / 3) < 1e-12);

  auto rec = hierarchical_identify(view, t);
  std::map<std::string, Role> roles;
  for (const auto& r : rec)
    if (r.role != Role::None) roles[g.node(r.affiliate).id] = r.role;
  CHECK(roles == std::map<std::string, Role>{{"v1", Role::Holding}, {"v2", Role::HoldingAndConduit}, {"v5", Role::Conduit}});
}

TEST_CASE("global degree scope counts links outside the subtree") {
  // toy plus an outside shareholder of b and an outside subsidiary of a
  auto g = oracle::make_graph(11, {{1, 0}, {8, 0}, {2, 1}, {3, 1}, {4, 1}, {5, 2}, {6, 2}, {7, 5}, {2, 9}, {10, 1}},
                              {"JP", "NL", "GB", "FR", "FR", "LU", "GB", "IE", "US", "DE", "DE"});
  SubstantialView view(g);
  auto within = extract_mnc(view, "v0", DegreeScope::Within);
  auto global = extract_mnc(view, "v0", DegreeScope::Global);
  // v10 is an affiliate (it reaches the HQ), v9 is not
  CHECK(within.contains(g.index_of("v10")));
  CHECK_FALSE(within.contains(g.index_of("v9")));
  const auto b = *within.find(g.index_of("v2"));
  CHECK(within.k_out[b] == 1);
  CHECK(global.k_out[b] == 2);
}

TEST_CASE("non-substantial links do not make affiliates") {
  std::vector<NodeRecord> nodes{{"hq", "US", "K", "", true}, {"x", "GB", "K", "", false}, {"y", "FR", "K", "", false}};
  auto g = OwnershipGraph::build(nodes, {{"x", "hq", 50}, {"y", "x", 9.99}});
  SubstantialView view(g);
  auto t = extract_mnc(view, "hq");
  CHECK(t.size() == 1);
  CHECK_THROWS_AS(extract_mnc(view, "nobody"), Error);
}

TEST_CASE("centralities refuse degenerate denominators") {
  auto g = oracle::make_graph(2, {{1, 0}});
  SubstantialView view(g);
  auto t = extract_mnc(view, "v0");
  // the single affiliate has k_in = 0, so sum k_in = 0
  CHECK_THROWS_AS(holding_centrality(t, 0), DegenerateError);
  CHECK_THROWS_AS(conduit_centrality(t, 0), DegenerateError);
  auto rec = hierarchical_identify(view, t);
  CHECK_FALSE(rec[0].holding.has_value());
  CHECK(rec[0].role == Role::None);
}

TEST_CASE("holding centrality sign follows k_in - k_out") {
  synth::Rng rng(51);
  std::size_t checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto tpl = synth::random_template(rng, "T", 2 + rng.below(60), 0.3, 0.2);
    auto g = template_graph(tpl);
    SubstantialView view(g);
    auto t = extract_mnc(view, "v0");
    if (t.sum_k_in == 0) continue;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t.k_in[i] + t.k_out[i] == 0) continue;
      const double h = holding_centrality(t, i);
      CHECK((h > 0) == (t.k_in[i] > t.k_out[i]));
      CHECK((h < 0) == (t.k_in[i] < t.k_out[i]));
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("hierarchical identification equals the rule's fixpoint") {
  synth::Rng rng(52);
  std::size_t key_firms = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto tpl = synth::random_template(rng, "T", 2 + rng.below(40), 0.3, 0.25);
    auto g = template_graph(tpl);
    SubstantialView view(g);
    auto t = extract_mnc(view, "v0");
    auto want = fixpoint_roles(g, 0);
    auto rec = hierarchical_identify(view, t);
    for (const auto& r : rec) {
      auto it = want.find(r.affiliate);
      CHECK(r.role == (it == want.end() ? Role::None : it->second));
      key_firms += r.role != Role::None;
    }
    // the generator's closure evaluator agrees as well
    auto eval = synth::evaluate_template(tpl);
    for (const auto& r : rec) CHECK(r.role == eval[r.affiliate]);
  }
  CHECK(key_firms > 50);
}

TEST_CASE("third-country condition") {
  auto g = toy_graph();
  SubstantialView view(g);
  auto t = extract_mnc(view, "v0");
  CHECK(third_country(view, t, g.index_of("v1")));   // NL, HQ JP, subsidiary GB
  CHECK_FALSE(third_country(view, t, g.index_of("v3")));  // no subsidiaries
  // same jurisdiction as the HQ
  auto g2 = oracle::make_graph(3, {{1, 0}, {2, 1}}, {"US", "US", "GB"});
  SubstantialView v2(g2);
  auto t2 = extract_mnc(v2, "v0");
  CHECK_FALSE(third_country(v2, t2, g2.index_of("v1")));
}

TEST_CASE("role names round-trip") {
  for (Role r : {Role::None, Role::Holding, Role::Conduit, Role::HoldingAndConduit}) CHECK(parse_role(role_name(r)) == r);
  CHECK(merge_roles(Role::Holding, Role::Conduit) == Role::HoldingAndConduit);
  CHECK_THROWS_AS(parse_role("Boss"), Error);
}

TEST_CASE("classify_all records failures and is thread-count independent") {
  synth::SynthSpec spec;
  spec.seed = 5;
  spec.nodes = 500;
  spec.mncs = 12;
  auto corpus = synth::generate_corpus(spec);
  auto g = OwnershipGraph::build(corpus.nodes, corpus.edges);
  SubstantialView view(g);
  auto hqs = corpus.hqs;
  hqs.push_back({"missing-node", "Ghost"});
  auto one = classify_all(view, hqs, DegreeScope::Within, 1);
  auto four = classify_all(view, hqs, DegreeScope::Within, 4);
  CHECK(one.failed == 1);
  CHECK(one.mncs.back().error.has_value());
  CHECK(one.total == four.total);
  CHECK(one.total == corpus.planted_tally());
  for (std::size_t i = 0; i < one.mncs.size(); ++i) {
    CHECK(one.mncs[i].tally == four.mncs[i].tally);
    CHECK(one.mncs[i].subtree.affiliates == four.mncs[i].subtree.affiliates);
  }
  CHECK(classify_all(view, {}).mncs.empty());
}

TEST_CASE("load_hq_list") {
  TempDir dir;
  auto hqs = load_hq_list(dir.write("h.csv", "hq_node_id,mnc_name\nv0,\"Acme, Ltd\"\n"));
  REQUIRE(hqs.size() == 1);
  CHECK(hqs[0].mnc_name == "Acme, Ltd");
  CHECK_THROWS_AS(load_hq_list(dir.write("b.csv", "id,name\n")), Error);
}
