#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "ownet/error.hpp"
#include "ownet/jurisdiction.hpp"
#include "tempdir.hpp"

using namespace ownet;

namespace {

std::map<std::string, JurisdictionProfile> gdp(std::initializer_list<std::pair<const char*, double>> list) {
  std::map<std::string, JurisdictionProfile> out;
  for (auto [code, v] : list) out[code] = {code, v, 2015, std::nullopt, std::nullopt};
  return out;
}

const JurisdictionScore& find(const ScoreReport& r, const std::string& code) {
  for (const auto& s : r.scores)
    if (s.code == code) return s;
  throw std::runtime_error("no score for " + code);
}

OwnershipGraph toy_graph() {
  return oracle::make_graph(9, {{1, 0}, {8, 0}, {2, 1}, {3, 1}, {4, 1}, {5, 2}, {6, 2}, {7, 5}},
                            {"JP", "NL", "GB", "FR", "FR", "LU", "GB", "IE", "US"});
}

KeyFirmRow row(const std::string& mnc, const std::string& id, Role role) {
  KeyFirmRow r;
  r.mnc = mnc;
  r.affiliate_id = id;
  r.role = role;
  return r;
}

}  // namespace

TEST_CASE("sink centrality hand examples") {
  FlowAggregate flows{{"A", {80, 20, 0}}, {"B", {20, 80, 0}}};
  auto r = sink_centrality(flows, gdp({{"A", 1}, {"B", 9}}));
  CHECK(find(r, "A").value == doctest::Approx(6.0));
  CHECK(find(r, "B").value == doctest::Approx(-2.0 / 3));
  CHECK_FALSE(find(r, "A").flagged);

  FlowAggregate even{{"A", {5, 5, 0}}, {"B", {7, 7, 0}}};
  for (const auto& s : sink_centrality(even, gdp({{"A", 1}, {"B", 2}})).scores) CHECK(s.value == 0.0);

  // all inbound flow in one jurisdiction holding 1% of GDP
  FlowAggregate one{{"S", {99, 0, 0}}, {"R", {1, 1, 0}}};
  auto big = sink_centrality(one, gdp({{"S", 1}, {"R", 99}}));
  CHECK(find(big, "S").value == doctest::Approx(99.0));
  CHECK(find(big, "S").flagged);

  FlowAggregate none{{"A", {0, 3, 0}}};
  CHECK_THROWS_AS(sink_centrality(none, gdp({{"A", 1}})), Error);
}

TEST_CASE("jurisdictions without GDP are skipped") {
  FlowAggregate flows{{"A", {80, 20, 0}}, {"B", {20, 80, 0}}, {"C", {1, 0, 0}}};
  auto r = sink_centrality(flows, gdp({{"A", 1}, {"B", 9}}));
  CHECK(r.skipped == std::vector<std::string>{"C"});
  CHECK(r.scores.size() == 2);
}

TEST_CASE("conduit centrality hand examples") {
  FlowAggregate flows{{"A", {0, 0, 30}}, {"B", {0, 0, 70}}};
  auto r = conduit_outward_centrality(flows, gdp({{"A", 1}, {"B", 9}}));
  CHECK(find(r, "A").value == doctest::Approx(3.0));
  CHECK(find(r, "B").value == doctest::Approx(7.0 / 9));
  CHECK(find(r, "A").flagged);
  CHECK_FALSE(find(r, "B").flagged);

  FlowAggregate uniform{{"A", {0, 0, 1}}, {"B", {0, 0, 3}}, {"C", {0, 0, 0}}};
  auto u = conduit_outward_centrality(uniform, gdp({{"A", 1}, {"B", 3}, {"C", 5}}));
  CHECK(find(u, "C").value == 0.0);
  // A and B hold pass shares equal to their GDP shares among themselves only
  // when C carries no GDP, so check the proportional case separately
  FlowAggregate prop{{"A", {0, 0, 1}}, {"B", {0, 0, 3}}};
  for (const auto& s : conduit_outward_centrality(prop, gdp({{"A", 1}, {"B", 3}})).scores) {
    CHECK(s.value == doctest::Approx(1.0));
    CHECK_FALSE(s.flagged);
  }
}

TEST_CASE("centralities are invariant under rescaling the flows") {
  synth::Rng rng(61);
  FlowAggregate flows, scaled;
  auto profiles = gdp({{"A", 3}, {"B", 1}, {"C", 7}, {"D", 2}});
  for (const char* c : {"A", "B", "C", "D"}) {
    JurisdictionFlow f{rng.uniform() * 10, rng.uniform() * 10, rng.uniform() * 10};
    flows[c] = f;
    scaled[c] = {f.in * 13.5, f.out * 13.5, f.pass * 13.5};
  }
  auto a = sink_centrality(flows, profiles), b = sink_centrality(scaled, profiles);
  auto c = conduit_outward_centrality(flows, profiles), d = conduit_outward_centrality(scaled, profiles);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(a.scores[i].value == doctest::Approx(b.scores[i].value));
    CHECK(c.scores[i].value == doctest::Approx(d.scores[i].value));
  }
}

TEST_CASE("cross-border and pass flows agree with path enumeration") {
  synth::Rng rng(62);
  const std::vector<std::string> codes{"AA", "BB", "CC", "DD"};
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + rng.below(25);
    std::vector<std::string> jur(n);
    for (auto& j : jur) j = codes[rng.below(codes.size())];
    auto g = oracle::make_graph(n, oracle::random_edges(rng, n, 0.15), jur);
    SubstantialView view(g);
    auto flows = cross_border_flows(view);
    std::map<std::string, double> in, out;
    double total = 0;
    for (auto [u, v] : view.topology().edge_pairs()) {
      if (jur[u] == jur[v]) continue;
      out[jur[u]] += 1;
      in[jur[v]] += 1;
      total += 1;
    }
    double sum_in = 0;
    for (const auto& [c, f] : flows) {
      CHECK(f.in == in[c]);
      CHECK(f.out == out[c]);
      sum_in += f.in;
    }
    CHECK(sum_in == total);

    std::set<std::string> sinks{"BB", "DD"};
    add_pass_flows(view, sinks, flows);
    std::map<std::string, double> pass;
    for (auto [x, m] : view.topology().edge_pairs())
      for (auto [m2, y] : view.topology().edge_pairs())
        if (m2 == m && jur[x] != jur[m] && jur[y] != jur[m] && sinks.contains(jur[y])) pass[jur[m]] += 1;
    for (const auto& [c, f] : flows) CHECK(f.pass == pass[c]);
  }
}

TEST_CASE("value mode weights links by their values") {
  auto g = oracle::make_graph(3, {{0, 1}, {1, 2}}, {"AA", "BB", "CC"});
  SubstantialView view(g);
  EdgeValues values{{{0, 1}, 5.0}, {{1, 2}, 2.0}};
  auto flows = cross_border_flows(view, &values);
  CHECK(flows["AA"].out == 5.0);
  CHECK(flows["BB"].in == 5.0);
  CHECK(flows["CC"].in == 2.0);
  add_pass_flows(view, {"CC"}, flows, &values);
  CHECK(flows["BB"].pass == 2.0);

  TempDir dir;
  auto path = dir.write("v.csv", "subsidiary_id,shareholder_id,value\nv0,v1,5\nv1,v2,2\n");
  CHECK(load_edge_values(path, g) == values);
  CHECK_THROWS_AS(load_edge_values(dir.write("w.csv", "subsidiary_id,shareholder_id,value\nv0,v9,5\n"), g), Error);
}

TEST_CASE("tally by jurisdiction counts and ranks") {
  auto g = oracle::make_graph(4, {}, {"US", "NL", "NL", "GB"});
  std::vector<KeyFirmRow> rows{row("M", "v1", Role::Holding), row("M", "v2", Role::Holding),
                               row("N", "v3", Role::Holding), row("N", "v0", Role::None)};
  auto t = tally_by_jurisdiction(rows, g, TallyDimension::Holding);
  REQUIRE(t.size() == 2);
  CHECK(t[0].key == "NL");
  CHECK(t[0].pct == doctest::Approx(200.0 / 3));
  CHECK(t[1].key == "GB");
  CHECK(t[1].pct == doctest::Approx(100.0 / 3));
  CHECK(tally_by_jurisdiction(rows, g, TallyDimension::Conduit).empty());
  CHECK(tally_by_jurisdiction(rows, g, TallyDimension::Affiliates).size() == 3);
  HqLookup hqs{{"M", "v0"}, {"N", "v3"}};
  auto h = tally_by_jurisdiction(rows, g, TallyDimension::Hq, &hqs);
  CHECK(h.size() == 2);
  CHECK_THROWS_AS(tally_by_jurisdiction(rows, g, TallyDimension::Hq), Error);
  for (auto d : {TallyDimension::Hq, TallyDimension::Holding, TallyDimension::HoldingAndConduit,
                 TallyDimension::Conduit, TallyDimension::Affiliates})
    CHECK(parse_dimension(dimension_name(d)) == d);
}

TEST_CASE("tally by bow-tie region") {
  // 0<->1 core, 2 -> 0 IN, 3 isolated
  auto g = oracle::make_graph(4, {{0, 1}, {1, 0}, {2, 0}});
  auto bt = bowtie_decompose(g.topology());
  std::vector<KeyFirmRow> rows{row("M", "v2", Role::Holding), row("M", "v0", Role::Holding), row("M", "v3", Role::Holding)};
  auto t = tally_by_bowtie(rows, g, bt, TallyDimension::Holding);
  CHECK(t.at(Region::IN) == 1);
  CHECK(t.at(Region::GSCC) == 1);
  CHECK(t.at(Region::REST) == 1);
  CHECK(t.at(Region::OUT) == 0);
}

TEST_CASE("chain tables for toy M1 holding firm") {
  auto g = toy_graph();
  SubstantialView view(g);
  std::vector<KeyFirmRow> rows{row("M1", "v1", Role::Holding), row("M1", "v2", Role::HoldingAndConduit)};
  auto c = chain_tables(rows, view, Role::Holding, "NL", 10);
  REQUIRE(c.subsidiaries.size() == 2);
  CHECK(c.subsidiaries[0].key == "FR");
  CHECK(c.subsidiaries[0].pct == doctest::Approx(200.0 / 3));
  CHECK(c.subsidiaries[1].key == "GB");
  REQUIRE(c.shareholders.size() == 1);
  CHECK(c.shareholders[0].key == "JP");
  CHECK(c.shareholders[0].pct == 100.0);
  auto none = chain_tables(rows, view, Role::Conduit, "NL", 10);
  CHECK(none.subsidiaries.empty());
  CHECK_THROWS_AS(chain_tables(rows, view, Role::None, "NL", 10), Error);
}

TEST_CASE("hq tables split key firms by headquarters jurisdiction") {
  auto g = oracle::make_graph(6, {}, {"JP", "US", "NL", "NL", "LU", "GB"});
  std::vector<KeyFirmRow> rows{row("J", "v2", Role::Holding), row("U", "v3", Role::Holding),
                               row("U", "v4", Role::Holding), row("U", "v5", Role::Holding),
                               row("U", "v2", Role::Conduit)};
  auto t = hq_tables(rows, g, {{"J", "v0"}, {"U", "v1"}}, 5);
  const auto& h = t.by_role.at(Role::Holding);
  REQUIRE(h.size() == 2);
  CHECK(h[0].key == "US");
  CHECK(h[0].pct == doctest::Approx(75.0));
  CHECK(h[1].key == "JP");
  CHECK(h[1].pct == doctest::Approx(25.0));
  REQUIRE(t.breakdowns.size() == 2);
  CHECK(t.breakdowns[0].hq_jurisdiction == "US");
  CHECK(t.breakdowns[0].locations.at(Role::Holding).size() == 3);
  CHECK(t.breakdowns[0].locations.at(Role::Conduit).at(0).key == "NL");
}

TEST_CASE("key-firm CSV round-trips byte for byte") {
  std::vector<KeyFirmRow> rows{row("Acme, Inc.", "v1", Role::Holding), row("B", "v\"2", Role::None)};
  rows[0].holding = 7.0 / 6;
  rows[0].conduit = 0.1 + 0.2;
  rows[0].third_country = true;
  rows[0].layer = 1;
  rows[0].k_in = 3;
  rows[0].k_out = 1;
  TempDir dir;
  std::ostringstream first;
  write_keyfirms_csv(first, rows);
  auto path = dir.write("k.csv", first.str());
  auto back = load_keyfirms_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(*back[0].holding == 7.0 / 6);
  CHECK(*back[0].conduit == 0.1 + 0.2);
  CHECK_FALSE(back[1].holding.has_value());
  std::ostringstream second;
  write_keyfirms_csv(second, back);
  CHECK(second.str() == first.str());
  // empty report keeps the header
  std::ostringstream empty;
  write_keyfirms_csv(empty, {});
  CHECK(load_keyfirms_csv(dir.write("e.csv", empty.str())).empty());
}

TEST_CASE("profiles treat blank cells as absent") {
  TempDir dir;
  auto p = load_profiles(dir.write("p.csv", "code,gdp,gdp_year,statutory_rate,wtc\nUS,18.2,2015,35,0.001\nKY,,,0,\n"));
  CHECK(*p.at("US").gdp == 18.2);
  CHECK(*p.at("US").gdp_year == 2015);
  CHECK_FALSE(p.at("KY").gdp.has_value());
  CHECK_FALSE(p.at("KY").wtc.has_value());
  CHECK_THROWS_AS(load_profiles(dir.write("bad.csv", "code,gdp,gdp_year,statutory_rate,wtc\nUS,-1,,,\n")), Error);
}

TEST_CASE("wtc regression counts key firms per jurisdiction") {
  auto g = oracle::make_graph(4, {}, {"AA", "BB", "BB", "CC"});
  std::vector<KeyFirmRow> rows{row("M", "v0", Role::Holding), row("M", "v1", Role::Holding),
                               row("M", "v2", Role::Holding)};
  std::map<std::string, JurisdictionProfile> profiles;
  profiles["AA"] = {"AA", 1.0, 2015, std::nullopt, 1.0};
  profiles["BB"] = {"BB", 1.0, 2015, std::nullopt, 2.0};
  profiles["CC"] = {"CC", 1.0, 2015, std::nullopt, 0.0};
  profiles["DD"] = {"DD", 1.0, 2015, std::nullopt, std::nullopt};
  // points (1,1), (2,2), (0,0): a perfect line
  auto r = wtc_regression(rows, g, profiles, Role::Holding);
  CHECK(r.n == 3);
  CHECK(r.slope == doctest::Approx(1.0));
  CHECK(r.intercept == doctest::Approx(0.0));
}
