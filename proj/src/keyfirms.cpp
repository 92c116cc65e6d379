#include "ownet/keyfirms.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "ownet/error.hpp"

namespace ownet {

const char* role_name(Role r) {
  switch (r) {
    case Role::None: return "None";
    case Role::Holding: return "Holding";
    case Role::Conduit: return "Conduit";
    case Role::HoldingAndConduit: return "HoldingAndConduit";
  }
  return "?";
}

Role parse_role(std::string_view text) {
  if (text == "None") return Role::None;
  if (text == "Holding") return Role::Holding;
  if (text == "Conduit") return Role::Conduit;
  if (text == "HoldingAndConduit") return Role::HoldingAndConduit;
  throw Error("unknown role `" + std::string(text) + "`");
}

double holding_centrality(const MncSubtree& t, std::size_t i) {
  const std::int64_t k_in = t.k_in.at(i), k_out = t.k_out.at(i);
  if (k_in + k_out == 0) throw DegenerateError("holding centrality of an isolated affiliate");
  if (t.sum_k_in == 0) throw DegenerateError("holding centrality undefined: subtree has no in-links");
  // One rounding: form the exact integer numerator and denominator first.
  const long double num = static_cast<long double>(k_in - k_out) * static_cast<long double>(t.sum_k_total);
  const long double den = static_cast<long double>(t.sum_k_in) * static_cast<long double>(k_in + k_out);
  return static_cast<double>(num / den);
}

double conduit_centrality(const MncSubtree& t, std::size_t i) {
  const std::int64_t k_in = t.k_in.at(i), k_out = t.k_out.at(i);
  if (k_in + k_out == 0) throw DegenerateError("conduit centrality of an isolated affiliate");
  if (t.sum_k_product == 0) throw DegenerateError("conduit centrality undefined: sum of k_in * k_out is zero");
  const long double num = static_cast<long double>(k_in) * static_cast<long double>(t.sum_k_total);
  const long double den = static_cast<long double>(t.sum_k_product) * static_cast<long double>(k_in + k_out);
  return static_cast<double>(num / den);
}

bool third_country(const SubstantialView& view, const MncSubtree& t, NodeIndex affiliate) {
  const auto& g = view.graph();
  const auto& home = g.node(affiliate).jurisdiction;
  if (!jurisdictions_differ(home, g.node(t.hq).jurisdiction)) return false;
  for (NodeIndex s : view.topology().predecessors(affiliate)) {
    if (t.contains(s) && jurisdictions_differ(g.node(s).jurisdiction, home)) return true;
  }
  return false;
}

std::vector<CentralityRecord> hierarchical_identify(const SubstantialView& view, const MncSubtree& t) {
  std::vector<CentralityRecord> rec(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto& r = rec[i];
    r.affiliate = t.affiliates[i];
    r.layer = t.layer[i];
    r.k_in = t.k_in[i];
    r.k_out = t.k_out[i];
    r.third_country = third_country(view, t, r.affiliate);
    if (r.k_in + r.k_out > 0 && t.sum_k_in > 0) r.holding = holding_centrality(t, i);
  }
  auto conduit_of = [&](std::size_t i) -> std::optional<double> {
    if (!rec[i].conduit && rec[i].k_in + rec[i].k_out > 0 && t.sum_k_product > 0) {
      rec[i].conduit = conduit_centrality(t, i);
    }
    return rec[i].conduit;
  };
  auto holds = [&](std::size_t i) { return rec[i].holding && *rec[i].holding > 0.0 && rec[i].third_country; };

  std::vector<char> expanded(t.size(), 0);
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < t.size() && t.layer[i] == 1; ++i) {
    conduit_of(i);  // diagnostic only, never labels a layer-1 conduit
    if (holds(i)) pending.push_back(i);
  }
  while (!pending.empty()) {
    const std::size_t p = pending.back();
    pending.pop_back();
    if (expanded[p]) continue;
    expanded[p] = 1;
    auto children = subtree_subsidiaries(view, t, t.affiliates[p]);
    // Walk children in descending index so the stack pops them ascending.
    std::sort(children.begin(), children.end(), std::greater<>());
    for (NodeIndex child : children) {
      const std::size_t c = *t.find(child);
      auto T = conduit_of(c);
      if (!T || !(*T > 0.0) || !rec[c].third_country) continue;
      rec[p].role = merge_roles(rec[p].role, Role::Holding);
      rec[c].role = merge_roles(rec[c].role, Role::Conduit);
      if (holds(c)) {
        rec[c].role = merge_roles(rec[c].role, Role::Holding);
        if (!expanded[c]) pending.push_back(c);
      }
    }
  }
  return rec;
}

void RoleTally::add(Role r) {
  switch (r) {
    case Role::Holding: ++holding; break;
    case Role::HoldingAndConduit: ++holding_and_conduit; break;
    case Role::Conduit: ++conduit; break;
    case Role::None: break;
  }
}

RoleTally& RoleTally::operator+=(const RoleTally& o) {
  holding += o.holding;
  holding_and_conduit += o.holding_and_conduit;
  conduit += o.conduit;
  return *this;
}

Classification classify_all(const SubstantialView& view, const std::vector<HqEntry>& hqs, DegreeScope scope,
                            unsigned threads) {
  Classification out;
  out.mncs.resize(hqs.size());
  auto run_one = [&](std::size_t i) {
    MncResult& m = out.mncs[i];
    m.entry = hqs[i];
    try {
      m.hq = view.graph().index_of(hqs[i].hq_id);
      m.subtree = extract_mnc(view, m.hq, scope);
      m.records = hierarchical_identify(view, m.subtree);
      for (const auto& r : m.records) m.tally.add(r.role);
    } catch (const std::exception& e) {
      m.error = e.what();
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1 || hqs.size() < 2) {
    for (std::size_t i = 0; i < hqs.size(); ++i) run_one(i);
  } else {
    // Each worker writes only its own slots, so the result is order independent.
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(threads, hqs.size()); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < hqs.size();) run_one(i);
      });
    }
  }
  for (const auto& m : out.mncs) {
    if (m.error) ++out.failed;
    out.total += m.tally;
  }
  return out;
}

}  // namespace ownet
