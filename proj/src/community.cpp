#include "ownet/community.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ownet/error.hpp"

namespace ownet {

namespace {

inline double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

// A (possibly aggregated) flow network that the optimizer moves nodes on.
struct FlowNetwork {
  std::size_t n = 0;
  std::vector<double> rate;      // visit rate
  std::vector<double> teleport;  // mass leaving by teleportation
  std::vector<std::uint64_t> members;  // original nodes represented
  std::vector<double> out_flow;  // link flow to other nodes
  std::vector<std::size_t> out_off, in_off;
  std::vector<std::uint32_t> out_tgt, in_src;
  std::vector<double> out_w, in_w;
};

struct WeightedEdge {
  std::uint32_t from, to;
  double w;
};

void assemble(FlowNetwork& net, std::vector<WeightedEdge> edges) {
  std::sort(edges.begin(), edges.end(),
            [](const WeightedEdge& a, const WeightedEdge& b) { return a.from != b.from ? a.from < b.from : a.to < b.to; });
  // merge parallel edges produced by aggregation
  std::vector<WeightedEdge> merged;
  for (const auto& e : edges) {
    if (!merged.empty() && merged.back().from == e.from && merged.back().to == e.to) merged.back().w += e.w;
    else merged.push_back(e);
  }
  net.out_off.assign(net.n + 1, 0);
  net.in_off.assign(net.n + 1, 0);
  net.out_flow.assign(net.n, 0.0);
  for (const auto& e : merged) {
    ++net.out_off[e.from + 1];
    ++net.in_off[e.to + 1];
    net.out_flow[e.from] += e.w;
  }
  for (std::size_t v = 0; v < net.n; ++v) {
    net.out_off[v + 1] += net.out_off[v];
    net.in_off[v + 1] += net.in_off[v];
  }
  net.out_tgt.resize(merged.size());
  net.out_w.resize(merged.size());
  net.in_src.resize(merged.size());
  net.in_w.resize(merged.size());
  std::vector<std::size_t> fill(net.in_off.begin(), net.in_off.end() - 1);
  for (std::size_t i = 0; i < merged.size(); ++i) {
    net.out_tgt[i] = merged[i].to;
    net.out_w[i] = merged[i].w;
    auto slot = fill[merged[i].to]++;
    net.in_src[slot] = merged[i].from;
    net.in_w[slot] = merged[i].w;
  }
}

FlowNetwork base_network(const Digraph& g, const FlowDistribution& flow) {
  FlowNetwork net;
  net.n = g.node_count();
  net.rate = flow.rate;
  net.teleport.resize(net.n);
  net.members.assign(net.n, 1);
  std::vector<WeightedEdge> edges;
  edges.reserve(g.edge_count());
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    net.teleport[v] = flow.teleport_flow(g, v);
    const double w = flow.link_flow(g, v);
    for (NodeIndex u : g.successors(v)) edges.push_back({v, u, w});
  }
  assemble(net, std::move(edges));
  return net;
}

struct ModuleStats {
  std::uint64_t members = 0;
  double rate = 0.0;
  double teleport = 0.0;
  double link_exit = 0.0;
};

class Optimizer {
 public:
  Optimizer(const FlowNetwork& net, std::uint64_t total_nodes, double node_entropy_term)
      : net_(net), total_(double(total_nodes)), node_term_(node_entropy_term) {
    module_.resize(net.n);
    std::iota(module_.begin(), module_.end(), 0u);
    stats_.resize(net.n);
    for (std::size_t v = 0; v < net.n; ++v) {
      stats_[v] = {net.members[v], net.rate[v], net.teleport[v], net.out_flow[v]};
    }
    sum_exit_ = 0.0;
    for (const auto& m : stats_) sum_exit_ += exit(m);
    codelength_ = compute_codelength();
  }

  double exit(const ModuleStats& m) const {
    return m.teleport * (total_ - double(m.members)) / total_ + m.link_exit;
  }

  double compute_codelength() const {
    double exit_terms = 0.0, module_terms = 0.0;
    for (const auto& m : stats_) {
      double q = exit(m);
      exit_terms += plogp(q);
      module_terms += plogp(q + m.rate);
    }
    return plogp(sum_exit_) - 2.0 * exit_terms - node_term_ + module_terms;
  }

  // One pass over all nodes in random order; returns the number of moves.
  std::size_t sweep(std::mt19937_64& rng, std::vector<double>* trace) {
    std::vector<std::uint32_t> order(net_.n);
    std::iota(order.begin(), order.end(), 0u);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> to_mod(net_.n, 0.0), from_mod(net_.n, 0.0);
    std::vector<char> touched_flag(net_.n, 0);
    std::vector<std::uint32_t> touched;
    std::size_t moves = 0;

    for (auto v : order) {
      const auto current = module_[v];
      touched.clear();
      auto touch = [&](std::uint32_t m) {
        if (!touched_flag[m]) {
          touched_flag[m] = 1;
          touched.push_back(m);
        }
      };
      for (auto e = net_.out_off[v]; e < net_.out_off[v + 1]; ++e) {
        auto m = module_[net_.out_tgt[e]];
        touch(m);
        to_mod[m] += net_.out_w[e];
      }
      for (auto e = net_.in_off[v]; e < net_.in_off[v + 1]; ++e) {
        auto m = module_[net_.in_src[e]];
        touch(m);
        from_mod[m] += net_.in_w[e];
      }

      const double out_v = net_.out_flow[v];
      const ModuleStats& old_i = stats_[current];
      ModuleStats new_i = old_i;
      new_i.members -= net_.members[v];
      new_i.rate -= net_.rate[v];
      new_i.teleport -= net_.teleport[v];
      new_i.link_exit = old_i.link_exit - (out_v - to_mod[current]) + from_mod[current];
      const double qi_old = exit(old_i), qi_new = exit(new_i);

      double best_delta = 0.0;
      std::uint32_t best = current;
      ModuleStats best_j{};
      std::sort(touched.begin(), touched.end());
      for (auto j : touched) {
        if (j == current) continue;
        const ModuleStats& old_j = stats_[j];
        ModuleStats new_j = old_j;
        new_j.members += net_.members[v];
        new_j.rate += net_.rate[v];
        new_j.teleport += net_.teleport[v];
        new_j.link_exit = old_j.link_exit + (out_v - to_mod[j]) - from_mod[j];
        const double qj_old = exit(old_j), qj_new = exit(new_j);
        const double sum_new = sum_exit_ - qi_old - qj_old + qi_new + qj_new;
        const double delta = plogp(sum_new) - plogp(sum_exit_) -
                             2.0 * (plogp(qi_new) + plogp(qj_new) - plogp(qi_old) - plogp(qj_old)) +
                             plogp(qi_new + new_i.rate) + plogp(qj_new + new_j.rate) -
                             plogp(qi_old + old_i.rate) - plogp(qj_old + old_j.rate);
        // touched is sorted, so strict comparison keeps the lowest id on ties
        if (delta < best_delta) {
          best_delta = delta;
          best = j;
          best_j = new_j;
        }
      }

      for (auto m : touched) {
        to_mod[m] = from_mod[m] = 0.0;
        touched_flag[m] = 0;
      }
      if (best == current || best_delta > -kMoveEpsilon) continue;

      const double qj_old = exit(stats_[best]);
      sum_exit_ += exit(new_i) + exit(best_j) - qi_old - qj_old;
      stats_[current] = new_i;
      stats_[best] = best_j;
      module_[v] = best;
      codelength_ += best_delta;
      ++moves;
      if (trace) trace->push_back(codelength_);
    }
    return moves;
  }

  const std::vector<std::uint32_t>& modules() const { return module_; }
  double codelength() const { return codelength_; }

  static constexpr double kMoveEpsilon = 1e-14;

 private:
  const FlowNetwork& net_;
  double total_;
  double node_term_;
  std::vector<std::uint32_t> module_;
  std::vector<ModuleStats> stats_;
  double sum_exit_ = 0.0;
  double codelength_ = 0.0;
};

// Dense ids in order of first appearance.
std::size_t relabel(std::vector<std::uint32_t>& module) {
  std::vector<std::uint32_t> remap(module.size(), std::uint32_t(-1));
  std::uint32_t next = 0;
  for (auto& m : module) {
    if (remap[m] == std::uint32_t(-1)) remap[m] = next++;
    m = remap[m];
  }
  return next;
}

FlowNetwork aggregate(const FlowNetwork& net, const std::vector<std::uint32_t>& module, std::size_t count) {
  FlowNetwork out;
  out.n = count;
  out.rate.assign(count, 0.0);
  out.teleport.assign(count, 0.0);
  out.members.assign(count, 0);
  std::vector<WeightedEdge> edges;
  for (std::size_t v = 0; v < net.n; ++v) {
    auto m = module[v];
    out.rate[m] += net.rate[v];
    out.teleport[m] += net.teleport[v];
    out.members[m] += net.members[v];
    for (auto e = net.out_off[v]; e < net.out_off[v + 1]; ++e) {
      auto t = module[net.out_tgt[e]];
      if (t != m) edges.push_back({m, t, net.out_w[e]});
    }
  }
  assemble(out, std::move(edges));
  return out;
}

}  // namespace

FlowDistribution stationary_flow(const Digraph& g, double damping, double tolerance, std::size_t max_iterations) {
  if (!(damping > 0.0 && damping < 1.0)) throw Error("damping must lie in (0, 1)");
  if (!(tolerance > 0.0)) throw Error("tolerance must be positive");
  FlowDistribution flow;
  flow.damping = damping;
  const NodeIndex n = g.node_count();
  if (n == 0) return flow;
  const double uniform = 1.0 / double(n);
  std::vector<double> p(n, uniform), next(n);
  double previous_diff = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    double dangling = 0.0;
    for (NodeIndex v = 0; v < n; ++v) {
      if (g.out_degree(v) == 0) dangling += p[v];
    }
    const double base = (damping * dangling + (1.0 - damping)) * uniform;
    std::fill(next.begin(), next.end(), base);
    for (NodeIndex v = 0; v < n; ++v) {
      auto succ = g.successors(v);
      if (succ.empty()) continue;
      const double share = damping * p[v] / double(succ.size());
      for (NodeIndex u : succ) next[u] += share;
    }
    double total = 0.0;
    for (double x : next) total += x;
    double diff = 0.0;
    for (NodeIndex v = 0; v < n; ++v) {
      next[v] /= total;
      diff += std::abs(next[v] - p[v]);
    }
    p.swap(next);
    // The damped walk contracts the error every step; once the change stops
    // shrinking at this size it is rounding noise.
    const bool stalled = diff < 1e-12 && diff >= previous_diff;
    previous_diff = diff;
    if (diff < tolerance || stalled) {
      flow.rate = std::move(p);
      flow.iterations = it;
      return flow;
    }
  }
  throw Error("stationary flow did not converge in " + std::to_string(max_iterations) + " iterations");
}

double flow_entropy(const FlowDistribution& flow) {
  double h = 0.0;
  for (double p : flow.rate) h -= plogp(p);
  return h;
}

double map_equation(const Digraph& g, const FlowDistribution& flow, std::span<const std::uint32_t> module) {
  const NodeIndex n = g.node_count();
  if (module.size() != n || flow.rate.size() != n) throw Error("partition does not match graph");
  if (n == 0) return 0.0;
  std::uint32_t count = 0;
  for (auto m : module) count = std::max(count, m + 1);
  std::vector<double> rate(count, 0.0), tele(count, 0.0), link_exit(count, 0.0);
  std::vector<std::uint64_t> members(count, 0);
  for (NodeIndex v = 0; v < n; ++v) {
    auto m = module[v];
    rate[m] += flow.rate[v];
    tele[m] += flow.teleport_flow(g, v);
    ++members[m];
    const double w = flow.link_flow(g, v);
    for (NodeIndex u : g.successors(v)) {
      if (module[u] != m) link_exit[m] += w;
    }
  }
  double sum_exit = 0.0, exit_terms = 0.0, module_terms = 0.0;
  for (std::uint32_t m = 0; m < count; ++m) {
    if (members[m] == 0) continue;
    const double q = tele[m] * double(n - members[m]) / double(n) + link_exit[m];
    sum_exit += q;
    exit_terms += plogp(q);
    module_terms += plogp(q + rate[m]);
  }
  double node_terms = 0.0;
  for (double p : flow.rate) node_terms += plogp(p);
  return plogp(sum_exit) - 2.0 * exit_terms - node_terms + module_terms;
}

Partition detect_communities(const Digraph& g, const CommunityOptions& options) {
  Partition result;
  const NodeIndex n = g.node_count();
  if (n == 0) return result;

  auto flow = stationary_flow(g, options.damping);
  double node_term = 0.0;
  for (double p : flow.rate) node_term += plogp(p);

  std::mt19937_64 rng(options.seed);
  std::vector<std::uint32_t> assignment(n);
  std::iota(assignment.begin(), assignment.end(), 0u);
  FlowNetwork net = base_network(g, flow);
  std::vector<double>* trace = options.record_trace ? &result.trace : nullptr;

  double previous = std::numeric_limits<double>::infinity();
  while (true) {
    Optimizer opt(net, n, node_term);
    if (trace && trace->empty()) trace->push_back(opt.codelength());
    double before_sweep = opt.codelength();
    for (int pass = 0; pass < 200; ++pass) {
      if (opt.sweep(rng, trace) == 0) break;
      if (before_sweep - opt.codelength() < options.min_improvement) break;
      before_sweep = opt.codelength();
    }
    auto level_modules = opt.modules();
    const std::size_t count = relabel(level_modules);
    if (count == net.n) break;
    for (auto& a : assignment) a = level_modules[a];
    const double level_codelength = opt.codelength();
    const bool converged = previous - level_codelength < options.min_improvement;
    previous = level_codelength;
    if (converged) break;
    net = aggregate(net, level_modules, count);
  }

  result.module = assignment;
  result.module_count = relabel(result.module);
  result.codelength = map_equation(g, flow, result.module);

  // The one-module solution is always a candidate.
  std::vector<std::uint32_t> single(n, 0);
  const double one_module = map_equation(g, flow, single);
  if (one_module < result.codelength) {
    result.module = std::move(single);
    result.module_count = 1;
    result.codelength = one_module;
  }
  return result;
}

std::map<std::uint64_t, std::size_t> community_size_histogram(const Partition& partition) {
  std::vector<std::uint64_t> sizes(partition.module_count, 0);
  for (auto m : partition.module) ++sizes[m];
  std::map<std::uint64_t, std::size_t> hist;
  for (auto s : sizes) {
    if (s) ++hist[s];
  }
  return hist;
}

}  // namespace ownet
