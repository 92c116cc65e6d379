#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "ownet/graph.hpp"

namespace ownet {

/// Stationary visit rates of a random walker that follows a uniformly chosen
/// out-link with probability `damping` and otherwise (or from a dangling node)
/// jumps to a uniformly chosen node.
struct FlowDistribution {
  std::vector<double> rate;
  double damping = 0.85;
  std::size_t iterations = 0;

  /// Flow on each out-link of v; zero for dangling nodes.
  double link_flow(const Digraph& g, NodeIndex v) const {
    auto k = g.out_degree(v);
    return k ? damping * rate[v] / k : 0.0;
  }
  /// Probability mass leaving v by teleportation.
  double teleport_flow(const Digraph& g, NodeIndex v) const {
    return g.out_degree(v) ? (1.0 - damping) * rate[v] : rate[v];
  }
};

FlowDistribution stationary_flow(const Digraph& g, double damping = 0.85, double tolerance = 1e-15,
                                 std::size_t max_iterations = 100000);

struct Partition {
  std::vector<std::uint32_t> module;  // node -> community id
  std::size_t module_count = 0;
  double codelength = 0.0;            // bits
  /// Codelength after every accepted move, when requested.
  std::vector<double> trace;
};

/// Two-level map equation L(M) = q H(Q) + sum_i p_i H(P_i) with recorded
/// teleportation: exit flow of module i counts link flow to other modules and
/// teleportation landing outside i.
double map_equation(const Digraph& g, const FlowDistribution& flow, std::span<const std::uint32_t> module);

/// Entropy in bits of the node visit rates (the one-module codelength).
double flow_entropy(const FlowDistribution& flow);

struct CommunityOptions {
  std::uint64_t seed = 1;
  double damping = 0.85;
  double min_improvement = 1e-10;
  bool record_trace = false;
};

/// Greedy node moving with repeated module aggregation. Community ids are
/// assigned in order of each community's smallest node index.
Partition detect_communities(const Digraph& g, const CommunityOptions& options = {});

/// size -> number of communities of that size.
std::map<std::uint64_t, std::size_t> community_size_histogram(const Partition& partition);

}  // namespace ownet
