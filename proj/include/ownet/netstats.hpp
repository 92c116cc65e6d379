#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ownet/graph.hpp"

namespace ownet {

enum class DegreeDirection { In, Out, Total };
const char* direction_name(DegreeDirection d);

struct LogBin {
  double lo;  // inclusive
  double hi;  // exclusive
  std::size_t count;
  double density;  // count / (samples * (hi - lo))
};

/// Geometric bins [r^i, r^(i+1)) over positive integer samples. Only occupied
/// bins are returned; zero-valued samples are ignored.
std::vector<LogBin> log_bin(const std::map<std::uint64_t, std::size_t>& counts, double bin_ratio);

struct DegreeHistogram {
  DegreeDirection direction;
  double bin_ratio;
  std::map<std::uint64_t, std::size_t> raw;  // includes degree 0
  std::vector<LogBin> bins;                  // excludes degree 0
};

DegreeHistogram degree_histogram(const Digraph& g, DegreeDirection direction, double bin_ratio = 2.0);

std::vector<std::uint64_t> degree_samples(const Digraph& g, DegreeDirection direction);

/// Hurwitz zeta function sum_{k>=0} (q + k)^-s for s > 1, q > 0.
double hurwitz_zeta(double s, double q);

struct PowerLawFit {
  double gamma = 0.0;
  std::uint64_t x_min = 1;
  std::size_t n = 0;  // samples >= x_min
  double log_likelihood = 0.0;
  double ks_distance = 0.0;
};

struct PowerLawOptions {
  /// Fixed lower cutoff; when empty the cutoff minimizing the KS distance is chosen.
  std::optional<std::uint64_t> x_min;
  std::size_t min_tail = 50;
  /// Number of smallest distinct sample values tried as cutoffs during KS selection.
  std::size_t max_candidates = 100;
};

/// Exact discrete maximum-likelihood exponent of P(x) = x^-gamma / zeta(gamma, x_min).
PowerLawFit fit_power_law(std::span<const std::uint64_t> samples, const PowerLawOptions& options = {});

/// Least-squares slope of log(density) against log(geometric bin centre),
/// negated so that it is comparable with a power-law exponent.
double binned_exponent(std::span<const LogBin> bins);

struct StatPoint {
  double mean = 0.0;
  std::size_t count = 0;
};
/// degree k -> average of a per-node quantity over nodes of degree k.
using StatCurve = std::map<std::uint32_t, StatPoint>;

/// Undirected simple neighbourhoods: reciprocal and antiparallel edges collapse.
struct UndirectedAdjacency {
  std::vector<std::size_t> offsets;
  std::vector<NodeIndex> neighbors;  // sorted per node
  std::span<const NodeIndex> of(NodeIndex v) const {
    return {neighbors.data() + offsets[v], neighbors.data() + offsets[v + 1]};
  }
  std::uint32_t degree(NodeIndex v) const { return static_cast<std::uint32_t>(offsets[v + 1] - offsets[v]); }
};
UndirectedAdjacency undirected_view(const Digraph& g);

/// Triangles through each node of the undirected simple view.
std::vector<std::uint64_t> triangles_per_node(const UndirectedAdjacency& adj);

/// Local clustering averaged over nodes of equal undirected degree; nodes of
/// degree below two contribute 0. Isolated nodes are omitted.
StatCurve clustering_by_degree(const Digraph& g);

/// Mean neighbour degree averaged over nodes of equal undirected degree.
/// Isolated nodes are omitted.
StatCurve knn_by_degree(const Digraph& g);

}  // namespace ownet
