#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ownet/graph.hpp"

namespace ownet {

struct ComponentLabeling {
  std::vector<std::uint32_t> label;  // node -> component id
  std::vector<std::size_t> sizes;    // component id -> size
  std::uint32_t largest = 0;         // ties broken by smallest contained node

  std::size_t component_count() const noexcept { return sizes.size(); }
};

/// Components of the undirected view. Component ids are assigned in order of
/// each component's smallest node index.
ComponentLabeling weak_components(const Digraph& g);

/// Strongly connected components via an iterative Tarjan traversal; ids are
/// assigned in order of each component's smallest node index.
ComponentLabeling strong_components(const Digraph& g);

enum class Region : std::uint8_t { GSCC, IN, OUT, TE, REST };
const char* region_name(Region r);

struct BowTie {
  std::vector<Region> region;  // REST for nodes outside the GWCC
  std::size_t gscc = 0, in = 0, out = 0, te = 0;
  std::size_t gwcc_size() const noexcept { return gscc + in + out + te; }
  std::size_t count(Region r) const;
};

/// Splits the giant weakly connected component into GSCC / IN / OUT / TE.
/// The GSCC is the largest strong component inside the GWCC.
BowTie bowtie_decompose(const Digraph& g);

/// Percentage `100 * count / total`, rounded half-up to three decimals
/// and rendered with exactly three fractional digits (e.g. "17.015").
std::string format_ratio(std::size_t count, std::size_t total);

/// size -> number of components of that size.
std::map<std::size_t, std::size_t> component_size_histogram(const ComponentLabeling& labeling,
                                                            bool exclude_largest);

enum class DistanceDirection { InToGscc, GsccToOut };

struct DistanceHistogram {
  DistanceDirection direction;
  std::map<std::uint32_t, std::size_t> counts;  // hops -> nodes
  std::size_t total = 0;
  double ratio(std::uint32_t d) const;
};

/// Shortest hop distance between each IN (resp. OUT) node and the GSCC by a
/// multi-source BFS seeded with every GSCC node. With `reverse_orientation`
/// edges are walked against their stored direction.
DistanceHistogram distance_distribution(const Digraph& g, const BowTie& bowtie, DistanceDirection direction,
                                        bool reverse_orientation = false);

/// Parses "in" / "out".
DistanceDirection parse_direction(const std::string& text);

}  // namespace ownet
