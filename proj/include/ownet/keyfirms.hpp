#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ownet/graph.hpp"
#include "ownet/mnc.hpp"

namespace ownet {

/// Key-company role. Values are bit sets so that merging two labels is a
/// bitwise union: Holding | Conduit == HoldingAndConduit.
enum class Role : std::uint8_t { None = 0, Holding = 1, Conduit = 2, HoldingAndConduit = 3 };

inline Role merge_roles(Role a, Role b) {
  return static_cast<Role>(static_cast<std::uint8_t>(a) | static_cast<std::uint8_t>(b));
}
const char* role_name(Role r);
Role parse_role(std::string_view text);

struct CentralityRecord {
  NodeIndex affiliate = 0;
  std::uint32_t layer = 0;
  std::uint32_t k_in = 0;
  std::uint32_t k_out = 0;
  std::optional<double> holding;  // empty when the denominators vanish
  std::optional<double> conduit;  // present only where the conduit test ran
  bool third_country = false;
  Role role = Role::None;
};

/// H = ((k_in - k_out) / sum k_in) * (sum (k_in + k_out) / (k_in + k_out)),
/// sums over the subtree's affiliates. Throws DegenerateError when the
/// affiliate is isolated or the subtree has no in-links.
double holding_centrality(const MncSubtree& subtree, std::size_t position);

/// T = (k_in / sum k_in k_out) * (sum (k_in + k_out) / (k_in + k_out)).
/// Throws DegenerateError when the affiliate is isolated or sum k_in k_out = 0.
double conduit_centrality(const MncSubtree& subtree, std::size_t position);

/// The affiliate sits outside the headquarters' jurisdiction and outside the
/// jurisdiction of at least one of its direct subsidiaries in the subtree.
bool third_country(const SubstantialView& view, const MncSubtree& subtree, NodeIndex affiliate);

/// Layer-by-layer search: a positive-H, third-country affiliate becomes a
/// holding company once one of its direct subsidiaries shows positive T and
/// meets the third-country condition; that subsidiary is a conduit and, if it
/// also has positive H, a holding-and-conduit company whose own subsidiaries
/// are examined next. Records are returned in subtree order.
std::vector<CentralityRecord> hierarchical_identify(const SubstantialView& view, const MncSubtree& subtree);

struct RoleTally {
  std::size_t holding = 0;
  std::size_t holding_and_conduit = 0;
  std::size_t conduit = 0;
  void add(Role r);
  RoleTally& operator+=(const RoleTally& o);
  bool operator==(const RoleTally&) const = default;
};

struct MncResult {
  HqEntry entry;
  NodeIndex hq = 0;
  MncSubtree subtree;
  std::vector<CentralityRecord> records;
  RoleTally tally;
  std::optional<std::string> error;
};

struct Classification {
  std::vector<MncResult> mncs;  // HQ-list order
  RoleTally total;              // over (MNC, affiliate) pairs
  std::size_t failed = 0;
};

/// Runs extraction and identification for every headquarters. Failures are
/// recorded per MNC and do not stop the run.
Classification classify_all(const SubstantialView& view, const std::vector<HqEntry>& hqs,
                            DegreeScope scope = DegreeScope::Within, unsigned threads = 1);

}  // namespace ownet
