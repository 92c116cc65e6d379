#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ownet/components.hpp"
#include "ownet/graph.hpp"
#include "ownet/keyfirms.hpp"
#include "ownet/regression.hpp"

namespace ownet {

inline constexpr double kSinkThreshold = 10.0;
inline constexpr double kConduitThreshold = 1.0;

struct JurisdictionProfile {
  std::string code;
  std::optional<double> gdp;
  std::optional<int> gdp_year;
  std::optional<double> statutory_rate;
  std::optional<double> wtc;  // withholding-tax centrality, external input
};

/// Reads `code,gdp,gdp_year,statutory_rate,wtc`; blank cells are absent values.
std::map<std::string, JurisdictionProfile> load_profiles(const std::string& path);

struct JurisdictionFlow {
  double in = 0.0;
  double out = 0.0;
  double pass = 0.0;
};
using FlowAggregate = std::map<std::string, JurisdictionFlow>;

/// Optional per-edge capital values keyed by (subsidiary, shareholder).
using EdgeValues = std::map<std::pair<NodeIndex, NodeIndex>, double>;
/// Reads `subsidiary_id,shareholder_id,value`.
EdgeValues load_edge_values(const std::string& path, const OwnershipGraph& graph);

/// V_in / V_out per jurisdiction from substantial edges whose endpoints lie in
/// different jurisdictions. Each edge counts 1 (or its value when `values` is
/// given); capital leaves the subsidiary's jurisdiction and enters the
/// shareholder's.
FlowAggregate cross_border_flows(const SubstantialView& view, const EdgeValues* values = nullptr);

/// Adds V_pass: for every substantial 2-path x -> m -> y with
/// jurisdiction(x) != jurisdiction(m) != jurisdiction(y) and y's jurisdiction
/// in `sinks`, m's jurisdiction accrues 1 (or the smaller of the two edge
/// values).
void add_pass_flows(const SubstantialView& view, const std::set<std::string>& sinks, FlowAggregate& flows,
                    const EdgeValues* values = nullptr);

struct JurisdictionScore {
  std::string code;
  double value = 0.0;
  bool flagged = false;
};
struct ScoreReport {
  std::vector<JurisdictionScore> scores;  // by code
  std::vector<std::string> skipped;       // no GDP on record
};

/// S_j = ((V_in - V_out) / sum V_in) * (sum GDP / GDP_j); flagged when S_j > 10.
ScoreReport sink_centrality(const FlowAggregate& flows, const std::map<std::string, JurisdictionProfile>& profiles);

/// C_j = (V_pass / sum V_pass) * (sum GDP / GDP_j); flagged when C_j > 1.
ScoreReport conduit_outward_centrality(const FlowAggregate& flows,
                                       const std::map<std::string, JurisdictionProfile>& profiles);

/// Flat view of one row of the key-firm report.
struct KeyFirmRow {
  std::string mnc;
  std::string affiliate_id;
  std::uint32_t layer = 0;
  std::uint32_t k_in = 0;
  std::uint32_t k_out = 0;
  std::optional<double> holding;
  std::optional<double> conduit;
  bool third_country = false;
  Role role = Role::None;
};

std::vector<KeyFirmRow> keyfirm_rows(const Classification& c, const OwnershipGraph& graph);
void write_keyfirms_csv(std::ostream& out, const std::vector<KeyFirmRow>& rows);
std::vector<KeyFirmRow> load_keyfirms_csv(const std::string& path);

struct TallyRow {
  std::string key;
  std::size_t count = 0;
  double pct = 0.0;  // share of the table total, in percent
};

enum class TallyDimension { Hq, Holding, HoldingAndConduit, Conduit, Affiliates };
const char* dimension_name(TallyDimension d);
TallyDimension parse_dimension(std::string_view text);

/// mnc name -> headquarters node id
using HqLookup = std::map<std::string, std::string>;

/// Counts per jurisdiction, descending by count then ascending by code. For
/// the Hq dimension each MNC present in `rows` contributes its headquarters once.
std::vector<TallyRow> tally_by_jurisdiction(const std::vector<KeyFirmRow>& rows, const OwnershipGraph& graph,
                                            TallyDimension dimension, const HqLookup* hqs = nullptr);

/// Region of each selected firm: GSCC, IN, OUT, TE, or REST outside the GWCC.
std::map<Region, std::size_t> tally_by_bowtie(const std::vector<KeyFirmRow>& rows, const OwnershipGraph& graph,
                                              const BowTie& bowtie, TallyDimension dimension,
                                              const HqLookup* hqs = nullptr);

struct ChainTables {
  std::vector<TallyRow> subsidiaries;  // jurisdictions of direct substantial subsidiaries
  std::vector<TallyRow> shareholders;  // jurisdictions of direct substantial shareholders
};
/// Over the distinct firms holding `role` and located in `jurisdiction`.
ChainTables chain_tables(const std::vector<KeyFirmRow>& rows, const SubstantialView& view, Role role,
                         const std::string& jurisdiction, std::size_t top_k);

struct HqTables {
  /// role -> key firms' share per headquarters jurisdiction
  std::map<Role, std::vector<TallyRow>> by_role;
  struct Breakdown {
    std::string hq_jurisdiction;
    std::map<Role, std::vector<TallyRow>> locations;  // key-firm jurisdictions
  };
  /// For the top_k headquarters jurisdictions by number of key firms.
  std::vector<Breakdown> breakdowns;
};
HqTables hq_tables(const std::vector<KeyFirmRow>& rows, const OwnershipGraph& graph, const HqLookup& hqs,
                   std::size_t top_k);

/// Per-jurisdiction count of key firms holding `role`, regressed on the
/// withholding-tax centrality over every jurisdiction with a wtc value.
RegressionResult wtc_regression(const std::vector<KeyFirmRow>& rows, const OwnershipGraph& graph,
                                const std::map<std::string, JurisdictionProfile>& profiles, Role role);

}  // namespace ownet
