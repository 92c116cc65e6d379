#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ownet/community.hpp"
#include "ownet/components.hpp"
#include "ownet/graph.hpp"
#include "ownet/jurisdiction.hpp"
#include "ownet/keyfirms.hpp"
#include "ownet/mnc.hpp"

namespace ownet {

struct StageToggles {
  bool bowtie = true;
  bool stats = true;
  bool communities = true;
  bool extract = true;
  bool identify = true;
  bool jurisdiction = true;
};

struct RunConfig {
  std::string nodes;
  std::string edges;
  std::string hqs;
  std::string profiles;
  std::string edge_values;  // optional, switches jurisdiction flows to value mode
  std::string out_dir = "out";
  std::string cache_path;   // empty: $OWNET_CACHE_DIR/graph.bin, else <out_dir>/cache/graph.bin
  bool rebuild_cache = false;
  double threshold = kSubstantialPct;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  StageToggles stages;
  bool communities_full_graph = false;
  DegreeScope degree_scope = DegreeScope::Within;
  double bin_ratio = 2.0;
  std::size_t top_k = 10;
  bool reverse_distances = false;
};

/// Reads a JSON run configuration. Relative input paths are resolved against
/// the configuration file's directory.
RunConfig load_config(const std::string& path);

/// Throws naming the first missing input required by an enabled stage.
void validate_config(const RunConfig& config);

std::string default_cache_path(const std::string& out_dir);

struct ArtifactEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
};

struct StageEntry {
  std::string name;
  std::string status;  // ok | failed | skipped
  std::vector<ArtifactEntry> artifacts;
  std::string error;
};

struct Manifest {
  std::vector<StageEntry> stages;
  bool ok = true;

  std::string to_json() const;
  static Manifest from_json(const std::string& text);
};

struct PipelineResult {
  int exit_status = 0;
  Manifest manifest;
};

/// ingest -> bowtie -> stats -> communities -> extract -> identify ->
/// jurisdiction. Writes <out_dir>/manifest.json, also when a stage fails.
PipelineResult run_pipeline(const RunConfig& config);

// Stage writers shared with the command-line front end. Each returns the
// paths it wrote, relative to `dir`.

/// Loads the graph from `cache_path` when present (unless `rebuild`),
/// otherwise ingests the CSV files and writes the cache.
OwnershipGraph load_or_build_graph(const std::string& nodes, const std::string& edges,
                                   const std::string& cache_path, bool rebuild);

std::vector<std::string> write_ingest_summary(const OwnershipGraph& graph, const std::string& dir);
std::vector<std::string> write_bowtie(const OwnershipGraph& graph, const BowTie& bowtie, const std::string& dir,
                                      bool reverse_distances);
void write_distance_csv(const DistanceHistogram& hist, const std::string& path);
std::vector<std::string> write_stats(const OwnershipGraph& graph, const std::string& dir, double bin_ratio);
std::vector<std::string> write_communities(const OwnershipGraph& graph, const std::string& dir, std::uint64_t seed,
                                           bool full_graph);
std::vector<std::string> write_extract(const OwnershipGraph& graph, const Classification& c, const std::string& dir);
std::vector<std::string> write_identify(const OwnershipGraph& graph, const Classification& c, const std::string& dir);
std::vector<std::string> write_jurisdiction(const SubstantialView& view, const std::vector<KeyFirmRow>& rows,
                                            const std::map<std::string, JurisdictionProfile>& profiles,
                                            const HqLookup* hqs, const BowTie* bowtie, const EdgeValues* values,
                                            const std::string& dir, std::size_t top_k);

HqLookup make_hq_lookup(const std::vector<HqEntry>& hqs);

/// Verifies every artifact hash of `<out_dir>/manifest.json` and writes the
/// human-readable summary plus table and figure data under <out_dir>/report.
/// Returns the summary text.
std::string write_report(const std::string& out_dir);

}  // namespace ownet
