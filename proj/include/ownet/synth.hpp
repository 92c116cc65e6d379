#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ownet/components.hpp"
#include "ownet/graph.hpp"
#include "ownet/jurisdiction.hpp"
#include "ownet/keyfirms.hpp"
#include "ownet/mnc.hpp"

namespace ownet::synth {

/// Portable helpers over mt19937_64 so that generated files do not depend on
/// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  bool chance(double p) { return uniform() < p; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Discrete power law P(x) proportional to x^-gamma for x >= x_min. The
/// cumulative table is summed directly up to a cutoff; the remaining tail
/// (mass below 1e-5 for gamma >= 2) is drawn from its continuous
/// approximation.
class PowerLawSampler {
 public:
  PowerLawSampler(double gamma, std::uint64_t x_min = 1, std::uint64_t table_size = 1u << 17);
  std::uint64_t operator()(Rng& rng) const;
  double mean() const noexcept { return mean_; }

 private:
  double gamma_;
  std::uint64_t x_min_;
  std::uint64_t cutoff_;
  std::vector<double> cdf_;
  double table_mass_;
  double mean_;
};

struct SynthSpec {
  std::uint64_t seed = 1;
  std::size_t nodes = 1000;  // background scale-free population
  double gamma_in = 2.44;
  double gamma_out = 3.00;
  double mean_degree = 0.7;      // background edges per node
  double noise_edge_rate = 0.0;  // extra self-loop rows, per background edge
  std::size_t mncs = 0;          // randomly templated planted MNCs
  std::size_t mnc_min_affiliates = 4;
  std::size_t mnc_max_affiliates = 30;
  double multi_parent_rate = 0.15;
  double cycle_rate = 0.1;
  double in_target_fraction = 0.5;  // remaining MNCs are placed in the tendrils
  bool include_toy = true;
  std::size_t core_size = 100;
};

SynthSpec parse_spec_json(const std::string& json_text);
std::string spec_to_json(const SynthSpec& spec);

/// Local description of one MNC; node 0 is the headquarters.
struct MncTemplate {
  std::string name;
  std::vector<std::string> jurisdiction;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // (subsidiary, shareholder)
  std::map<std::uint32_t, Role> intended;                      // optional expected roles
};

MncTemplate toy_m1_template();
MncTemplate random_template(Rng& rng, const std::string& name, std::size_t affiliates, double multi_parent_rate,
                            double cycle_rate);

/// Ground-truth roles from a direct closure formulation over the template,
/// using exact integer sign tests on the centralities. Index 0 (HQ) is None.
std::vector<Role> evaluate_template(const MncTemplate& t);

struct PlantedMnc {
  std::string hq_id;
  std::vector<NodeRecord> nodes;
  std::vector<OwnershipEdge> edges;
  std::vector<std::pair<std::string, Role>> truth;  // affiliates only
};

/// Materializes a template with ids `<prefix><local>`. Throws when the
/// template's intended roles disagree with `evaluate_template`.
PlantedMnc plant_mnc(const MncTemplate& t, const std::string& id_prefix, Rng& rng);

struct TruthRow {
  std::string mnc;
  std::string affiliate_id;
  Role role;
  Region target;
};

struct Corpus {
  std::vector<NodeRecord> nodes;
  std::vector<OwnershipEdge> edges;
  std::size_t noise_rows = 0;  // injected self-loop rows, present only in the written edge file
  std::vector<HqEntry> hqs;
  std::vector<TruthRow> truth;
  std::map<std::string, JurisdictionProfile> profiles;

  RoleTally planted_tally() const;
};

/// Background scale-free graph only (configuration model).
Corpus generate_scale_free(const SynthSpec& spec);

/// Background graph, a strongly connected core and the planted MNCs. MNCs
/// targeted at IN hold a non-substantial stake in the core; MNCs targeted at
/// the tendrils are held by the core.
Corpus generate_corpus(const SynthSpec& spec);

/// Writes nodes.csv, edges.csv, hqs.csv, truth.csv and profiles.csv into `dir`.
void write_corpus(const Corpus& corpus, const std::string& dir);

}  // namespace ownet::synth
