// ownet: command-line front end for the ownership-network analyses.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ownet/components.hpp"
#include "ownet/csv.hpp"
#include "ownet/error.hpp"
#include "ownet/jurisdiction.hpp"
#include "ownet/keyfirms.hpp"
#include "ownet/pipeline.hpp"
#include "ownet/synth.hpp"

namespace fs = std::filesystem;
using namespace ownet;

namespace {

struct GraphInput {
  std::string graph;  // binary cache
  std::string nodes;
  std::string edges;
  bool rebuild = false;
};

void add_graph_options(CLI::App* cmd, GraphInput& in) {
  cmd->add_option("--graph", in.graph, "Binary graph cache (read, or written after ingest)");
  cmd->add_option("--nodes", in.nodes, "Node CSV");
  cmd->add_option("--edges", in.edges, "Edge CSV");
  cmd->add_flag("--rebuild", in.rebuild, "Ignore an existing cache and re-ingest the CSV files");
}

// Fills unset inputs from the run configuration.
void apply_config(const std::optional<RunConfig>& cfg, GraphInput& in) {
  if (!cfg) return;
  if (in.nodes.empty()) in.nodes = cfg->nodes;
  if (in.edges.empty()) in.edges = cfg->edges;
  if (in.graph.empty()) in.graph = cfg->cache_path;
}

OwnershipGraph open_graph(GraphInput in) {
  if (in.graph.empty()) in.graph = default_cache_path("out");
  const bool have_csv = !in.nodes.empty() && !in.edges.empty();
  if (!have_csv && !fs::exists(in.graph)) {
    throw Error("no graph: " + in.graph + " does not exist and no --nodes/--edges given");
  }
  return load_or_build_graph(in.nodes, in.edges, in.graph, in.rebuild && have_csv);
}

std::ofstream open_file(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ownership-network analysis"};
  app.require_subcommand(1);

  std::string config_path;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--threads", threads, "Worker cap for parallel stages")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Random seed");

  // ingest
  GraphInput ingest_in;
  std::string ingest_out = "out/ingest";
  auto* ingest = app.add_subcommand("ingest", "Parse the CSV files and write the graph cache");
  add_graph_options(ingest, ingest_in);
  ingest->add_option("--out", ingest_out, "Directory for the ingest summary");

  // bowtie / distances
  GraphInput bowtie_in;
  std::string bowtie_out = "bowtie.csv";
  auto* bowtie = app.add_subcommand("bowtie", "Bow-tie decomposition of the largest weak component");
  add_graph_options(bowtie, bowtie_in);
  bowtie->add_option("--out", bowtie_out, "Output CSV (node_id,region)");

  GraphInput dist_in;
  std::string dist_dir = "in", dist_out;
  bool dist_reverse = false;
  auto* distances = app.add_subcommand("distances", "Shortest-distance distribution to/from the GSCC");
  add_graph_options(distances, dist_in);
  distances->add_option("--direction", dist_dir, "in | out")->check(CLI::IsMember({"in", "out"}));
  distances->add_flag("--reverse", dist_reverse, "Measure along reversed links");
  distances->add_option("--out", dist_out, "Output CSV (default: stdout)");

  // stats
  GraphInput stats_in;
  std::string stats_out = "stats";
  double bin_ratio = 2.0;
  auto* stats = app.add_subcommand("stats", "Degree distributions, clustering and nearest-neighbour degree");
  add_graph_options(stats, stats_in);
  stats->add_option("--out", stats_out, "Output directory");
  stats->add_option("--bin-ratio", bin_ratio, "Logarithmic bin ratio")->check(CLI::Range(1.0001, 1e6));

  // communities
  GraphInput comm_in;
  std::string comm_out = "communities.csv";
  bool comm_full = false;
  auto* comm = app.add_subcommand("communities", "Map-equation community detection");
  add_graph_options(comm, comm_in);
  comm->add_option("--out", comm_out, "Output CSV (node_id,community_id); dsizes.csv goes beside it");
  comm->add_flag("--full-graph", comm_full, "Use the whole graph instead of the largest weak component");

  // extract / identify
  GraphInput mnc_in;
  std::string hqs_path, extract_out = "extract", identify_out = "keyfirms.csv";
  double threshold = kSubstantialPct;
  bool global_degrees = false;
  auto* extract = app.add_subcommand("extract", "Per-MNC affiliate subtrees");
  auto* identify = app.add_subcommand("identify", "Key-firm identification");
  for (auto* cmd : {extract, identify}) {
    add_graph_options(cmd, mnc_in);
    cmd->add_option("--hqs", hqs_path, "Headquarters list (hq_node_id,mnc_name)");
    cmd->add_option("--threshold", threshold, "Substantial-ownership threshold in percent")
        ->check(CLI::Range(0.0, 100.0));
    cmd->add_flag("--global-degrees", global_degrees, "Use degrees from the whole graph instead of the subtree");
  }
  extract->add_option("--out", extract_out, "Output directory");
  identify->add_option("--out", identify_out, "Output CSV");

  // jurisdiction
  GraphInput jur_in;
  std::string jur_keyfirms, jur_profiles, jur_hqs, jur_values, jur_out = "reports";
  std::size_t top_k = 10;
  bool jur_bowtie = true;
  auto* jur = app.add_subcommand("jurisdiction", "Sink/conduit centralities, tallies, chains, regression");
  add_graph_options(jur, jur_in);
  jur->add_option("--keyfirms", jur_keyfirms, "Key-firm CSV from identify")->required();
  jur->add_option("--profiles", jur_profiles, "Jurisdiction profiles (code,gdp,gdp_year,statutory_rate,wtc)");
  jur->add_option("--hqs", jur_hqs, "Headquarters list, enables HQ tables");
  jur->add_option("--values", jur_values, "Per-link values (subsidiary_id,shareholder_id,value)");
  jur->add_option("--threshold", threshold, "Substantial-ownership threshold in percent")
      ->check(CLI::Range(0.0, 100.0));
  jur->add_option("--top", top_k, "Rows per chain/breakdown table");
  jur->add_flag("!--no-bowtie", jur_bowtie, "Skip the bow-tie tallies");
  jur->add_option("--out", jur_out, "Output directory");

  // synth
  std::string synth_spec, synth_out = "data";
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with planted MNCs");
  synth_cmd->add_option("--spec", synth_spec, "JSON generator spec (defaults when omitted)");
  synth_cmd->add_option("--out", synth_out, "Output directory");

  // run / report
  std::string run_out;
  bool run_rebuild = false;
  auto* run = app.add_subcommand("run", "Run all enabled stages from --config");
  run->add_option("--out", run_out, "Override the output directory");
  run->add_flag("--rebuild", run_rebuild, "Re-ingest even if a cache exists");

  std::string report_dir = "out";
  auto* report = app.add_subcommand("report", "Verify a run's manifest and print the summary");
  report->add_option("--out", report_dir, "Output directory of the run");

  CLI11_PARSE(app, argc, argv);

  try {
    std::optional<RunConfig> cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    const std::uint64_t the_seed = seed ? *seed : (cfg ? cfg->seed : 1);

    if (*ingest) {
      apply_config(cfg, ingest_in);
      if (ingest_in.nodes.empty() || ingest_in.edges.empty()) throw Error("ingest needs --nodes and --edges");
      ingest_in.rebuild = true;
      auto graph = open_graph(ingest_in);
      write_ingest_summary(graph, ingest_out);
      std::cout << "nodes " << graph.node_count() << "\nedges " << graph.edge_count() << "\nself_loops_dropped "
                << graph.load_stats().self_loops << "\nblank_pct " << graph.load_stats().blank_pct << "\n";
    } else if (*bowtie) {
      apply_config(cfg, bowtie_in);
      auto graph = open_graph(bowtie_in);
      auto bt = bowtie_decompose(graph.topology());
      auto out = open_file(bowtie_out);
      csv::write_row(out, {"node_id", "region"});
      for (NodeIndex v = 0; v < graph.node_count(); ++v) csv::write_row(out, {graph.node(v).id, region_name(bt.region[v])});
      for (auto r : {Region::GSCC, Region::IN, Region::OUT, Region::TE}) {
        std::cout << region_name(r) << ',' << bt.count(r) << ',' << format_ratio(bt.count(r), bt.gwcc_size()) << '\n';
      }
    } else if (*distances) {
      apply_config(cfg, dist_in);
      auto graph = open_graph(dist_in);
      auto bt = bowtie_decompose(graph.topology());
      auto hist = distance_distribution(graph.topology(), bt, parse_direction(dist_dir), dist_reverse);
      if (dist_out.empty()) {
        csv::write_row(std::cout, {"distance", "count", "ratio"});
        for (auto [d, c] : hist.counts) {
          csv::write_row(std::cout, {std::to_string(d), std::to_string(c), csv::format_double(hist.ratio(d))});
        }
      } else {
        write_distance_csv(hist, dist_out);
      }
    } else if (*stats) {
      apply_config(cfg, stats_in);
      write_stats(open_graph(stats_in), stats_out, bin_ratio);
    } else if (*comm) {
      apply_config(cfg, comm_in);
      auto graph = open_graph(comm_in);
      const fs::path target(comm_out);
      const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
      auto tmp = dir / ".ownet_communities";
      write_communities(graph, tmp.string(), the_seed, comm_full);
      fs::create_directories(dir);
      fs::rename(tmp / "communities.csv", target);
      fs::rename(tmp / "dsizes.csv", dir / "dsizes.csv");
      fs::rename(tmp / "communities.json", dir / "communities.json");
      fs::remove_all(tmp);
    } else if (*extract || *identify) {
      apply_config(cfg, mnc_in);
      if (hqs_path.empty() && cfg) hqs_path = cfg->hqs;
      if (hqs_path.empty()) throw Error("missing --hqs");
      auto graph = open_graph(mnc_in);
      SubstantialView view(graph, threshold);
      auto hqs = load_hq_list(hqs_path);
      auto c = classify_all(view, hqs, global_degrees ? DegreeScope::Global : DegreeScope::Within, threads);
      if (*extract) {
        write_extract(graph, c, extract_out);
      } else {
        auto out = open_file(identify_out);
        write_keyfirms_csv(out, keyfirm_rows(c, graph));
        std::cout << "holding " << c.total.holding << "\nholding_and_conduit " << c.total.holding_and_conduit
                  << "\nconduit " << c.total.conduit << "\n";
      }
      for (const auto& m : c.mncs) {
        if (m.error) std::cerr << "ownet: " << m.entry.mnc_name << ": " << *m.error << "\n";
      }
    } else if (*jur) {
      apply_config(cfg, jur_in);
      if (jur_profiles.empty() && cfg) jur_profiles = cfg->profiles;
      if (jur_hqs.empty() && cfg) jur_hqs = cfg->hqs;
      if (jur_profiles.empty()) throw Error("missing --profiles");
      auto graph = open_graph(jur_in);
      SubstantialView view(graph, threshold);
      auto rows = load_keyfirms_csv(jur_keyfirms);
      auto profiles = load_profiles(jur_profiles);
      std::optional<HqLookup> lookup;
      if (!jur_hqs.empty()) lookup = make_hq_lookup(load_hq_list(jur_hqs));
      std::optional<BowTie> bt;
      if (jur_bowtie) bt = bowtie_decompose(graph.topology());
      std::optional<EdgeValues> values;
      if (!jur_values.empty()) values = load_edge_values(jur_values, graph);
      write_jurisdiction(view, rows, profiles, lookup ? &*lookup : nullptr, bt ? &*bt : nullptr,
                         values ? &*values : nullptr, jur_out, top_k);
    } else if (*synth_cmd) {
      synth::SynthSpec spec;
      if (!synth_spec.empty()) spec = synth::parse_spec_json(read_text(synth_spec));
      if (seed) spec.seed = *seed;
      auto corpus = synth::generate_corpus(spec);
      synth::write_corpus(corpus, synth_out);
      std::cout << "nodes " << corpus.nodes.size() << "\nedges " << corpus.edges.size() << "\nmncs "
                << corpus.hqs.size() << "\n";
    } else if (*run) {
      if (!cfg) throw Error("run needs --config");
      RunConfig c = *cfg;
      if (!run_out.empty()) c.out_dir = run_out;
      if (seed) c.seed = *seed;
      if (app.get_option("--threads")->count()) c.threads = threads;
      c.rebuild_cache = c.rebuild_cache || run_rebuild;
      auto result = run_pipeline(c);
      for (const auto& s : result.manifest.stages) {
        std::cout << s.name << ' ' << s.status;
        if (!s.error.empty()) std::cout << ": " << s.error;
        std::cout << '\n';
      }
      return result.exit_status;
    } else if (*report) {
      if (cfg && !app.get_subcommand("report")->get_option("--out")->count()) report_dir = cfg->out_dir;
      std::cout << write_report(report_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "ownet: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
