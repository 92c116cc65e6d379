#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ownet/csv.hpp"
#include "ownet/error.hpp"
#include "ownet/hash.hpp"
#include "ownet/pipeline.hpp"

namespace fs = std::filesystem;

namespace ownet {

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

csv::Table read_any(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  csv::Reader reader(in, path.string());
  csv::Table t;
  std::vector<std::string> row;
  if (!reader.next(row)) return t;
  t.header = row;
  while (reader.next(row)) {
    t.rows.push_back(row);
    t.lines.push_back(reader.line());
  }
  return t;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string lpad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string write_report(const std::string& out_dir) {
  const fs::path out(out_dir);
  const auto manifest = Manifest::from_json(slurp(out / "manifest.json"));

  std::map<std::string, std::string> artifacts;  // path -> stage
  for (const auto& stage : manifest.stages) {
    for (const auto& a : stage.artifacts) {
      const fs::path full = out / a.path;
      if (!fs::exists(full)) throw Error("integrity error: " + a.path + " is missing");
      if (sha256_file(full.string()) != a.sha256) throw Error("integrity error: hash mismatch for " + a.path);
      artifacts[a.path] = stage.name;
    }
  }

  const fs::path dir = out / "report";
  fs::create_directories(dir);
  std::ostringstream text;
  text << "ownet report\n";
  text << "stages:";
  for (const auto& s : manifest.stages) text << ' ' << s.name << '=' << s.status;
  text << "\n";
  if (!manifest.ok) {
    for (const auto& s : manifest.stages) {
      if (s.status == "failed") text << "failed stage " << s.name << ": " << s.error << "\n";
    }
  }

  if (artifacts.count("bowtie/table2.csv")) {
    auto t = read_any(out / "bowtie/table2.csv");
    text << "\nBow-tie decomposition of the GWCC\n";
    text << pad("Component", 12) << lpad("Count", 14) << lpad("Ratio", 10) << "\n";
    for (const auto& r : t.rows) text << pad(r.at(0), 12) << lpad(r.at(1), 14) << lpad(r.at(2), 10) << "\n";
  }

  // Table 1 analog: key firms per MNC.
  if (artifacts.count("identify/keyfirms.csv")) {
    auto rows = load_keyfirms_csv((out / "identify/keyfirms.csv").string());
    struct Counts {
      std::size_t affiliates = 0, holding = 0, hc = 0, conduit = 0;
    };
    std::map<std::string, Counts> per_mnc;
    for (const auto& r : rows) {
      auto& c = per_mnc[r.mnc];
      ++c.affiliates;
      if (r.role == Role::Holding) ++c.holding;
      if (r.role == Role::HoldingAndConduit) ++c.hc;
      if (r.role == Role::Conduit) ++c.conduit;
    }
    std::ofstream f(dir / "table1.csv", std::ios::binary);
    csv::write_row(f, {"mnc", "affiliates", "holding", "holding_and_conduit", "conduit"});
    Counts total;
    for (const auto& [name, c] : per_mnc) {
      csv::write_row(f, {name, std::to_string(c.affiliates), std::to_string(c.holding), std::to_string(c.hc),
                         std::to_string(c.conduit)});
      total.affiliates += c.affiliates;
      total.holding += c.holding;
      total.hc += c.hc;
      total.conduit += c.conduit;
    }
    text << "\nKey firms over " << per_mnc.size() << " MNCs (" << total.affiliates << " affiliates)\n";
    text << pad("Holding", 22) << lpad(std::to_string(total.holding), 10) << "\n";
    text << pad("Holding and conduit", 22) << lpad(std::to_string(total.hc), 10) << "\n";
    text << pad("Conduit", 22) << lpad(std::to_string(total.conduit), 10) << "\n";
  }

  // Figure inputs are the stage CSVs themselves; list them for plotters.
  {
    std::ofstream f(dir / "plots.csv", std::ios::binary);
    csv::write_row(f, {"figure", "path"});
    const std::pair<const char*, const char*> figures[] = {
        {"in_degree_density", "stats/pk_in.csv"},
        {"out_degree_density", "stats/pk_out.csv"},
        {"clustering_by_degree", "stats/ck.csv"},
        {"knn_by_degree", "stats/knn.csv"},
        {"weak_component_sizes", "bowtie/nx.csv"},
        {"distance_in", "bowtie/distances_in.csv"},
        {"distance_out", "bowtie/distances_out.csv"},
        {"community_sizes", "communities/dsizes.csv"},
    };
    for (auto [name, path] : figures) {
      if (artifacts.count(path)) csv::write_row(f, {name, path});
    }
    for (const auto& [path, stage] : artifacts) {
      if (path.rfind("jurisdiction/tallies/", 0) == 0) csv::write_row(f, {"tally", path});
    }
  }

  const std::string summary = text.str();
  std::ofstream(dir / "summary.txt", std::ios::binary) << summary;
  return summary;
}

}  // namespace ownet
