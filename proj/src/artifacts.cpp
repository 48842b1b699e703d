#include "sce/artifacts.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"

namespace fs = std::filesystem;

namespace sce {

namespace {

std::string mask_stem(MaskId id) {
  return "run" + std::to_string(id.run) + "_cluster" + std::to_string(id.cluster);
}

void make_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory '" + p.string() + "': " + ec.message());
}

// Parses "run<b>_cluster<e>" out of a file stem.
bool parse_stem(const std::string& stem, MaskId& id) {
  static const std::regex re(R"(run(\d+)_cluster(\d+))");
  std::smatch m;
  if (!std::regex_match(stem, m, re)) return false;
  id.run = std::stoi(m[1]);
  id.cluster = std::stoi(m[2]);
  return true;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string run_dir_name(std::uint64_t master_seed, const std::string& config_hash) {
  return "seed" + std::to_string(master_seed) + "_" + config_hash;
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_rankings_csv(const SceOutput& sce, const fs::path& path) {
  std::vector<std::size_t> position(sce.results.size());
  for (std::size_t r = 0; r < sce.ranking.size(); ++r) position[sce.ranking[r]] = r;
  std::ostringstream out;
  out << "run,cluster,g_sum,comparisons,rank,selected\n";
  for (std::size_t r = 0; r < sce.ranking.size(); ++r) {
    const auto& g = sce.results[sce.ranking[r]];
    out << g.base.run << "," << g.base.cluster << "," << format_real(g.g_scalar) << "," << g.comparisons << ","
        << r + 1 << "," << (r < sce.cutoff_rank ? 1 : 0) << "\n";
  }
  detail::write_text(path, out.str());
}

void write_comparison_csv(std::span<const ComparisonRow> rows, const fs::path& path) {
  std::ostringstream out;
  out << "a_run,a_cluster,b_run,b_cluster,s_i,q_u,dice\n";
  for (const auto& r : rows)
    out << r.a.run << "," << r.a.cluster << "," << r.b.run << "," << r.b.cluster << "," << format_real(r.score.s_i)
        << "," << format_real(r.score.q_u) << "," << format_real(r.score.dice) << "\n";
  detail::write_text(path, out.str());
}

void save_gsum_pgm(const GMap& g, const fs::path& path) {
  const GMap unit = normalized_for_display(g);
  std::vector<unsigned char> out;
  detail::put_bytes(out, "P5\n" + std::to_string(g.cols()) + " " + std::to_string(g.rows()) + "\n65535\n");
  const double* d = unit.data();
  for (Eigen::Index p = 0; p < unit.size(); ++p) {
    // log10(1 + 9u) maps [0, 1] onto [0, 1]
    const double level = std::log10(1.0 + 9.0 * std::clamp(d[p], 0.0, 1.0));
    const auto v = static_cast<std::uint16_t>(std::lround(level * 65535.0));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v & 0xff));
  }
  detail::write_file(path, out);
}

std::vector<std::string> write_run_artifacts(const fs::path& dir, const PipelineConfig& config,
                                             std::span<const SomRunResult> runs, const SceOutput& sce,
                                             const ArtifactOptions& options) {
  std::vector<std::string> files;
  auto emit = [&](const std::string& rel) { files.push_back(rel); };
  for (const char* sub : {"som", "labelings", "masks", "gsum", "consensus"}) make_dir(dir / sub);

  detail::write_text(dir / "config.txt", canonical_text(config));
  emit("config.txt");

  write_rankings_csv(sce, dir / "rankings.csv");
  emit("rankings.csv");

  {
    std::vector<double> ranked;
    for (auto i : sce.ranking) ranked.push_back(sce.results[i].g_scalar);
    const auto groups = group_by_gap(ranked, config.ensemble.gap_delta);
    std::ostringstream out;
    out << "rank,run,cluster,g_sum,group\n";
    for (std::size_t r = 0; r < sce.ranking.size(); ++r) {
      const auto& g = sce.results[sce.ranking[r]];
      out << r + 1 << "," << g.base.run << "," << g.base.cluster << "," << format_real(g.g_scalar) << ","
          << groups[r] << "\n";
    }
    detail::write_text(dir / "groups.csv", out.str());
    emit("groups.csv");
  }

  for (std::size_t b = 0; b < runs.size(); ++b) {
    const std::string run = "run" + std::to_string(b);
    save_som(runs[b].map, dir / "som" / (run + ".som"));
    emit("som/" + run + ".som");
    save_labeling_pgm(runs[b].labeling, dir / "labelings" / (run + ".pgm"));
    emit("labelings/" + run + ".pgm");
    emit("labelings/" + run + ".pgm.counts");
  }

  for (const auto& set : sce.mask_sets)
    for (const auto& m : set.masks) {
      const std::string rel = "masks/" + mask_stem(m.origin()) + ".msk";
      save_mask(m.bits(), dir / rel);
      emit(rel);
    }

  for (const auto& g : sce.results) {
    const std::string stem = "gsum/" + mask_stem(g.base);
    Eigen::MatrixXd values = Eigen::Map<const Eigen::VectorXd>(g.g_map.data(), g.g_map.size());
    save_raster(NormalizedRaster(int(g.g_map.cols()), int(g.g_map.rows()), std::move(values), {"g_sum"}),
                dir / (stem + ".frst"));
    emit(stem + ".frst");
    emit(stem + ".frst.names");
    if (options.export_pgm) {
      save_gsum_pgm(g.g_map, dir / (stem + ".pgm"));
      emit(stem + ".pgm");
    }
  }

  for (double tau : config.ensemble.thresholds) make_dir(dir / "consensus" / ("tau" + format_real(tau)));
  for (const auto& c : sce.consensus) {
    const std::string stem = "consensus/tau" + format_real(c.tau) + "/" + mask_stem(c.base);
    save_mask(c.mask.bits(), dir / (stem + ".msk"));
    emit(stem + ".msk");
    save_pbm(c.mask.bits(), dir / (stem + ".pbm"));
    emit(stem + ".pbm");
  }
  return files;
}

void write_manifest(const fs::path& dir, const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["config_hash"] = manifest.config_hash;
  j["master_seed"] = manifest.master_seed;
  j["tool_version"] = manifest.tool_version;
  j["timings"] = nlohmann::ordered_json::array();
  for (const auto& t : manifest.timings) j["timings"].push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  j["files"] = manifest.files;
  j["notices"] = manifest.notices;
  detail::write_text(dir / "manifest.json", j.dump(2) + "\n");
  for (const auto& f : manifest.files)
    if (!fs::is_regular_file(dir / f)) throw Error(ErrorKind::Io, "declared output missing: " + (dir / f).string());
}

RunManifest load_manifest(const fs::path& dir) {
  const auto bytes = detail::read_file(dir / "manifest.json");
  RunManifest m;
  try {
    const auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
    m.config_hash = j.at("config_hash").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.tool_version = j.at("tool_version").get<std::string>();
    for (const auto& t : j.at("timings")) m.timings.push_back({t.at("stage"), t.at("seconds")});
    m.files = j.at("files").get<std::vector<std::string>>();
    m.notices = j.value("notices", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, "malformed manifest in '" + dir.string() + "': " + e.what());
  }
  return m;
}

SceOutput load_run_artifacts(const fs::path& dir) {
  for (const char* sub : {"masks", "consensus"})
    if (!fs::is_directory(dir / sub))
      throw Error(ErrorKind::Io, "'" + dir.string() + "' has no " + sub + "/ directory (not a run directory?)");

  SceOutput out;
  std::map<int, MaskSet> sets;
  for (const auto& p : sorted_files(dir / "masks", ".msk")) {
    MaskId id;
    if (!parse_stem(p.stem().string(), id)) continue;
    auto& set = sets[id.run];
    set.run = id.run;
    set.masks.emplace_back(load_mask(p), id);
  }
  if (sets.empty()) throw Error(ErrorKind::Io, "'" + dir.string() + "' contains no SOM masks");
  for (auto& [run, set] : sets) {
    std::sort(set.masks.begin(), set.masks.end(),
              [](const ClusterMask& a, const ClusterMask& b) { return a.origin() < b.origin(); });
    out.mask_sets.push_back(std::move(set));
  }

  std::vector<std::pair<double, fs::path>> tau_dirs;
  for (const auto& e : fs::directory_iterator(dir / "consensus")) {
    const std::string name = e.path().filename().string();
    if (!e.is_directory() || name.rfind("tau", 0) != 0) continue;
    double tau = 0.0;
    const char* first = name.data() + 3;
    const char* last = name.data() + name.size();
    auto [ptr, ec] = std::from_chars(first, last, tau);
    if (ec != std::errc() || ptr != last) continue;
    tau_dirs.emplace_back(tau, e.path());
  }
  std::sort(tau_dirs.begin(), tau_dirs.end());
  for (const auto& [tau, path] : tau_dirs) {
    std::vector<ConsensusMask> here;
    for (const auto& p : sorted_files(path, ".msk")) {
      MaskId id;
      if (!parse_stem(p.stem().string(), id)) continue;
      here.push_back({id, tau, ClusterMask(load_mask(p), id)});
    }
    std::sort(here.begin(), here.end(), [](const ConsensusMask& a, const ConsensusMask& b) { return a.base < b.base; });
    for (auto& c : here) out.consensus.push_back(std::move(c));
  }
  return out;
}

}  // namespace sce
