#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sce/config.hpp"
#include "sce/ensemble.hpp"
#include "sce/metrics.hpp"

namespace sce {

inline constexpr const char* kToolVersion = "1.0.0";

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunManifest {
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::string tool_version = kToolVersion;
  std::vector<StageTiming> timings;
  std::vector<std::string> files;  // relative to the run directory
  std::vector<std::string> notices;
};

// "seed<seed>_<hash>"
std::string run_dir_name(std::uint64_t master_seed, const std::string& config_hash);

// Shortest round-trip decimal, used for tau directory names and CSV reals.
std::string format_real(double v);

struct ArtifactOptions {
  bool export_pgm = false;
};

// Layout under `dir`:
//   config.txt                       canonical config
//   rankings.csv                     run,cluster,g_sum,comparisons,rank,selected
//   groups.csv                       rank,run,cluster,g_sum,group (gap heuristic)
//   som/run<b>.som                   trained maps
//   labelings/run<b>.pgm (+.counts)  per-run cluster ids
//   masks/run<b>_cluster<e>.msk      raw SOM cluster masks
//   gsum/run<b>_cluster<e>.frst      G_sum maps (+ .pgm with export_pgm)
//   consensus/tau<t>/run<b>_cluster<e>.msk and .pbm
// Returns the written files relative to `dir`, in write order.
std::vector<std::string> write_run_artifacts(const std::filesystem::path& dir, const PipelineConfig& config,
                                             std::span<const SomRunResult> runs, const SceOutput& sce,
                                             const ArtifactOptions& options = {});

void write_rankings_csv(const SceOutput& sce, const std::filesystem::path& path);

// Writes manifest.json, then checks every listed file exists. Throws Io
// naming the first missing one.
void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);
RunManifest load_manifest(const std::filesystem::path& dir);

// Rebuilds mask_sets and consensus from a run directory; results/ranking are
// left empty. Throws Io when the directory lacks SCE artifacts.
SceOutput load_run_artifacts(const std::filesystem::path& dir);

// a_run,a_cluster,b_run,b_cluster,s_i,q_u,dice
void write_comparison_csv(std::span<const ComparisonRow> rows, const std::filesystem::path& path);

// 16-bit P5 with log10 scaling of g / max(g).
void save_gsum_pgm(const GMap& g, const std::filesystem::path& path);

}  // namespace sce
