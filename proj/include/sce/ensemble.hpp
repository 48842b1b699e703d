#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sce/mask.hpp"
#include "sce/metrics.hpp"
#include "sce/raster.hpp"
#include "sce/som.hpp"

namespace sce {

struct EnsembleConfig {
  std::uint64_t master_seed = 0;
  // One entry per SOM run. The per-entry seed is ignored; run i is seeded
  // with derive_seed(master_seed, i).
  std::vector<SomConfig> run_configs;
  RatioOptions ratio;
  double gap_delta = 0.5;
  std::vector<double> thresholds{1.0, 2.0};
};

void validate(const EnsembleConfig& config);

// Cartesian alpha x iteration grid (alpha-major), optionally cycled out to
// `runs` entries, with join_k cycling through `join_ks` across the list.
std::vector<SomConfig> make_run_grid(const SomConfig& base, std::span<const double> alphas,
                                     std::span<const long> iterations, std::span<const int> join_ks, int runs = 0);

struct SomRunResult {
  SomConfig config;  // with the derived seed filled in
  SomMap map;
  Labeling labeling;
  MaskSet masks;
};

std::vector<SomRunResult> train_ensemble(const NormalizedRaster& raster, const EnsembleConfig& config,
                                         unsigned workers = 1);
std::vector<MaskSet> run_ensemble(const NormalizedRaster& raster, const EnsembleConfig& config,
                                  unsigned workers = 1);

// One GsumResult per mask, each base compared against every mask of every
// other run. Results come back sorted by base (run, cluster).
std::vector<GsumResult> stack(std::span<const MaskSet> mask_sets, const RatioOptions& options = {},
                              unsigned workers = 1);

// Indices into `results` by descending g_scalar; ties by ascending base id.
std::vector<std::size_t> rank(std::span<const GsumResult> results);

// Number of leading ranked entries to keep: the smallest k >= 1 with
// ranked_g[k] < (1 - gap_delta) * ranked_g[k - 1], or ranked_g.size() when
// there is no such drop. Entries past k are weakly correlated with the rest.
std::size_t detect_gap(std::span<const double> ranked_g, double gap_delta);
std::size_t detect_gap(std::span<const GsumResult> results, std::span<const std::size_t> ranking, double gap_delta);

// Heuristic extension: splits the ranked sequence wherever the relative drop
// exceeds gap_delta and returns a group id per ranked position.
std::vector<int> group_by_gap(std::span<const double> ranked_g, double gap_delta);

// Pixels with g_map strictly above tau. Throws EmptyResult if none.
ClusterMask threshold_mask(const GsumResult& g, double tau);

struct ConsensusMask {
  MaskId base;
  double tau = 0.0;
  ClusterMask mask;
};

struct SceOutput {
  std::vector<MaskSet> mask_sets;
  std::vector<GsumResult> results;
  std::vector<std::size_t> ranking;
  std::size_t cutoff_rank = 0;
  std::vector<ConsensusMask> consensus;
  std::vector<std::string> notices;

  int width() const;
  int height() const;
};

// stack -> rank -> detect_gap -> threshold every selected base at every tau.
// Empty thresholded masks are dropped with a notice.
SceOutput combine(std::vector<MaskSet> mask_sets, const EnsembleConfig& config, unsigned workers = 1);
SceOutput build_sce(const NormalizedRaster& raster, const EnsembleConfig& config, unsigned workers = 1);

struct ComparisonRow {
  enum class Kind { Sce, Som };
  Kind kind = Kind::Sce;
  double tau = 0.0;  // 0 for SOM rows
  MaskId a;
  MaskId b;
  PairScore score;
};

// Every consensus pair (same tau) across a and b, then every SOM cluster pair
// across the two run sets.
std::vector<ComparisonRow> compare_ensembles(const SceOutput& a, const SceOutput& b, std::span<const double> taus,
                                             const RatioOptions& options = {});

struct BestMatchSummary {
  std::vector<double> sce_best;  // per consensus mask, both directions
  std::vector<double> som_best;  // per SOM cluster, both directions
  double sce_median = 0.0;
  double som_median = 0.0;
};

BestMatchSummary best_matches(std::span<const ComparisonRow> rows, double tau);

double median(std::vector<double> values);

}  // namespace sce
