#pragma once

#include <cstdint>

#include "sce/raster.hpp"
#include "sce/som.hpp"

namespace sce {

enum SynthClass : int { kBackground = 0, kIsland = 1, kSheet = 2 };

// Synthetic three-class scene: background medium, circular islands and thin
// straight sheets. Plateaus per class (channels b_perp, j_par, j_dot_e):
//   background ( 0,  0, 0)
//   island     (+p, -p, 0)
//   sheet      (-p, +p, +p)
// with p = plateau and N(0, noise_sigma) added everywhere.
struct SynthConfig {
  int width = 128;
  int height = 128;
  int n_islands = 6;
  int island_radius_min = 4;
  int island_radius_max = 9;
  int n_sheets = 4;
  int sheet_thickness_min = 2;
  int sheet_thickness_max = 4;
  // 0 selects [min(width,height)/4, min(width,height)/2].
  int sheet_length_min = 0;
  int sheet_length_max = 0;
  double noise_sigma = 0.3;
  double plateau = 2.0;
  std::uint64_t seed = 0;
};

struct SynthImage {
  FeatureRaster raster;
  // Fixed ids {background=0, island=1, sheet=2}; n_clusters is always 3, so
  // classes absent from the scene leave ids unused.
  Labeling truth;
};

// Islands never overlap each other; sheets are painted after islands and win
// where they cross. Throws Placement when a shape cannot be fit after 1000
// attempts.
SynthImage generate(const SynthConfig& config);

}  // namespace sce
