#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sce/ensemble.hpp"
#include "sce/raster.hpp"

namespace sce {

enum class InputMode { Single, Stacked };

// Everything `run` needs besides the input rasters.
struct PipelineConfig {
  EnsembleConfig ensemble;
  NormalizeOptions norm;
  NormScope norm_scope = NormScope::Global;
  InputMode mode = InputMode::Single;
};

// Flat `key = value` lines; lists are comma separated, `#` starts a comment.
// Errors carry the offending line number.
//
//   seed, map_rows, map_cols, alphas, iterations, runs, alpha_final, sigma0,
//   sigma_final, join_k, epsilon, ratio_cap, gap_delta, thresholds,
//   clip_sigma, norm_scope (global|per_snapshot), mode (single|stacked)
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

// Canonical key = value rendering of every setting except the seed.
std::string canonical_text(const PipelineConfig& config);
// 16 hex digits of FNV-1a over canonical_text.
std::string config_hash(const PipelineConfig& config);

}  // namespace sce
