#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sce/mask.hpp"

namespace sce {

// Row-major so that coefficient p is pixel p = y * width + x.
using GMap = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// q_U is floored at epsilon before dividing and the quotient is capped, so
// identical masks score min(1/epsilon, ratio_cap) instead of infinity.
struct RatioOptions {
  double epsilon = 1e-6;
  double ratio_cap = 1e6;
};

struct PairScore {
  double s_i = 0.0;
  double q_u = 0.0;
  double dice = 0.0;
  double ratio = 0.0;
};

// |I| / |U|
double signal_strength(const OverlapCounts& counts);
// (|U| - |I|) / |R|
double union_quality(const OverlapCounts& counts);
// 2|I| / |R|
double dice(const OverlapCounts& counts);

double pair_ratio(const OverlapCounts& counts, const RatioOptions& options = {});
PairScore score_pair(const OverlapCounts& counts, const RatioOptions& options = {});

// Goodness of fit of `a` against `b`: the clamped s_I/q_U ratio on the union
// of both masks, zero elsewhere. Masks from the same run are rejected.
GMap g_matrix(const ClusterMask& a, const ClusterMask& b, const RatioOptions& options = {});

struct GsumResult {
  MaskId base;
  GMap g_map;
  double g_scalar = 0.0;
  std::size_t comparisons = 0;
};

// Sums g_matrix(base, other) over every compared mask. Pairs are reduced in
// ascending (run, cluster) order whatever order `others` arrives in.
GsumResult g_sum_matrix(const ClusterMask& base, std::span<const ClusterMask* const> others,
                        const RatioOptions& options = {});
GsumResult g_sum_matrix(const ClusterMask& base, std::span<const ClusterMask> others,
                        const RatioOptions& options = {});

double g_sum_scalar(const ClusterMask& base, std::span<const ClusterMask* const> others,
                    const RatioOptions& options = {});
double g_sum_scalar(const ClusterMask& base, std::span<const ClusterMask> others, const RatioOptions& options = {});

// Divides by the map maximum for display; all-zero maps are returned as is.
GMap normalized_for_display(const GMap& g);

}  // namespace sce
