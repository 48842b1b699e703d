#include "sce/metrics.hpp"

#include <algorithm>

namespace sce {

namespace {

std::vector<const ClusterMask*> sorted_others(const ClusterMask& base, std::span<const ClusterMask* const> others) {
  if (others.empty())
    throw Error(ErrorKind::InvalidArgument, "g_sum needs at least one compared mask");
  std::vector<const ClusterMask*> out(others.begin(), others.end());
  for (const auto* m : out) {
    if (m->origin().run == base.origin().run)
      throw Error(ErrorKind::ContractViolation, "compared mask (run " + std::to_string(m->origin().run) +
                                                    ", cluster " + std::to_string(m->origin().cluster) +
                                                    ") comes from the base mask's own run");
    if (m->width() != base.width() || m->height() != base.height())
      throw Error(ErrorKind::DimensionMismatch, "compared mask dimensions differ from base mask");
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ClusterMask* a, const ClusterMask* b) { return a->origin() < b->origin(); });
  return out;
}

std::vector<const ClusterMask*> pointers(std::span<const ClusterMask> masks) {
  std::vector<const ClusterMask*> out;
  out.reserve(masks.size());
  for (const auto& m : masks) out.push_back(&m);
  return out;
}

// g[p] += value for every set bit p of (a | b).
void add_on_union(GMap& g, const BitMatrix& a, const BitMatrix& b, double value) {
  double* data = g.data();
  const auto& wa = a.words();
  const auto& wb = b.words();
  for (std::size_t k = 0; k < wa.size(); ++k) {
    std::uint64_t word = wa[k] | wb[k];
    while (word) {
      const int bit = std::countr_zero(word);
      data[(k << 6) + std::size_t(bit)] += value;
      word &= word - 1;
    }
  }
}

void require_nonempty_union(const OverlapCounts& c) {
  if (c.u_sum == 0 || c.r_sum == 0)
    throw Error(ErrorKind::ContractViolation, "overlap of two empty masks is undefined");
}

}  // namespace

double signal_strength(const OverlapCounts& c) {
  require_nonempty_union(c);
  return double(c.i_sum) / double(c.u_sum);
}

double union_quality(const OverlapCounts& c) {
  require_nonempty_union(c);
  return double(c.u_sum - c.i_sum) / double(c.r_sum);
}

double dice(const OverlapCounts& c) {
  require_nonempty_union(c);
  return double(2 * c.i_sum) / double(c.r_sum);
}

double pair_ratio(const OverlapCounts& c, const RatioOptions& options) {
  const double s = signal_strength(c);
  const double q = std::max(union_quality(c), options.epsilon);
  return std::min(s / q, options.ratio_cap);
}

PairScore score_pair(const OverlapCounts& c, const RatioOptions& options) {
  return {signal_strength(c), union_quality(c), dice(c), pair_ratio(c, options)};
}

GMap g_matrix(const ClusterMask& a, const ClusterMask& b, const RatioOptions& options) {
  if (a.origin().run == b.origin().run)
    throw Error(ErrorKind::ContractViolation,
                "goodness of fit is only defined between masks of different runs (both from run " +
                    std::to_string(a.origin().run) + ")");
  const auto counts = overlap_counts(a, b);
  GMap g = GMap::Zero(a.height(), a.width());
  const double ratio = pair_ratio(counts, options);
  if (ratio != 0.0) add_on_union(g, a.bits(), b.bits(), ratio);
  return g;
}

GsumResult g_sum_matrix(const ClusterMask& base, std::span<const ClusterMask* const> others,
                        const RatioOptions& options) {
  const auto ordered = sorted_others(base, others);
  GsumResult out;
  out.base = base.origin();
  out.g_map = GMap::Zero(base.height(), base.width());
  out.comparisons = ordered.size();
  for (const auto* other : ordered) {
    const double ratio = pair_ratio(overlap_counts(base, *other), options);
    out.g_scalar += ratio;
    if (ratio != 0.0) add_on_union(out.g_map, base.bits(), other->bits(), ratio);
  }
  return out;
}

GsumResult g_sum_matrix(const ClusterMask& base, std::span<const ClusterMask> others, const RatioOptions& options) {
  const auto p = pointers(others);
  return g_sum_matrix(base, std::span<const ClusterMask* const>(p), options);
}

double g_sum_scalar(const ClusterMask& base, std::span<const ClusterMask* const> others,
                    const RatioOptions& options) {
  double total = 0.0;
  for (const auto* other : sorted_others(base, others)) total += pair_ratio(overlap_counts(base, *other), options);
  return total;
}

double g_sum_scalar(const ClusterMask& base, std::span<const ClusterMask> others, const RatioOptions& options) {
  const auto p = pointers(others);
  return g_sum_scalar(base, std::span<const ClusterMask* const>(p), options);
}

GMap normalized_for_display(const GMap& g) {
  const double peak = g.size() ? g.maxCoeff() : 0.0;
  if (!(peak > 0.0)) return g;
  return g / peak;
}

}  // namespace sce
