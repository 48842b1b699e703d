#include "sce/ensemble.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include "sce/parallel.hpp"
#include "sce/rng.hpp"

namespace sce {

void validate(const EnsembleConfig& config) {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidArgument, m); };
  if (config.run_configs.size() < 2) fail("stacking requires >= 2 runs");
  for (std::size_t i = 0; i < config.run_configs.size(); ++i) {
    try {
      validate(config.run_configs[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), "run " + std::to_string(i) + ": " + e.what());
    }
  }
  if (!(config.gap_delta > 0.0 && config.gap_delta < 1.0)) fail("gap_delta must lie in (0, 1)");
  if (!(config.ratio.epsilon > 0.0)) fail("epsilon must be positive");
  if (!(config.ratio.ratio_cap > 0.0)) fail("ratio_cap must be positive");
  for (double t : config.thresholds)
    if (!(t > 0.0)) fail("thresholds must be strictly positive");
}

std::vector<SomConfig> make_run_grid(const SomConfig& base, std::span<const double> alphas,
                                     std::span<const long> iterations, std::span<const int> join_ks, int runs) {
  if (alphas.empty() || iterations.empty() || join_ks.empty())
    throw Error(ErrorKind::InvalidArgument, "run grid needs at least one alpha, iteration count and join_k");
  std::vector<SomConfig> grid;
  for (double a : alphas)
    for (long t : iterations) {
      SomConfig c = base;
      c.alpha0 = a;
      c.iterations = t;
      grid.push_back(c);
    }
  std::vector<SomConfig> out;
  const std::size_t n = runs > 0 ? std::size_t(runs) : grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    SomConfig c = grid[i % grid.size()];
    c.join_k = join_ks[i % join_ks.size()];
    out.push_back(c);
  }
  return out;
}

std::vector<SomRunResult> train_ensemble(const NormalizedRaster& raster, const EnsembleConfig& config,
                                         unsigned workers) {
  validate(config);
  const std::size_t n = config.run_configs.size();
  std::vector<SomRunResult> out(n);
  parallel_for(n, workers, [&](std::size_t i) {
    SomConfig c = config.run_configs[i];
    c.seed = derive_seed(config.master_seed, i);
    try {
      auto run = run_som(raster, c, 1);
      out[i].config = c;
      out[i].masks = masks_from_labeling(run.labeling, int(i));
      out[i].map = std::move(run.map);
      out[i].labeling = std::move(run.labeling);
    } catch (const Error& e) {
      throw Error(e.kind(), "run " + std::to_string(i) + ": " + e.what());
    }
  });
  return out;
}

std::vector<MaskSet> run_ensemble(const NormalizedRaster& raster, const EnsembleConfig& config, unsigned workers) {
  auto runs = train_ensemble(raster, config, workers);
  std::vector<MaskSet> out;
  out.reserve(runs.size());
  for (auto& r : runs) out.push_back(std::move(r.masks));
  return out;
}

std::vector<GsumResult> stack(std::span<const MaskSet> mask_sets, const RatioOptions& options, unsigned workers) {
  if (mask_sets.size() < 2) throw Error(ErrorKind::InvalidArgument, "stacking requires >= 2 runs");
  std::vector<const ClusterMask*> all;
  for (const auto& set : mask_sets)
    for (const auto& m : set.masks) {
      if (m.origin().run != set.run)
        throw Error(ErrorKind::ContractViolation, "mask origin run disagrees with its mask set");
      all.push_back(&m);
    }
  std::sort(all.begin(), all.end(), [](const ClusterMask* a, const ClusterMask* b) { return a->origin() < b->origin(); });
  for (std::size_t i = 1; i < all.size(); ++i)
    if (all[i - 1]->origin() == all[i]->origin())
      throw Error(ErrorKind::ContractViolation, "duplicate mask id in stack input");

  std::vector<GsumResult> out(all.size());
  parallel_for(all.size(), workers, [&](std::size_t i) {
    const ClusterMask& base = *all[i];
    std::vector<const ClusterMask*> others;
    others.reserve(all.size());
    for (const auto* m : all)
      if (m->origin().run != base.origin().run) others.push_back(m);
    out[i] = g_sum_matrix(base, others, options);
  });
  return out;
}

std::vector<std::size_t> rank(std::span<const GsumResult> results) {
  std::vector<std::size_t> order(results.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (results[a].g_scalar != results[b].g_scalar) return results[a].g_scalar > results[b].g_scalar;
    return results[a].base < results[b].base;
  });
  return order;
}

std::size_t detect_gap(std::span<const double> g, double gap_delta) {
  if (g.size() < 2) throw Error(ErrorKind::InvalidArgument, "gap detection needs at least 2 ranked entries");
  if (!(gap_delta > 0.0 && gap_delta < 1.0)) throw Error(ErrorKind::InvalidArgument, "gap_delta must lie in (0, 1)");
  for (std::size_t k = 1; k < g.size(); ++k)
    if (g[k] < (1.0 - gap_delta) * g[k - 1]) return k;
  return g.size();
}

std::size_t detect_gap(std::span<const GsumResult> results, std::span<const std::size_t> ranking, double gap_delta) {
  std::vector<double> g;
  g.reserve(ranking.size());
  for (auto i : ranking) g.push_back(results[i].g_scalar);
  return detect_gap(g, gap_delta);
}

std::vector<int> group_by_gap(std::span<const double> g, double gap_delta) {
  std::vector<int> out(g.size(), 0);
  for (std::size_t k = 1; k < g.size(); ++k)
    out[k] = out[k - 1] + (g[k] < (1.0 - gap_delta) * g[k - 1] ? 1 : 0);
  return out;
}

ClusterMask threshold_mask(const GsumResult& g, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "threshold must be positive");
  BitMatrix bits(int(g.g_map.cols()), int(g.g_map.rows()));
  const double* data = g.g_map.data();
  for (Eigen::Index p = 0; p < g.g_map.size(); ++p)
    if (data[p] > tau) bits.set(std::size_t(p));
  if (!bits.any())
    throw Error(ErrorKind::EmptyResult, "threshold " + std::to_string(tau) + " leaves mask (run " +
                                            std::to_string(g.base.run) + ", cluster " +
                                            std::to_string(g.base.cluster) + ") empty");
  return ClusterMask(std::move(bits), g.base);
}

int SceOutput::width() const {
  for (const auto& s : mask_sets)
    if (!s.masks.empty()) return s.masks.front().width();
  return consensus.empty() ? 0 : consensus.front().mask.width();
}

int SceOutput::height() const {
  for (const auto& s : mask_sets)
    if (!s.masks.empty()) return s.masks.front().height();
  return consensus.empty() ? 0 : consensus.front().mask.height();
}

SceOutput combine(std::vector<MaskSet> mask_sets, const EnsembleConfig& config, unsigned workers) {
  SceOutput out;
  out.mask_sets = std::move(mask_sets);
  out.results = stack(out.mask_sets, config.ratio, workers);
  out.ranking = rank(out.results);
  out.cutoff_rank = out.results.size() >= 2 ? detect_gap(out.results, out.ranking, config.gap_delta)
                                            : out.results.size();
  for (std::size_t r = 0; r < out.cutoff_rank; ++r) {
    const auto& g = out.results[out.ranking[r]];
    for (double tau : config.thresholds) {
      try {
        out.consensus.push_back({g.base, tau, threshold_mask(g, tau)});
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::EmptyResult) throw;
        out.notices.push_back(std::string("dropped empty consensus mask: ") + e.what());
      }
    }
  }
  return out;
}

SceOutput build_sce(const NormalizedRaster& raster, const EnsembleConfig& config, unsigned workers) {
  return combine(run_ensemble(raster, config, workers), config, workers);
}

std::vector<ComparisonRow> compare_ensembles(const SceOutput& a, const SceOutput& b, std::span<const double> taus,
                                             const RatioOptions& options) {
  if (a.width() != b.width() || a.height() != b.height())
    throw Error(ErrorKind::DimensionMismatch, "ensembles were built on rasters of different dimensions");
  auto has_tau = [](const SceOutput& s, double tau) {
    return std::any_of(s.consensus.begin(), s.consensus.end(), [&](const ConsensusMask& c) { return c.tau == tau; });
  };
  std::vector<ComparisonRow> rows;
  for (double tau : taus) {
    if (!has_tau(a, tau) || !has_tau(b, tau))
      throw Error(ErrorKind::InvalidArgument, "ensemble has no consensus masks at threshold " + std::to_string(tau));
    for (const auto& ca : a.consensus) {
      if (ca.tau != tau) continue;
      for (const auto& cb : b.consensus) {
        if (cb.tau != tau) continue;
        rows.push_back({ComparisonRow::Kind::Sce, tau, ca.base, cb.base,
                        score_pair(overlap_counts(ca.mask, cb.mask), options)});
      }
    }
  }
  for (const auto& sa : a.mask_sets)
    for (const auto& ma : sa.masks)
      for (const auto& sb : b.mask_sets)
        for (const auto& mb : sb.masks)
          rows.push_back({ComparisonRow::Kind::Som, 0.0, ma.origin(), mb.origin(),
                          score_pair(overlap_counts(ma, mb), options)});
  return rows;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

BestMatchSummary best_matches(std::span<const ComparisonRow> rows, double tau) {
  std::map<MaskId, double> sce_a, sce_b, som_a, som_b;
  auto bump = [](std::map<MaskId, double>& m, MaskId id, double s) {
    auto [it, inserted] = m.try_emplace(id, s);
    if (!inserted) it->second = std::max(it->second, s);
  };
  for (const auto& r : rows) {
    if (r.kind == ComparisonRow::Kind::Sce) {
      if (r.tau != tau) continue;
      bump(sce_a, r.a, r.score.s_i);
      bump(sce_b, r.b, r.score.s_i);
    } else {
      bump(som_a, r.a, r.score.s_i);
      bump(som_b, r.b, r.score.s_i);
    }
  }
  BestMatchSummary out;
  for (const auto* m : {&sce_a, &sce_b})
    for (const auto& [id, s] : *m) out.sce_best.push_back(s);
  for (const auto* m : {&som_a, &som_b})
    for (const auto& [id, s] : *m) out.som_best.push_back(s);
  out.sce_median = median(out.sce_best);
  out.som_median = median(out.som_best);
  return out;
}

}  // namespace sce
