#include "sce/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sce/rng.hpp"

namespace sce {

namespace {

constexpr int kMaxAttempts = 1000;

struct Disk {
  int cx, cy, r;
};

int uniform_int(CounterRng& rng, int lo, int hi) { return lo + int(rng.below(std::uint64_t(hi - lo + 1))); }

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double qx = ax + t * dx - px, qy = ay + t * dy - py;
  return std::sqrt(qx * qx + qy * qy);
}

void check(const SynthConfig& c) {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidArgument, "synth config: " + m); };
  if (c.width < 1 || c.height < 1) fail("dimensions must be positive");
  if (c.n_islands < 0 || c.n_sheets < 0) fail("shape counts must be non-negative");
  if (c.island_radius_min < 0 || c.island_radius_max < c.island_radius_min) fail("bad island radius range");
  if (c.sheet_thickness_min < 1 || c.sheet_thickness_max < c.sheet_thickness_min) fail("bad sheet thickness range");
  if (c.sheet_length_min < 0 || c.sheet_length_max < c.sheet_length_min) fail("bad sheet length range");
  if (!(c.noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
}

}  // namespace

SynthImage generate(const SynthConfig& config) {
  check(config);
  const int w = config.width, h = config.height;
  CounterRng shapes = CounterRng(config.seed).split(0);
  CounterRng noise = CounterRng(config.seed).split(1);

  std::vector<int> cls(std::size_t(w) * h, kBackground);

  std::vector<Disk> disks;
  for (int k = 0; k < config.n_islands; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const int r = uniform_int(shapes, config.island_radius_min, config.island_radius_max);
      if (2 * r + 1 > w || 2 * r + 1 > h) continue;
      const Disk d{uniform_int(shapes, r, w - 1 - r), uniform_int(shapes, r, h - 1 - r), r};
      const bool clear = std::none_of(disks.begin(), disks.end(), [&](const Disk& o) {
        const double dist = std::hypot(double(d.cx - o.cx), double(d.cy - o.cy));
        return dist <= double(d.r + o.r + 1);
      });
      if (!clear) continue;
      disks.push_back(d);
      placed = true;
    }
    if (!placed)
      throw Error(ErrorKind::Placement, "could not place island " + std::to_string(k) + " after " +
                                            std::to_string(kMaxAttempts) + " attempts");
  }
  for (const auto& d : disks)
    for (int y = d.cy - d.r; y <= d.cy + d.r; ++y)
      for (int x = d.cx - d.r; x <= d.cx + d.r; ++x) {
        const int dx = x - d.cx, dy = y - d.cy;
        if (dx * dx + dy * dy <= d.r * d.r) cls[std::size_t(y) * w + x] = kIsland;
      }

  const int side = std::min(w, h);
  const int len_lo = config.sheet_length_max > 0 ? config.sheet_length_min : std::max(1, side / 4);
  const int len_hi = config.sheet_length_max > 0 ? config.sheet_length_max : std::max(1, side / 2);
  for (int k = 0; k < config.n_sheets; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const int thick = uniform_int(shapes, config.sheet_thickness_min, config.sheet_thickness_max);
      const int len = uniform_int(shapes, len_lo, len_hi);
      const double theta = shapes.uniform(0.0, std::numbers::pi);
      const double half = 0.5 * thick;
      const double hx = 0.5 * len * std::cos(theta), hy = 0.5 * len * std::sin(theta);
      const double lo_x = half + std::abs(hx), hi_x = double(w - 1) - half - std::abs(hx);
      const double lo_y = half + std::abs(hy), hi_y = double(h - 1) - half - std::abs(hy);
      if (lo_x > hi_x || lo_y > hi_y) continue;
      const double cx = shapes.uniform(lo_x, hi_x), cy = shapes.uniform(lo_y, hi_y);
      const double ax = cx - hx, ay = cy - hy, bx = cx + hx, by = cy + hy;
      const int x0 = std::max(0, int(std::floor(std::min(ax, bx) - half)));
      const int x1 = std::min(w - 1, int(std::ceil(std::max(ax, bx) + half)));
      const int y0 = std::max(0, int(std::floor(std::min(ay, by) - half)));
      const int y1 = std::min(h - 1, int(std::ceil(std::max(ay, by) + half)));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
          if (segment_distance(x, y, ax, ay, bx, by) <= half) cls[std::size_t(y) * w + x] = kSheet;
      placed = true;
    }
    if (!placed)
      throw Error(ErrorKind::Placement, "could not place sheet " + std::to_string(k) + " after " +
                                            std::to_string(kMaxAttempts) + " attempts");
  }

  const double p = config.plateau;
  const double plateau[3][3] = {{0.0, 0.0, 0.0}, {p, -p, 0.0}, {-p, p, p}};
  FeatureRaster::Matrix values(Eigen::Index(w) * h, 3);
  // Channel-major noise draw order so the stream layout matches the file layout.
  for (int c = 0; c < 3; ++c)
    for (std::size_t px = 0; px < cls.size(); ++px) {
      const double n = config.noise_sigma > 0.0 ? config.noise_sigma * noise.normal() : 0.0;
      values(Eigen::Index(px), c) = float(plateau[cls[px]][c] + n);
    }

  SynthImage out{FeatureRaster(w, h, std::move(values), {"b_perp", "j_par", "j_dot_e"}), Labeling{}};
  out.truth.width = w;
  out.truth.height = h;
  out.truth.n_clusters = 3;
  out.truth.labels = std::move(cls);
  return out;
}

}  // namespace sce
