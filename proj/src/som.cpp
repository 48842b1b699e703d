#include "sce/som.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "binary_io.hpp"
#include "sce/parallel.hpp"
#include "sce/rng.hpp"

namespace sce {

namespace {

// Stream ids under the per-run seed.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kSampleStream = 1;
constexpr std::uint64_t kJoinStream = 2;

constexpr double kNeighborhoodFloor = 1e-6;
constexpr int kJoinIterations = 50;

double lerp_schedule(double from, double to, long t, long steps) {
  if (steps <= 1) return from;
  return std::lerp(from, to, double(t) / double(steps - 1));
}

Eigen::Index nearest_row(const Eigen::MatrixXd& centers, const Eigen::RowVectorXd& x) {
  Eigen::Index best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    const double d2 = (centers.row(c) - x).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

int count_distinct_rows(const Eigen::MatrixXd& m) {
  std::set<std::vector<double>> seen;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[j] = m(i, j);
    seen.insert(std::move(row));
  }
  return int(seen.size());
}

}  // namespace

double SomConfig::initial_sigma() const {
  if (sigma0 > 0.0) return sigma0;
  return std::max(sigma_final, 0.5 * double(std::max(rows, cols)));
}

double SomConfig::alpha_at(long t) const { return lerp_schedule(alpha0, alpha_final, t, steps()); }

double SomConfig::sigma_at(long t) const { return lerp_schedule(initial_sigma(), sigma_final, t, steps()); }

void validate(const SomConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, "SOM config: " + msg); };
  if (c.rows < 1 || c.cols < 1) fail("map dimensions must be positive");
  if (!(c.alpha_final > 0.0 && c.alpha_final <= c.alpha0 && c.alpha0 < 1.0))
    fail("learning rates must satisfy 0 < alpha_final <= alpha0 < 1");
  if (!(c.sigma_final >= 1.0 && c.sigma_final <= c.initial_sigma()))
    fail("radii must satisfy 1 <= sigma_final <= sigma0");
  if (c.iterations < 0) fail("iterations must be positive");
  if (c.join_k < 2 || c.join_k > c.rows * c.cols) fail("join_k must lie in [2, rows*cols]");
}

void Labeling::validate(bool require_surjective) const {
  if (width < 1 || height < 1 || labels.size() != std::size_t(width) * std::size_t(height))
    throw Error(ErrorKind::DimensionMismatch, "labeling size does not match its dimensions");
  if (n_clusters < 1) throw Error(ErrorKind::InvalidArgument, "labeling has no clusters");
  std::vector<bool> seen(n_clusters, false);
  for (int l : labels) {
    if (l < 0 || l >= n_clusters) throw Error(ErrorKind::InvalidArgument, "label out of range");
    seen[l] = true;
  }
  if (require_surjective && std::find(seen.begin(), seen.end(), false) != seen.end())
    throw Error(ErrorKind::InvalidArgument, "labeling leaves a cluster id unused");
}

std::vector<std::size_t> Labeling::counts() const {
  std::vector<std::size_t> out(std::max(n_clusters, 0), 0);
  for (int l : labels)
    if (l >= 0 && l < n_clusters) ++out[l];
  return out;
}

Samples samples_of(const NormalizedRaster& raster) { return raster.values(); }

SomMap init_map(const SomConfig& config, const Samples& data) {
  if (data.rows() == 0 || data.cols() == 0) throw Error(ErrorKind::InvalidArgument, "cannot initialize SOM from empty data");
  SomMap map;
  map.rows = config.rows;
  map.cols = config.cols;
  map.weights.resize(Eigen::Index(config.rows) * config.cols, data.cols());
  const Eigen::RowVectorXd lo = data.colwise().minCoeff();
  const Eigen::RowVectorXd hi = data.colwise().maxCoeff();
  CounterRng rng = CounterRng(config.seed).split(kInitStream);
  for (Eigen::Index i = 0; i < map.weights.rows(); ++i)
    for (Eigen::Index j = 0; j < map.weights.cols(); ++j)
      map.weights(i, j) = lo(j) == hi(j) ? lo(j) : std::min(hi(j), rng.uniform(lo(j), hi(j)));
  return map;
}

double neighborhood_weight(long t, Eigen::Index bmu_index, Eigen::Index neuron, const SomConfig& config) {
  const double dr = double(bmu_index / config.cols - neuron / config.cols);
  const double dc = double(bmu_index % config.cols - neuron % config.cols);
  const double g2 = dr * dr + dc * dc;
  if (g2 == 0.0) return 1.0;
  const double sigma = config.sigma_at(t);
  return std::exp(-g2 / (2.0 * sigma * sigma));
}

Eigen::Index train_step(SomMap& map, const Eigen::Ref<const Eigen::RowVectorXd>& x, long t,
                        const SomConfig& config) {
  const Eigen::Index c = bmu(map, x);
  const double alpha = config.alpha_at(t);
  for (Eigen::Index i = 0; i < map.weights.rows(); ++i) {
    const double h = neighborhood_weight(t, c, i, config);
    if (h < kNeighborhoodFloor) continue;
    const double rate = alpha * h;
    for (Eigen::Index j = 0; j < map.weights.cols(); ++j) {
      const double w = map.weights(i, j);
      const double updated = w + rate * (x(j) - w);
      // rounding can land one ulp outside [w, x]
      map.weights(i, j) = std::clamp(updated, std::min(w, x(j)), std::max(w, x(j)));
    }
  }
  return c;
}

SomMap train(SomMap map, const Samples& data, const SomConfig& config) {
  if (data.rows() == 0) throw Error(ErrorKind::InvalidArgument, "cannot train SOM on empty data");
  if (map.rows != config.rows || map.cols != config.cols)
    throw Error(ErrorKind::DimensionMismatch, "map dimensions do not match the configuration");
  CounterRng rng = CounterRng(config.seed).split(kSampleStream);
  const long steps = config.steps();
  Eigen::RowVectorXd x(data.cols());
  for (long t = 0; t < steps; ++t) {
    x = data.row(Eigen::Index(rng.below(std::uint64_t(data.rows()))));
    train_step(map, x, t, config);
  }
  return map;
}

NeuronGroups join_neurons(const SomMap& map, int join_k, std::uint64_t seed) {
  if (join_k < 1) throw Error(ErrorKind::InvalidArgument, "join_k must be at least 1");
  const Eigen::MatrixXd& w = map.weights;
  const Eigen::Index n = w.rows();
  NeuronGroups out;
  const int distinct = count_distinct_rows(w);
  out.k = std::min(join_k, distinct);
  out.reduced = out.k < join_k;
  out.group.assign(std::size_t(n), 0);
  if (out.k == 1) return out;

  // k-means++ seeding; with k <= distinct rows the D^2 mass never vanishes.
  CounterRng rng = CounterRng(seed).split(kJoinStream);
  Eigen::MatrixXd centers(out.k, w.cols());
  centers.row(0) = w.row(Eigen::Index(rng.below(std::uint64_t(n))));
  Eigen::VectorXd d2 = (w.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < out.k; ++c) {
    const double total = d2.sum();
    double target = rng.uniform() * total;
    Eigen::Index pick = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (d2(i) <= 0.0) continue;
      if (target < d2(i)) {
        pick = i;
        break;
      }
      target -= d2(i);
    }
    while (d2(pick) <= 0.0) --pick;  // guard against the rounding tail
    centers.row(c) = w.row(pick);
    d2 = d2.cwiseMin((w.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  for (int iter = 0; iter < kJoinIterations; ++iter) {
    bool changed = iter == 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int g = int(nearest_row(centers, w.row(i)));
      if (g != out.group[i]) changed = true;
      out.group[i] = g;
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(out.k, w.cols());
    std::vector<int> sizes(out.k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(out.group[i]) += w.row(i);
      ++sizes[out.group[i]];
    }
    // empty groups keep their previous center
    for (int c = 0; c < out.k; ++c)
      if (sizes[c] > 0) centers.row(c) = sums.row(c) / double(sizes[c]);
  }
  return out;
}

Labeling label_pixels(const SomMap& map, const NormalizedRaster& raster, const SomConfig& config, unsigned workers) {
  if (raster.channels() != map.features())
    throw Error(ErrorKind::DimensionMismatch, "raster channel count does not match SOM feature count");
  const NeuronGroups groups = join_neurons(map, config.join_k, config.seed);

  const Eigen::Index n = raster.pixel_count();
  std::vector<int> raw(std::size_t(n), 0);
  constexpr Eigen::Index kBlock = 4096;
  const std::size_t blocks = std::size_t((n + kBlock - 1) / kBlock);
  parallel_for(blocks, workers, [&](std::size_t b) {
    const Eigen::Index begin = Eigen::Index(b) * kBlock;
    const Eigen::Index end = std::min(n, begin + kBlock);
    for (Eigen::Index p = begin; p < end; ++p) raw[p] = groups.group[bmu(map, raster.pixel(p))];
  });

  // Compact: ascending group id order, dropping groups no pixel landed in.
  std::vector<int> remap(std::size_t(groups.k), -1);
  for (int g : raw) remap[g] = 0;
  int next = 0;
  for (auto& r : remap)
    if (r == 0) r = next++;

  Labeling out;
  out.width = raster.width();
  out.height = raster.height();
  out.n_clusters = next;
  out.reduced_k = groups.reduced;
  out.labels.resize(raw.size());
  for (std::size_t p = 0; p < raw.size(); ++p) out.labels[p] = remap[raw[p]];
  if (groups.reduced)
    out.warnings.push_back("join_k " + std::to_string(config.join_k) + " exceeds distinct neuron weights; using " +
                           std::to_string(groups.k));
  if (next < groups.k)
    out.warnings.push_back(std::to_string(groups.k - next) + " neuron group(s) received no pixels and were dropped");
  return out;
}

SomRun run_som(const NormalizedRaster& raster, const SomConfig& config, unsigned workers) {
  const Samples data = samples_of(raster);
  SomMap map = train(init_map(config, data), data, config);
  Labeling labeling = label_pixels(map, raster, config, workers);
  return {std::move(map), std::move(labeling)};
}

void save_som(const SomMap& map, const std::filesystem::path& path) {
  std::vector<unsigned char> out;
  detail::put_bytes(out, "SOM1");
  detail::put_u32(out, std::uint32_t(map.rows));
  detail::put_u32(out, std::uint32_t(map.cols));
  detail::put_u32(out, std::uint32_t(map.features()));
  for (Eigen::Index i = 0; i < map.weights.rows(); ++i)
    for (Eigen::Index j = 0; j < map.weights.cols(); ++j) detail::put_f32(out, float(map.weights(i, j)));
  detail::write_file(path, out);
}

SomMap load_som(const std::filesystem::path& path) {
  const auto buf = detail::read_file(path);
  detail::ByteReader in(buf, "'" + path.string() + "'");
  if (in.remaining() < 4 || in.bytes(4) != "SOM1")
    throw Error(ErrorKind::BadMagic, "'" + path.string() + "' is not a SOM1 map (bad magic)");
  SomMap map;
  map.rows = int(in.u32());
  map.cols = int(in.u32());
  const int l = int(in.u32());
  const std::uint64_t count = std::uint64_t(map.rows) * map.cols * l;
  if (count > in.remaining() / 4) throw Error(ErrorKind::Truncated, "'" + path.string() + "': truncated weights");
  map.weights.resize(Eigen::Index(map.rows) * map.cols, l);
  for (Eigen::Index i = 0; i < map.weights.rows(); ++i)
    for (Eigen::Index j = 0; j < l; ++j) {
      const float v = in.f32();
      if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "'" + path.string() + "': non-finite weight");
      map.weights(i, j) = v;
    }
  return map;
}

void save_labeling_pgm(const Labeling& labeling, const std::filesystem::path& path) {
  labeling.validate(false);
  const int maxval = std::max(1, labeling.n_clusters - 1);
  std::vector<unsigned char> out;
  detail::put_bytes(out, "P5\n" + std::to_string(labeling.width) + " " + std::to_string(labeling.height) + "\n" +
                             std::to_string(maxval) + "\n");
  for (int l : labeling.labels) {
    if (maxval < 256) {
      out.push_back(static_cast<unsigned char>(l));
    } else {
      out.push_back(static_cast<unsigned char>(l >> 8));
      out.push_back(static_cast<unsigned char>(l & 0xff));
    }
  }
  detail::write_file(path, out);

  std::ostringstream counts;
  const auto c = labeling.counts();
  for (std::size_t i = 0; i < c.size(); ++i) counts << i << ' ' << c[i] << '\n';
  auto side = path;
  side += ".counts";
  detail::write_text(side, counts.str());
}

}  // namespace sce
