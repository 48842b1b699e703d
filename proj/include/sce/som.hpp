#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sce/error.hpp"
#include "sce/raster.hpp"

namespace sce {

// Row i holds one sample vector.
using Samples = Eigen::MatrixXd;

struct SomConfig {
  int rows = 15;
  int cols = 10;
  double alpha0 = 0.7;
  double alpha_final = 0.01;
  // 0 selects the 500 x (rows*cols) rule of thumb.
  long iterations = 0;
  // 0 selects max(rows, cols) / 2, floored at sigma_final.
  double sigma0 = 0.0;
  double sigma_final = 1.0;
  int join_k = 4;
  std::uint64_t seed = 0;

  long steps() const { return iterations > 0 ? iterations : 500L * rows * cols; }
  double initial_sigma() const;
  // Learning rate and neighborhood radius decay linearly over [0, steps()-1].
  double alpha_at(long t) const;
  double sigma_at(long t) const;
};

// Throws InvalidArgument naming the violated constraint.
void validate(const SomConfig& config);

// Rectangular lattice; neuron i sits at grid (i / cols, i % cols).
struct SomMap {
  int rows = 0;
  int cols = 0;
  Eigen::MatrixXd weights;  // (rows*cols) x features

  int neurons() const { return rows * cols; }
  int features() const { return int(weights.cols()); }
};

struct Labeling {
  int width = 0;
  int height = 0;
  std::vector<int> labels;  // row-major, pixel p = y * width + x
  int n_clusters = 0;
  // Set when join_k exceeded the number of distinct neuron weights.
  bool reduced_k = false;
  std::vector<std::string> warnings;

  // Throws if a label is out of range or the size is wrong; optionally also
  // requires every id in [0, n_clusters) to occur.
  void validate(bool require_surjective = true) const;
  std::vector<std::size_t> counts() const;
};

SomMap init_map(const SomConfig& config, const Samples& data);

// Lowest flat index wins ties.
template <typename Derived>
Eigen::Index bmu(const SomMap& map, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != map.weights.cols())
    throw Error(ErrorKind::DimensionMismatch, "sample length " + std::to_string(x.size()) +
                                                  " does not match map feature count " +
                                                  std::to_string(map.weights.cols()));
  Eigen::Index best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  const auto xd = x.template cast<double>();
  for (Eigen::Index i = 0; i < map.weights.rows(); ++i) {
    double d2 = 0.0;
    for (Eigen::Index j = 0; j < map.weights.cols(); ++j) {
      const double diff = double(xd(j)) - map.weights(i, j);
      d2 += diff * diff;
    }
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

double neighborhood_weight(long t, Eigen::Index bmu_index, Eigen::Index neuron, const SomConfig& config);

// Single learning step at time t with sample x. Neurons with h < 1e-6 are
// left untouched. Returns the BMU index.
Eigen::Index train_step(SomMap& map, const Eigen::Ref<const Eigen::RowVectorXd>& x, long t,
                        const SomConfig& config);

SomMap train(SomMap map, const Samples& data, const SomConfig& config);

template <typename Derived>
double quantization_error(const SomMap& map, const Eigen::MatrixBase<Derived>& data) {
  if (data.rows() == 0) throw Error(ErrorKind::InvalidArgument, "quantization error of empty data");
  double total = 0.0;
  for (Eigen::Index s = 0; s < data.rows(); ++s) {
    const auto i = bmu(map, data.row(s));
    total += (map.weights.row(i) - data.row(s).template cast<double>()).norm();
  }
  return total / double(data.rows());
}

struct NeuronGroups {
  std::vector<int> group;  // per neuron
  int k = 0;
  bool reduced = false;
};

// Seeded k-means (k-means++ seeding, 50 Lloyd iterations) over neuron weights.
NeuronGroups join_neurons(const SomMap& map, int join_k, std::uint64_t seed);

// Groups neurons into config.join_k clusters, assigns each pixel its BMU's
// group, then drops groups with no pixels and compacts the ids.
Labeling label_pixels(const SomMap& map, const NormalizedRaster& raster, const SomConfig& config,
                      unsigned workers = 1);

Samples samples_of(const NormalizedRaster& raster);

// init + train + label with the stream layout used by the ensemble runner.
struct SomRun {
  SomMap map;
  Labeling labeling;
};
SomRun run_som(const NormalizedRaster& raster, const SomConfig& config, unsigned workers = 1);

void save_som(const SomMap& map, const std::filesystem::path& path);
SomMap load_som(const std::filesystem::path& path);

// P5 PGM with the cluster id as gray level, plus "<path>.counts" listing
// "id count" per line.
void save_labeling_pgm(const Labeling& labeling, const std::filesystem::path& path);

}  // namespace sce
