#pragma once

#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sce/error.hpp"

namespace sce {

// Multi-channel image whose pixels carry feature vectors.
//
// Storage is a (height*width) x channels column-major matrix, so the raw
// buffer is channel-major and row-major within a channel, which is exactly
// the FRST payload layout. Pixel p = y * width + x.
template <typename Scalar>
class Raster {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Raster() = default;

  Raster(int width, int height, Matrix values, std::vector<std::string> channel_names = {})
      : width_(width), height_(height), values_(std::move(values)), names_(std::move(channel_names)) {
    if (width_ < 1 || height_ < 1)
      throw Error(ErrorKind::InvalidArgument, "raster dimensions must be at least 1x1");
    if (values_.cols() < 1) throw Error(ErrorKind::InvalidArgument, "raster needs at least one channel");
    if (values_.rows() != Eigen::Index(width_) * height_)
      throw Error(ErrorKind::DimensionMismatch, "raster value count does not match width*height");
    if (!values_.allFinite()) throw Error(ErrorKind::NonFinite, "raster contains non-finite values");
    if (names_.empty()) {
      for (Eigen::Index c = 0; c < values_.cols(); ++c) names_.push_back("c" + std::to_string(c));
    } else if (names_.size() != std::size_t(values_.cols())) {
      throw Error(ErrorKind::DimensionMismatch, "channel name count does not match channel count");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return int(values_.cols()); }
  Eigen::Index pixel_count() const { return values_.rows(); }
  const std::vector<std::string>& channel_names() const { return names_; }

  const Matrix& values() const { return values_; }
  Scalar at(int channel, int y, int x) const { return values_(Eigen::Index(y) * width_ + x, channel); }
  auto pixel(Eigen::Index p) const { return values_.row(p); }
  auto channel(int c) const { return values_.col(c); }

  template <typename Other>
  Raster<Other> cast() const {
    return Raster<Other>(width_, height_, values_.template cast<Other>(), names_);
  }

  friend bool operator==(const Raster& a, const Raster& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.names_ == b.names_ &&
           a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  Matrix values_;
  std::vector<std::string> names_;
};

using FeatureRaster = Raster<float>;
using NormalizedRaster = Raster<double>;

struct NormStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // population standard deviation
};

struct NormalizeOptions {
  // Symmetric clip of z-scores at +-clip_sigma; 0 disables.
  double clip_sigma = 0.0;
};

enum class NormScope { Global, PerSnapshot };

// FRST binary format. Channel names go to "<path>.names" when present.
FeatureRaster load_raster(const std::filesystem::path& path);
void save_raster(const FeatureRaster& raster, const std::filesystem::path& path);
// Values are rounded to binary32.
void save_raster(const NormalizedRaster& raster, const std::filesystem::path& path);

NormStats compute_norm_stats(std::span<const FeatureRaster> rasters);

template <typename Scalar>
NormStats compute_norm_stats(const Raster<Scalar>& raster) {
  NormStats stats;
  const auto values = raster.values().template cast<double>();
  const double n = double(values.rows());
  stats.mean = values.colwise().sum().transpose() / n;
  stats.scale.resize(values.cols());
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    const double var = (values.col(c).array() - stats.mean(c)).square().sum() / n;
    stats.scale(c) = std::sqrt(var);
  }
  return stats;
}

NormalizedRaster apply_norm(const FeatureRaster& raster, const NormStats& stats,
                            const NormalizeOptions& options = {});
NormalizedRaster apply_norm(const NormalizedRaster& raster, const NormStats& stats,
                            const NormalizeOptions& options = {});

// Per-channel z-score with population standard deviation.
template <typename Scalar>
std::pair<NormalizedRaster, NormStats> normalize(const Raster<Scalar>& raster,
                                                 const NormalizeOptions& options = {}) {
  NormStats stats = compute_norm_stats(raster);
  NormalizedRaster out = apply_norm(raster, stats, options);
  return {std::move(out), std::move(stats)};
}

// Normalizes several snapshots either with one set of statistics over the
// concatenated pixel set (Global) or independently (PerSnapshot).
std::pair<std::vector<NormalizedRaster>, std::vector<NormStats>> normalize_snapshots(
    std::span<const FeatureRaster> rasters, NormScope scope, const NormalizeOptions& options = {});

NormalizedRaster denormalize(const NormalizedRaster& raster, const NormStats& stats);

// Stacks equally wide snapshots vertically into one raster.
template <typename Scalar>
Raster<Scalar> concat_rows(std::span<const Raster<Scalar>> rasters) {
  if (rasters.empty()) throw Error(ErrorKind::InvalidArgument, "no rasters to concatenate");
  const int w = rasters.front().width();
  const int c = rasters.front().channels();
  Eigen::Index total = 0;
  int h = 0;
  for (const auto& r : rasters) {
    if (r.width() != w || r.channels() != c)
      throw Error(ErrorKind::DimensionMismatch, "snapshots differ in width or channel count");
    total += r.pixel_count();
    h += r.height();
  }
  typename Raster<Scalar>::Matrix values(total, c);
  Eigen::Index row = 0;
  for (const auto& r : rasters) {
    values.middleRows(row, r.pixel_count()) = r.values();
    row += r.pixel_count();
  }
  return Raster<Scalar>(w, h, std::move(values), rasters.front().channel_names());
}

}  // namespace sce
