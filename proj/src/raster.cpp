#include "sce/raster.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "binary_io.hpp"

namespace sce {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::BadMagic: return "bad-magic";
    case ErrorKind::UnsupportedVersion: return "unsupported-version";
    case ErrorKind::Truncated: return "truncated";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::DegenerateChannel: return "degenerate-channel";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::ContractViolation: return "contract-violation";
    case ErrorKind::EmptyResult: return "empty-result";
    case ErrorKind::Placement: return "placement";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

namespace {

constexpr std::string_view kMagic = "FRST";
constexpr std::uint32_t kVersion = 1;

std::filesystem::path names_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".names";
  return p;
}

template <typename Scalar>
void save_impl(const Raster<Scalar>& raster, const std::filesystem::path& path) {
  if (path.empty()) throw Error(ErrorKind::Io, "empty output path");
  std::vector<unsigned char> out;
  out.reserve(20 + 4 * std::size_t(raster.values().size()));
  detail::put_bytes(out, kMagic);
  detail::put_u32(out, kVersion);
  detail::put_u32(out, std::uint32_t(raster.width()));
  detail::put_u32(out, std::uint32_t(raster.height()));
  detail::put_u32(out, std::uint32_t(raster.channels()));
  const auto& v = raster.values();
  for (Eigen::Index i = 0; i < v.size(); ++i) detail::put_f32(out, static_cast<float>(v.data()[i]));
  detail::write_file(path, out);

  std::string names;
  for (const auto& n : raster.channel_names()) names += n + "\n";
  detail::write_text(names_path(path), names);
}

template <typename Scalar>
NormalizedRaster apply_norm_impl(const Raster<Scalar>& raster, const NormStats& stats,
                                 const NormalizeOptions& options) {
  if (stats.mean.size() != raster.channels() || stats.scale.size() != raster.channels())
    throw Error(ErrorKind::DimensionMismatch, "normalization statistics do not match channel count");
  for (int c = 0; c < raster.channels(); ++c) {
    if (!(stats.scale(c) > 0.0))
      throw Error(ErrorKind::DegenerateChannel,
                  "channel '" + raster.channel_names()[c] + "' is constant (zero standard deviation)");
  }
  Eigen::MatrixXd z = raster.values().template cast<double>();
  for (int c = 0; c < raster.channels(); ++c)
    z.col(c) = (z.col(c).array() - stats.mean(c)) / stats.scale(c);
  if (options.clip_sigma > 0.0) z = z.cwiseMax(-options.clip_sigma).cwiseMin(options.clip_sigma);
  return NormalizedRaster(raster.width(), raster.height(), std::move(z), raster.channel_names());
}

}  // namespace

FeatureRaster load_raster(const std::filesystem::path& path) {
  const auto buf = detail::read_file(path);
  detail::ByteReader in(buf, "'" + path.string() + "'");
  if (in.remaining() < kMagic.size() || in.bytes(kMagic.size()) != kMagic)
    throw Error(ErrorKind::BadMagic, "'" + path.string() + "' is not an FRST raster (bad magic)");
  const auto version = in.u32();
  if (version != kVersion)
    throw Error(ErrorKind::UnsupportedVersion, "'" + path.string() + "': unsupported FRST version " +
                                                   std::to_string(version));
  const auto width = in.u32();
  const auto height = in.u32();
  const auto channels = in.u32();
  if (width == 0 || height == 0 || channels == 0)
    throw Error(ErrorKind::InvalidArgument, "'" + path.string() + "': zero dimension in header");

  const std::uint64_t count = std::uint64_t(width) * height * channels;
  if (count > in.remaining() / 4)
    throw Error(ErrorKind::Truncated, "'" + path.string() + "': truncated payload, header declares " +
                                          std::to_string(count) + " values but file holds " +
                                          std::to_string(in.remaining() / 4));

  FeatureRaster::Matrix values(Eigen::Index(width) * height, Eigen::Index(channels));
  for (std::uint64_t i = 0; i < count; ++i) {
    const float v = in.f32();
    if (!std::isfinite(v))
      throw Error(ErrorKind::NonFinite, "'" + path.string() + "': non-finite value at index " + std::to_string(i));
    values.data()[i] = v;
  }

  std::vector<std::string> names;
  std::ifstream names_in(names_path(path));
  if (names_in) {
    std::string line;
    while (std::getline(names_in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) names.push_back(line);
    }
  }
  return FeatureRaster(int(width), int(height), std::move(values), std::move(names));
}

void save_raster(const FeatureRaster& raster, const std::filesystem::path& path) { save_impl(raster, path); }
void save_raster(const NormalizedRaster& raster, const std::filesystem::path& path) { save_impl(raster, path); }

NormalizedRaster apply_norm(const FeatureRaster& raster, const NormStats& stats, const NormalizeOptions& options) {
  return apply_norm_impl(raster, stats, options);
}

NormalizedRaster apply_norm(const NormalizedRaster& raster, const NormStats& stats,
                            const NormalizeOptions& options) {
  return apply_norm_impl(raster, stats, options);
}

NormStats compute_norm_stats(std::span<const FeatureRaster> rasters) {
  return compute_norm_stats(concat_rows(rasters));
}

std::pair<std::vector<NormalizedRaster>, std::vector<NormStats>> normalize_snapshots(
    std::span<const FeatureRaster> rasters, NormScope scope, const NormalizeOptions& options) {
  std::vector<NormalizedRaster> out;
  std::vector<NormStats> stats;
  if (scope == NormScope::Global) {
    stats.push_back(compute_norm_stats(rasters));
    for (const auto& r : rasters) out.push_back(apply_norm(r, stats.front(), options));
  } else {
    for (const auto& r : rasters) {
      auto [z, s] = normalize(r, options);
      out.push_back(std::move(z));
      stats.push_back(std::move(s));
    }
  }
  return {std::move(out), std::move(stats)};
}

NormalizedRaster denormalize(const NormalizedRaster& raster, const NormStats& stats) {
  if (stats.mean.size() != raster.channels() || stats.scale.size() != raster.channels())
    throw Error(ErrorKind::DimensionMismatch, "normalization statistics do not match channel count");
  Eigen::MatrixXd v = raster.values();
  for (int c = 0; c < raster.channels(); ++c) v.col(c) = v.col(c).array() * stats.scale(c) + stats.mean(c);
  return NormalizedRaster(raster.width(), raster.height(), std::move(v), raster.channel_names());
}

}  // namespace sce
