#include "sce/mask.hpp"

#include <algorithm>

#include "binary_io.hpp"

namespace sce {

namespace {

void require_same_shape(const BitMatrix& a, const BitMatrix& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw Error(ErrorKind::DimensionMismatch, "mask dimensions differ: " + std::to_string(a.width()) + "x" +
                                                  std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                                  "x" + std::to_string(b.height()));
}

template <typename Op>
BitMatrix combine(const BitMatrix& a, const BitMatrix& b, Op op) {
  require_same_shape(a, b);
  BitMatrix out(a.width(), a.height());
  auto& w = out.words();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = op(a.words()[i], b.words()[i]);
  return out;
}

}  // namespace

BitMatrix::BitMatrix(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw Error(ErrorKind::InvalidArgument, "mask dimensions must be at least 1x1");
  words_.assign((size() + 63) / 64, 0);
}

BitMatrix BitMatrix::from_dense(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& dense) {
  BitMatrix out(int(dense.cols()), int(dense.rows()));
  for (Eigen::Index y = 0; y < dense.rows(); ++y)
    for (Eigen::Index x = 0; x < dense.cols(); ++x)
      if (dense(y, x)) out.set(std::size_t(y) * out.width_ + std::size_t(x));
  return out;
}

std::size_t BitMatrix::popcount() const {
  std::size_t n = 0;
  for (auto w : words_) n += std::size_t(std::popcount(w));
  return n;
}

bool BitMatrix::any() const {
  return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
}

bool BitMatrix::is_subset_of(const BitMatrix& other) const {
  require_same_shape(*this, other);
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & ~other.words_[i]) return false;
  return true;
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> BitMatrix::to_dense() const {
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> out(height_, width_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) out(y, x) = (*this)(y, x);
  return out;
}

ClusterMask::ClusterMask(BitMatrix bits, MaskId origin) : bits_(std::move(bits)), origin_(origin) {
  if (!bits_.any())
    throw Error(ErrorKind::EmptyResult, "cluster mask (run " + std::to_string(origin.run) + ", cluster " +
                                            std::to_string(origin.cluster) + ") is empty");
}

bool MaskSet::is_partition() const {
  if (masks.empty()) return false;
  const auto& first = masks.front().bits();
  std::vector<std::uint64_t> seen(first.words().size(), 0);
  for (const auto& m : masks) {
    if (m.width() != first.width() || m.height() != first.height()) return false;
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (seen[i] & m.bits().words()[i]) return false;
      seen[i] |= m.bits().words()[i];
    }
  }
  BitMatrix all(first.width(), first.height());
  all.words() = seen;
  return all.popcount() == all.size();
}

MaskSet masks_from_labeling(const Labeling& labeling, int run) {
  labeling.validate(false);
  std::vector<BitMatrix> bits(std::size_t(labeling.n_clusters), BitMatrix(labeling.width, labeling.height));
  for (std::size_t p = 0; p < labeling.labels.size(); ++p) bits[labeling.labels[p]].set(p);
  MaskSet out;
  out.run = run;
  for (int k = 0; k < labeling.n_clusters; ++k)
    if (bits[k].any()) out.masks.emplace_back(std::move(bits[k]), MaskId{run, k});
  return out;
}

BitMatrix mask_union(const BitMatrix& a, const BitMatrix& b) {
  return combine(a, b, [](std::uint64_t x, std::uint64_t y) { return x | y; });
}

BitMatrix mask_intersection(const BitMatrix& a, const BitMatrix& b) {
  return combine(a, b, [](std::uint64_t x, std::uint64_t y) { return x & y; });
}

SumMatrix mask_sum(const BitMatrix& a, const BitMatrix& b) {
  require_same_shape(a, b);
  SumMatrix out(a.height(), a.width());
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) out(y, x) = std::uint8_t(a(y, x)) + std::uint8_t(b(y, x));
  return out;
}

OverlapCounts overlap_counts(const BitMatrix& a, const BitMatrix& b) {
  require_same_shape(a, b);
  const auto& wa = a.words();
  const auto& wb = b.words();
  std::uint64_t i_sum = 0, u_sum = 0;
  for (std::size_t k = 0; k < wa.size(); ++k) {
    i_sum += std::uint64_t(std::popcount(wa[k] & wb[k]));
    u_sum += std::uint64_t(std::popcount(wa[k] | wb[k]));
  }
  return {i_sum, u_sum, u_sum + i_sum};
}

void save_mask(const BitMatrix& mask, const std::filesystem::path& path) {
  std::vector<unsigned char> out;
  detail::put_bytes(out, "MSK1");
  detail::put_u32(out, std::uint32_t(mask.width()));
  detail::put_u32(out, std::uint32_t(mask.height()));
  const std::size_t n = mask.size();
  std::vector<unsigned char> packed((n + 7) / 8, 0);
  for (std::size_t p = 0; p < n; ++p)
    if (mask.test(p)) packed[p >> 3] |= static_cast<unsigned char>(0x80u >> (p & 7));
  out.insert(out.end(), packed.begin(), packed.end());
  detail::write_file(path, out);
}

BitMatrix load_mask(const std::filesystem::path& path) {
  const auto buf = detail::read_file(path);
  detail::ByteReader in(buf, "'" + path.string() + "'");
  if (in.remaining() < 4 || in.bytes(4) != "MSK1")
    throw Error(ErrorKind::BadMagic, "'" + path.string() + "' is not an MSK1 mask (bad magic)");
  const auto w = in.u32();
  const auto h = in.u32();
  if (w == 0 || h == 0) throw Error(ErrorKind::InvalidArgument, "'" + path.string() + "': zero mask dimension");
  BitMatrix mask{int(w), int(h)};
  const std::size_t n = mask.size();
  in.need((n + 7) / 8);
  const unsigned char* bytes = in.cursor();
  for (std::size_t p = 0; p < n; ++p)
    if (bytes[p >> 3] & (0x80u >> (p & 7))) mask.set(p);
  return mask;
}

void save_pbm(const BitMatrix& mask, const std::filesystem::path& path) {
  std::vector<unsigned char> out;
  detail::put_bytes(out, "P4\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) + "\n");
  const std::size_t row_bytes = (std::size_t(mask.width()) + 7) / 8;
  for (int y = 0; y < mask.height(); ++y) {
    std::vector<unsigned char> row(row_bytes, 0);
    for (int x = 0; x < mask.width(); ++x)
      if (mask(y, x)) row[std::size_t(x) >> 3] |= static_cast<unsigned char>(0x80u >> (x & 7));
    out.insert(out.end(), row.begin(), row.end());
  }
  detail::write_file(path, out);
}

}  // namespace sce
