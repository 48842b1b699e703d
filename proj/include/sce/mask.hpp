#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "sce/error.hpp"
#include "sce/som.hpp"

namespace sce {

// Boolean r x t matrix packed 64 pixels per word, pixel p = y * width + x at
// bit p % 64 of word p / 64. Padding bits past width*height stay zero.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(int width, int height);

  static BitMatrix from_dense(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& dense);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return std::size_t(width_) * std::size_t(height_); }

  bool test(std::size_t p) const { return (words_[p >> 6] >> (p & 63)) & 1u; }
  bool operator()(int y, int x) const { return test(std::size_t(y) * width_ + x); }
  void set(std::size_t p, bool v = true) {
    const std::uint64_t bit = std::uint64_t{1} << (p & 63);
    if (v)
      words_[p >> 6] |= bit;
    else
      words_[p >> 6] &= ~bit;
  }

  std::size_t popcount() const;
  bool any() const;
  bool is_subset_of(const BitMatrix& other) const;

  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> to_dense() const;

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint64_t> words_;
};

struct MaskId {
  int run = 0;
  int cluster = 0;
  friend auto operator<=>(const MaskId&, const MaskId&) = default;
};

// One cluster of one clustering run. Never empty.
class ClusterMask {
 public:
  ClusterMask(BitMatrix bits, MaskId origin);

  int width() const { return bits_.width(); }
  int height() const { return bits_.height(); }
  const BitMatrix& bits() const { return bits_; }
  MaskId origin() const { return origin_; }
  std::size_t popcount() const { return bits_.popcount(); }

  friend bool operator==(const ClusterMask&, const ClusterMask&) = default;

 private:
  BitMatrix bits_;
  MaskId origin_;
};

struct MaskSet {
  int run = 0;
  std::vector<ClusterMask> masks;

  // Every pixel true in exactly one mask.
  bool is_partition() const;
};

struct OverlapCounts {
  std::uint64_t i_sum = 0;
  std::uint64_t u_sum = 0;
  std::uint64_t r_sum = 0;
  friend bool operator==(const OverlapCounts&, const OverlapCounts&) = default;
};

using SumMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Empty cluster ids are skipped, so the result may hold fewer masks than
// n_clusters when the labeling is not surjective.
MaskSet masks_from_labeling(const Labeling& labeling, int run = 0);

BitMatrix mask_union(const BitMatrix& a, const BitMatrix& b);
BitMatrix mask_intersection(const BitMatrix& a, const BitMatrix& b);
SumMatrix mask_sum(const BitMatrix& a, const BitMatrix& b);
// Fused word-parallel popcount pass; nothing is materialized.
OverlapCounts overlap_counts(const BitMatrix& a, const BitMatrix& b);

inline BitMatrix mask_union(const ClusterMask& a, const ClusterMask& b) { return mask_union(a.bits(), b.bits()); }
inline BitMatrix mask_intersection(const ClusterMask& a, const ClusterMask& b) {
  return mask_intersection(a.bits(), b.bits());
}
inline SumMatrix mask_sum(const ClusterMask& a, const ClusterMask& b) { return mask_sum(a.bits(), b.bits()); }
inline OverlapCounts overlap_counts(const ClusterMask& a, const ClusterMask& b) {
  return overlap_counts(a.bits(), b.bits());
}

// MSK1: magic, u32 width, u32 height, ceil(w*h/8) bytes, MSB-first.
void save_mask(const BitMatrix& mask, const std::filesystem::path& path);
BitMatrix load_mask(const std::filesystem::path& path);
// Binary PBM (P4), 1 = set.
void save_pbm(const BitMatrix& mask, const std::filesystem::path& path);

}  // namespace sce
