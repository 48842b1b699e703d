#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "sce/mask.hpp"
#include "sce/rng.hpp"

namespace sce::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sce_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<unsigned char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

// Random mask with per-pixel density drawn from [0, 1]; never empty when
// `nonempty` is set.
inline BitMatrix random_bits(CounterRng& rng, int w, int h, bool nonempty = true) {
  BitMatrix m(w, h);
  const double density = rng.uniform();
  for (std::size_t p = 0; p < m.size(); ++p)
    if (rng.uniform() < density) m.set(p);
  if (nonempty && !m.any()) m.set(rng.below(m.size()));
  return m;
}

inline BitMatrix bits_from(const std::vector<int>& v, int w, int h) {
  BitMatrix m(w, h);
  for (std::size_t p = 0; p < v.size(); ++p)
    if (v[p]) m.set(p);
  return m;
}

inline BitMatrix row_bits(const std::vector<int>& v) { return bits_from(v, int(v.size()), 1); }

}  // namespace sce::test
