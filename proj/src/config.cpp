#include "sce/config.hpp"

#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>

#include "binary_io.hpp"

namespace sce {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error(ErrorKind::Config, "config line " + std::to_string(line) + ": " + msg);
}

template <typename T>
T parse_number(const std::string& text, int line, const std::string& key) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty())
    fail(line, "'" + key + "': cannot parse '" + text + "' as a number");
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, int line, const std::string& key) {
  std::vector<T> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_number<T>(trim(std::string_view(text).substr(start, comma - start)), line, key));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>)
      out += fmt(v[i]);
    else
      out += std::to_string(v[i]);
  }
  return out;
}

// The grid is kept in raw form so canonical_text can reproduce it.
struct RawGrid {
  SomConfig base;
  std::vector<double> alphas{0.6, 0.7, 0.8};
  std::vector<long> iterations{10000, 20000, 30000, 40000, 50000};
  std::vector<int> join_k{3, 4, 5, 6};
  int runs = 0;
};

}  // namespace

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  RawGrid grid;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty()) fail(line, "missing key");
    if (value.empty()) fail(line, "'" + key + "' has no value");
    if (!seen.insert(key).second) fail(line, "duplicate key '" + key + "'");

    if (key == "seed") cfg.ensemble.master_seed = parse_number<std::uint64_t>(value, line, key);
    else if (key == "map_rows") grid.base.rows = parse_number<int>(value, line, key);
    else if (key == "map_cols") grid.base.cols = parse_number<int>(value, line, key);
    else if (key == "alphas") grid.alphas = parse_list<double>(value, line, key);
    else if (key == "iterations") grid.iterations = parse_list<long>(value, line, key);
    else if (key == "runs") grid.runs = parse_number<int>(value, line, key);
    else if (key == "alpha_final") grid.base.alpha_final = parse_number<double>(value, line, key);
    else if (key == "sigma0") grid.base.sigma0 = parse_number<double>(value, line, key);
    else if (key == "sigma_final") grid.base.sigma_final = parse_number<double>(value, line, key);
    else if (key == "join_k") grid.join_k = parse_list<int>(value, line, key);
    else if (key == "epsilon") cfg.ensemble.ratio.epsilon = parse_number<double>(value, line, key);
    else if (key == "ratio_cap") cfg.ensemble.ratio.ratio_cap = parse_number<double>(value, line, key);
    else if (key == "gap_delta") cfg.ensemble.gap_delta = parse_number<double>(value, line, key);
    else if (key == "thresholds") cfg.ensemble.thresholds = parse_list<double>(value, line, key);
    else if (key == "clip_sigma") cfg.norm.clip_sigma = parse_number<double>(value, line, key);
    else if (key == "norm_scope") {
      if (value == "global") cfg.norm_scope = NormScope::Global;
      else if (value == "per_snapshot") cfg.norm_scope = NormScope::PerSnapshot;
      else fail(line, "norm_scope must be 'global' or 'per_snapshot'");
    } else if (key == "mode") {
      if (value == "single") cfg.mode = InputMode::Single;
      else if (value == "stacked") cfg.mode = InputMode::Stacked;
      else fail(line, "mode must be 'single' or 'stacked'");
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  }
  if (grid.runs < 0) throw Error(ErrorKind::Config, "config: runs must be >= 0");
  if (cfg.norm.clip_sigma < 0) throw Error(ErrorKind::Config, "config: clip_sigma must be >= 0");
  try {
    cfg.ensemble.run_configs = make_run_grid(grid.base, grid.alphas, grid.iterations, grid.join_k, grid.runs);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, std::string("config: ") + e.what());
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  try {
    return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string canonical_text(const PipelineConfig& config) {
  std::ostringstream out;
  const auto& e = config.ensemble;
  out << "runs = " << e.run_configs.size() << "\n";
  for (std::size_t i = 0; i < e.run_configs.size(); ++i) {
    const auto& c = e.run_configs[i];
    out << "run." << i << " = " << c.rows << "," << c.cols << "," << fmt(c.alpha0) << "," << fmt(c.alpha_final)
        << "," << c.iterations << "," << fmt(c.sigma0) << "," << fmt(c.sigma_final) << "," << c.join_k << "\n";
  }
  out << "epsilon = " << fmt(e.ratio.epsilon) << "\n";
  out << "ratio_cap = " << fmt(e.ratio.ratio_cap) << "\n";
  out << "gap_delta = " << fmt(e.gap_delta) << "\n";
  out << "thresholds = " << join(e.thresholds) << "\n";
  out << "clip_sigma = " << fmt(config.norm.clip_sigma) << "\n";
  out << "norm_scope = " << (config.norm_scope == NormScope::Global ? "global" : "per_snapshot") << "\n";
  out << "mode = " << (config.mode == InputMode::Single ? "single" : "stacked") << "\n";
  return out.str();
}

std::string config_hash(const PipelineConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_text(config)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sce
