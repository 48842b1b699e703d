#include "sce/cli.hpp"

#include <chrono>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "sce/artifacts.hpp"
#include "sce/config.hpp"
#include "sce/ensemble.hpp"
#include "sce/raster.hpp"
#include "sce/synth.hpp"

#include "binary_io.hpp"

namespace fs = std::filesystem;

namespace sce::cli {

namespace {

struct SynthArgs {
  SynthConfig config;
  std::string out;
};

struct RunArgs {
  std::vector<std::string> inputs;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 0;
  bool export_pgm = false;
};

struct CompareArgs {
  std::string a;
  std::string b;
  std::vector<double> taus{1.0};
  std::string out = ".";
};

void make_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory '" + p.string() + "': " + ec.message());
}

void require_outputs(const std::vector<fs::path>& paths) {
  for (const auto& p : paths)
    if (!fs::is_regular_file(p)) throw Error(ErrorKind::Io, "declared output missing: " + p.string());
}

int cmd_synth(const SynthArgs& args, std::ostream& out) {
  const fs::path dir(args.out);
  make_dir(dir);
  const auto image = generate(args.config);
  save_raster(image.raster, dir / "synth.frst");
  save_labeling_pgm(image.truth, dir / "truth.pgm");
  require_outputs({dir / "synth.frst", dir / "synth.frst.names", dir / "truth.pgm", dir / "truth.pgm.counts"});
  out << (dir / "synth.frst").string() << "\n" << (dir / "truth.pgm").string() << "\n";
  return 0;
}

class StageClock {
 public:
  template <typename Fn>
  auto operator()(const std::string& stage, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&] {
      timings.push_back({stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
    };
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        finish();
      } else {
        auto result = fn();
        finish();
        return result;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "stage '" + stage + "' failed: " + e.what());
    }
  }

  std::vector<StageTiming> timings;
};

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  StageClock clock;
  PipelineConfig config = clock("config", [&] { return load_config(args.config); });
  if (args.seed) config.ensemble.master_seed = *args.seed;
  if (config.mode == InputMode::Single && args.inputs.size() != 1)
    throw Error(ErrorKind::Config, "mode = single takes exactly one --input (got " +
                                       std::to_string(args.inputs.size()) + "); set mode = stacked for snapshots");
  validate(config.ensemble);

  const auto rasters = clock("load", [&] {
    std::vector<FeatureRaster> r;
    for (const auto& p : args.inputs) r.push_back(load_raster(p));
    return r;
  });
  const NormalizedRaster data = clock("normalize", [&] {
    auto normalized = normalize_snapshots(rasters, config.norm_scope, config.norm).first;
    return normalized.size() == 1 ? std::move(normalized.front())
                                  : concat_rows<double>(std::span<const NormalizedRaster>(normalized));
  });
  auto runs = clock("train", [&] { return train_ensemble(data, config.ensemble, args.threads); });
  const SceOutput sce = clock("stack", [&] {
    std::vector<MaskSet> sets;
    for (const auto& r : runs) sets.push_back(r.masks);
    return combine(std::move(sets), config.ensemble, args.threads);
  });

  RunManifest manifest;
  manifest.config_hash = config_hash(config);
  manifest.master_seed = config.ensemble.master_seed;
  manifest.notices = sce.notices;
  const fs::path dir = fs::path(args.out) / run_dir_name(manifest.master_seed, manifest.config_hash);
  clock("write", [&] {
    make_dir(dir);
    manifest.files = write_run_artifacts(dir, config, runs, sce, {args.export_pgm});
  });
  manifest.timings = clock.timings;
  write_manifest(dir, manifest);

  for (const auto& n : sce.notices) err << "notice: " << n << "\n";
  out << dir.string() << "\n";
  out << sce.results.size() << " masks ranked, " << sce.cutoff_rank << " selected, " << sce.consensus.size()
      << " consensus masks\n";
  return 0;
}

int cmd_compare(const CompareArgs& args, std::ostream& out) {
  const SceOutput a = load_run_artifacts(args.a);
  const SceOutput b = load_run_artifacts(args.b);
  const auto rows = compare_ensembles(a, b, args.taus);

  const fs::path dir(args.out);
  make_dir(dir);
  std::vector<fs::path> written;
  std::vector<ComparisonRow> som_rows;
  for (const auto& r : rows)
    if (r.kind == ComparisonRow::Kind::Som) som_rows.push_back(r);
  written.push_back(dir / "comparison_som.csv");
  write_comparison_csv(som_rows, written.back());

  std::ostringstream summary;
  for (double tau : args.taus) {
    std::vector<ComparisonRow> sce_rows;
    for (const auto& r : rows)
      if (r.kind == ComparisonRow::Kind::Sce && r.tau == tau) sce_rows.push_back(r);
    written.push_back(dir / ("comparison_sce_tau" + format_real(tau) + ".csv"));
    write_comparison_csv(sce_rows, written.back());
    const auto best = best_matches(rows, tau);
    summary << "tau " << format_real(tau) << ": sce_median " << format_real(best.sce_median) << " ("
            << best.sce_best.size() << " consensus masks), som_median " << format_real(best.som_median) << " ("
            << best.som_best.size() << " som clusters)\n";
  }
  written.push_back(dir / "summary.txt");
  detail::write_text(written.back(), summary.str());
  require_outputs(written);
  out << summary.str();
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Statistical combination of SOM clustering ensembles", "sce"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "write a synthetic raster and its ground-truth labeling");
  s->add_option("--width", synth.config.width)->check(CLI::PositiveNumber);
  s->add_option("--height", synth.config.height)->check(CLI::PositiveNumber);
  s->add_option("--islands", synth.config.n_islands)->check(CLI::NonNegativeNumber);
  s->add_option("--sheets", synth.config.n_sheets)->check(CLI::NonNegativeNumber);
  s->add_option("--noise", synth.config.noise_sigma)->check(CLI::NonNegativeNumber);
  s->add_option("--seed", synth.config.seed);
  s->add_option("--out", synth.out, "output directory")->required();

  RunArgs runa;
  auto* r = app.add_subcommand("run", "train the SOM ensemble and build consensus masks");
  r->add_option("--input", runa.inputs, "FRST raster (repeat for stacked snapshots)")->required();
  r->add_option("--config", runa.config, "key = value config file")->required();
  r->add_option("--seed", runa.seed, "master seed (overrides the config)");
  r->add_option("--out", runa.out, "parent of the run directory")->required();
  r->add_option("--threads", runa.threads, "worker threads, 0 = all cores");
  r->add_flag("--export-pgm", runa.export_pgm, "also render G_sum maps as 16-bit log-scaled PGM");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "compare two run directories");
  c->add_option("--a", cmp.a, "first run directory")->required();
  c->add_option("--b", cmp.b, "second run directory")->required();
  c->add_option("--tau", cmp.taus, "consensus thresholds to compare")->delimiter(',');
  c->add_option("--out", cmp.out, "directory for the comparison CSVs and summary");

  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << "error: " << e.what() << "\n" << sub->help();
    return 2;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, out);
    if (r->parsed()) return cmd_run(runa, out, err);
    return cmd_compare(cmp, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace sce::cli
