// nerve: eigenspectrum diagnostics over FFN activation dumps.
//
//   nerve analyze   --dump-dir D --out O [--solver ...] [--stratify N]
//   nerve classify  --dump-dir D --out O [--thresholds t.json]
//   nerve compare   --dump-dir D --out O --fractions 0.05,0.1 --ranks 256,512
//   nerve correlate --metrics O/metrics.csv --loss loss.csv --out O
//   nerve synth     --out D --dim 32 --tokens 1600 --layers 2 --steps 0,100 --pre one_hot --post uniform
//   nerve info      FILE...
//
// On failure the last line on stderr is a JSON object {"error": kind, "message": ...}.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nerve/errors.hpp"
#include "nerve/ingest.hpp"
#include "nerve/report.hpp"
#include "nerve/rng.hpp"
#include "nerve/synth.hpp"

namespace fs = std::filesystem;

namespace {

int report_error(std::string_view kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
  return 1;
}

struct PipelineFlags {
  std::string dump_dir;
  std::string out;
  std::vector<std::uint32_t> layers;
  std::vector<std::uint64_t> steps;
  std::optional<double> sample_fraction;
  std::uint64_t seed = 0;
  std::string solver = "full";
  std::size_t rank = 0;
  std::size_t oversample = 10;
  std::size_t power_iters = 2;
  std::size_t lanczos_iters = 0;
  std::size_t stratify = 0;
  std::size_t ffn_dim = 0;
  std::string thresholds;
  bool no_shift = false;
  bool serial = false;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--dump-dir", f.dump_dir, "Directory of .nrv/.csv activation dumps")->required();
  cmd->add_option("--out", f.out, "Output directory")->required();
  cmd->add_option("--layers", f.layers, "Layer indices to analyze (default: all)")->delimiter(',');
  cmd->add_option("--steps", f.steps, "Training steps to analyze (default: all)")->delimiter(',');
  cmd->add_option("--sample-fraction", f.sample_fraction, "Token sub-sampling fraction in (0, 1]");
  cmd->add_option("--seed", f.seed, "Seed for sampling plans and randomized solvers");
  cmd->add_option("--solver", f.solver, "Eigensolver")->check(CLI::IsMember({"full", "randsvd", "lanczos"}));
  cmd->add_option("--rank", f.rank, "Top-k rank for randsvd/lanczos (default: D)");
  cmd->add_option("--oversample", f.oversample, "randsvd oversampling");
  cmd->add_option("--power-iters", f.power_iters, "randsvd power iterations");
  cmd->add_option("--lanczos-iters", f.lanczos_iters, "Lanczos iteration cap (0 = automatic)");
  cmd->add_option("--stratify", f.stratify, "Also compute metrics per N sequence-position groups");
  cmd->add_option("--ffn-dim", f.ffn_dim, "FFN width for width utilization (default: dump D)");
  cmd->add_option("--thresholds", f.thresholds, "JSON file overriding regime thresholds");
  cmd->add_flag("--no-shift", f.no_shift, "Disable first-row shifting during moment accumulation");
  cmd->add_flag("--serial", f.serial, "Use the serial reference accumulation kernel");
}

nerve::RunManifest to_manifest(const PipelineFlags& f) {
  nerve::RunManifest m;
  m.dump_dir = f.dump_dir;
  m.layers = f.layers;
  m.steps = f.steps;
  m.sample_fraction = f.sample_fraction;
  m.seed = f.seed;
  m.solver.kind = nerve::parse_solver(f.solver);
  m.solver.rank = f.rank;
  m.solver.oversample = f.oversample;
  m.solver.power_iters = f.power_iters;
  m.solver.lanczos_iters = f.lanczos_iters;
  m.stratify = f.stratify;
  m.ffn_dim = f.ffn_dim;
  if (!f.thresholds.empty()) m.thresholds = nerve::load_thresholds(f.thresholds);
  m.accumulator.shift_by_first_row = !f.no_shift;
  m.accumulator.parallel = !f.serial;
  return m;
}

struct SynthFlags {
  std::string out;
  std::size_t dim = 32;
  std::uint32_t batch = 1;
  std::uint32_t seq_len = 0;
  std::size_t tokens = 0;
  std::uint32_t layers = 1;
  std::vector<std::uint64_t> steps{0};
  std::string pre = "one_hot";
  std::string post = "uniform";
  double scale = 1.0;
  std::uint64_t seed = 0;
  bool float64 = false;
};

int run_synth(const SynthFlags& f) {
  nerve::DumpHeader h;
  h.dtype = f.float64 ? nerve::DType::float64 : nerve::DType::float32;
  h.batch = f.batch;
  if (f.seq_len > 0) {
    h.seq_len = f.seq_len;
  } else {
    const std::size_t tokens = f.tokens > 0 ? f.tokens : 50 * f.dim;
    h.seq_len = static_cast<std::uint32_t>((tokens + f.batch - 1) / f.batch);
  }
  fs::create_directories(f.out);
  const auto pre = nerve::parse_spectrum_spec(f.pre, f.dim, f.scale);
  const auto post = nerve::parse_spectrum_spec(f.post, f.dim, f.scale);
  std::size_t written = 0;
  for (const std::uint64_t step : f.steps) {
    for (std::uint32_t layer = 0; layer < f.layers; ++layer) {
      for (const nerve::Tag tag : {nerve::Tag::pre, nerve::Tag::post}) {
        h.layer = layer;
        h.step = step;
        h.tag = tag;
        const std::uint64_t seed =
            nerve::derive_seed(nerve::derive_seed(f.seed, step), 2 * std::uint64_t{layer} + static_cast<std::uint64_t>(tag));
        const auto batch = nerve::sample_gaussian_batch(tag == nerve::Tag::pre ? pre : post, h, seed);
        const std::string name = "layer" + std::to_string(layer) + "_step" + std::to_string(step) + "_" +
                                 std::string(nerve::to_string(tag)) + ".nrv";
        nerve::write_dump(batch, fs::path(f.out) / name);
        ++written;
      }
    }
  }
  std::cout << "wrote " << written << " dumps to " << f.out << '\n';
  return 0;
}

int run_info(const std::vector<std::string>& files) {
  for (const auto& file : files) {
    const auto h = nerve::read_dump_header(file);
    std::cout << file << ": layer=" << h.layer << " step=" << h.step << " tag=" << nerve::to_string(h.tag)
              << " B=" << h.batch << " S=" << h.seq_len << " D=" << h.feature_dim
              << " dtype=" << (h.dtype == nerve::DType::float32 ? "float32" : "float64") << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenspectrum diagnostics for feed-forward activations"};
  app.require_subcommand(1);

  PipelineFlags analyze_flags;
  auto* analyze_cmd = app.add_subcommand("analyze", "Per-(layer, step) metrics and heatmap grids");
  add_pipeline_flags(analyze_cmd, analyze_flags);

  PipelineFlags classify_flags;
  std::size_t trend_window = 0;
  double slope_tol = 1e-3;
  auto* classify_cmd = app.add_subcommand("classify", "Analyze, then label regimes and trend signatures");
  add_pipeline_flags(classify_cmd, classify_flags);
  classify_cmd->add_option("--trend-window", trend_window, "Trailing steps for trend slopes (0 = all)");
  classify_cmd->add_option("--slope-tol", slope_tol, "Slope magnitude below which a trend is flat");

  PipelineFlags compare_flags;
  std::vector<double> fractions;
  std::vector<std::size_t> ranks;
  auto* compare_cmd = app.add_subcommand("compare", "Approximation fidelity against the exact run");
  add_pipeline_flags(compare_cmd, compare_flags);
  compare_cmd->add_option("--fractions", fractions, "Sampling fractions")->delimiter(',');
  compare_cmd->add_option("--ranks", ranks, "Low-rank solver ranks")->delimiter(',');

  std::string metrics_csv;
  std::string loss_csv;
  std::string correlate_out;
  std::optional<std::uint32_t> correlate_layer;
  auto* correlate_cmd = app.add_subcommand("correlate", "Pearson r between metric series and loss");
  correlate_cmd->add_option("--metrics", metrics_csv, "metrics.csv written by analyze")->required();
  correlate_cmd->add_option("--loss", loss_csv, "CSV of step,loss")->required();
  correlate_cmd->add_option("--out", correlate_out, "Output directory")->required();
  correlate_cmd->add_option("--layer", correlate_layer, "Use one layer instead of the layer mean");

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write Gaussian dumps with prescribed spectra");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--dim", synth.dim, "Feature dimension D");
  synth_cmd->add_option("--batch", synth.batch, "Batch size B");
  synth_cmd->add_option("--seq-len", synth.seq_len, "Sequence length S (default: tokens / B)");
  synth_cmd->add_option("--tokens", synth.tokens, "Token count when --seq-len is not given (default 50 D)");
  synth_cmd->add_option("--layers", synth.layers, "Number of layers");
  synth_cmd->add_option("--steps", synth.steps, "Training steps")->delimiter(',');
  synth_cmd->add_option("--pre", synth.pre, "Pre-activation spectrum (uniform[:m], one_hot, geometric:r, linear, explicit:a;b;c)");
  synth_cmd->add_option("--post", synth.post, "Post-activation spectrum");
  synth_cmd->add_option("--scale", synth.scale, "Spectrum scale");
  synth_cmd->add_option("--seed", synth.seed, "Seed");
  synth_cmd->add_flag("--float64", synth.float64, "Store float64 instead of float32");

  std::vector<std::string> info_files;
  auto* info_cmd = app.add_subcommand("info", "Print dump headers");
  info_cmd->add_option("files", info_files, "Dump files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage_error", e.what());
  }

  try {
    if (*analyze_cmd) {
      const auto result = nerve::analyze(to_manifest(analyze_flags));
      nerve::write_analysis(result, analyze_flags.out);
      return 0;
    }
    if (*classify_cmd) {
      const auto manifest = to_manifest(classify_flags);
      const auto result = nerve::analyze(manifest);
      nerve::write_analysis(result, classify_flags.out);
      const fs::path out = classify_flags.out;
      nerve::write_regimes(nerve::classify(result, manifest.thresholds), out / "regimes.csv", out / "regimes.json");
      nerve::write_signatures_csv(nerve::signatures(result, trend_window, slope_tol), out / "signatures.csv");
      return 0;
    }
    if (*compare_cmd) {
      if (fractions.empty() && ranks.empty()) return report_error("usage_error", "compare needs --fractions and/or --ranks");
      const auto result = nerve::compare(to_manifest(compare_flags), fractions, ranks);
      nerve::write_fidelity_csv(result.rows, fs::path(compare_flags.out) / "fidelity.csv");
      return 0;
    }
    if (*correlate_cmd) {
      const auto report = nerve::correlate(metrics_csv, loss_csv, correlate_layer);
      nerve::write_correlations_json(report, fs::path(correlate_out) / "correlations.json");
      return 0;
    }
    if (*synth_cmd) return run_synth(synth);
    if (*info_cmd) return run_info(info_files);
  } catch (const nerve::Error& e) {
    return report_error(nerve::to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error("internal_error", e.what());
  }
  return 0;
}
