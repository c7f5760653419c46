#pragma once

// Pipeline orchestration over a directory of activation dumps, and the CSV /
// JSON report formats.
//
// Output layout under the output directory:
//   metrics.csv              layer,step,tag,metric,value,spectrum  (long form)
//   grid_<metric>.csv        layer x step matrix for se/pr/eee pre+post and js
//   metrics_by_position.csv  layer,step,group,first_pos,last_pos,tag,metric,value  (--stratify)
//   regimes.csv / .json      layer,step,label
//   signatures.csv           per-layer trend signature
//   fidelity.csv             method,param,metric,percent_error
//   correlations.json        {metric: {r, n_points}}
//   errors.log               one line per failed cell, only when something failed
//
// Missing values are written as empty fields.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nerve/approx.hpp"
#include "nerve/covariance.hpp"
#include "nerve/diagnostics.hpp"
#include "nerve/eigensolve.hpp"
#include "nerve/ingest.hpp"
#include "nerve/metrics.hpp"

namespace nerve {

using CellKey = std::pair<std::uint32_t, std::uint64_t>;  // (layer, step)

struct DumpPair {
  std::optional<std::filesystem::path> pre;
  std::optional<std::filesystem::path> post;
};

/// Headers of every `.nrv` / `.csv` dump in a directory, keyed by cell.
struct DumpIndex {
  std::map<CellKey, DumpPair> cells;
  std::set<std::uint32_t> layers;
  std::set<std::uint64_t> steps;
  std::size_t feature_dim = 0;
  std::vector<std::string> warnings;  // files that looked like dumps but could not be read
};

/// Throws argument error "no dumps found" when the directory holds none,
/// and format error on duplicate (layer, step, tag) dumps.
DumpIndex scan_dumps(const std::filesystem::path& dir);

enum class SolverKind { full, randsvd, lanczos };

std::string_view to_string(SolverKind kind);
SolverKind parse_solver(std::string_view text);

struct SolverConfig {
  SolverKind kind = SolverKind::full;
  std::size_t rank = 0;  // 0 = D
  std::size_t oversample = 10;
  std::size_t power_iters = 2;
  std::size_t lanczos_iters = 0;  // 0 = solver default
};

Eigenspectrum solve_spectrum(const CovarianceSummary& cov, const SolverConfig& solver, std::uint64_t seed);

struct RunManifest {
  std::filesystem::path dump_dir;
  std::vector<std::uint32_t> layers;  // empty = every layer found
  std::vector<std::uint64_t> steps;   // empty = every step found
  std::size_t ffn_dim = 0;            // 0 = feature_dim of the dumps
  std::optional<double> sample_fraction;
  std::uint64_t seed = 0;
  SolverConfig solver;
  std::size_t stratify = 0;  // 0 = off
  RegimeThresholds thresholds;
  AccumulatorOptions accumulator{.shift_by_first_row = true, .parallel = true};
  std::size_t chunk_rows = 4096;
};

struct PositionRecord {
  std::size_t group = 0;
  std::string label;
  std::uint32_t first_pos = 0;
  std::uint32_t last_pos = 0;
  std::optional<MetricRecord> record;
  std::string error;
};

struct CellResult {
  std::uint32_t layer = 0;
  std::uint64_t step = 0;
  std::optional<MetricRecord> record;
  std::string error;  // set when record is empty
  std::vector<PositionRecord> by_position;
};

/// Layer x step matrix of one metric; values row-major, missing cells empty.
struct HeatmapGrid {
  std::string metric_name;
  std::vector<std::uint32_t> rows;
  std::vector<std::uint64_t> cols;
  std::vector<std::optional<double>> values;

  std::optional<double>& at(std::size_t r, std::size_t c) { return values[r * cols.size() + c]; }
  const std::optional<double>& at(std::size_t r, std::size_t c) const { return values[r * cols.size() + c]; }
  bool operator==(const HeatmapGrid&) const = default;
};

inline constexpr std::array<std::string_view, 7> kGridMetrics{"se_pre",  "se_post", "pr_pre", "pr_post",
                                                              "eee_pre", "eee_post", "js"};

struct AnalysisResult {
  std::vector<CellResult> cells;  // sorted by layer, then step
  std::vector<HeatmapGrid> grids; // one per kGridMetrics entry
  std::vector<std::string> warnings;
  std::size_t ffn_dim = 0;
};

/// Runs ingestion -> covariance -> eigensolve -> metrics for every selected
/// (layer, step). Cells are processed one at a time, step-major then
/// layer-major, and only one pre/post pair of covariance matrices is alive
/// at any moment. Unpaired dumps are skipped with a warning; per-cell
/// failures become missing cells with an error message.
AnalysisResult analyze(const RunManifest& manifest);

/// One metric record per cell for a given approximation configuration.
struct ConfigRun {
  std::string method;  // "sampling", "randsvd", "lanczos"
  std::string param;   // fraction or rank, as written to fidelity.csv
  std::map<CellKey, MetricRecord> records;
  std::map<CellKey, FidelityReport> reports;
};

struct FidelityRow {
  std::string method;
  std::string param;
  std::string metric;
  std::optional<double> percent_error;  // mean over cells; empty when no cell succeeded
};

struct CompareResult {
  std::map<CellKey, MetricRecord> exact;
  std::vector<ConfigRun> runs;
  std::vector<FidelityRow> rows;
  std::vector<std::string> warnings;
};

/// Recomputes metrics under each sampling fraction and each low-rank
/// solver rank and reports percent errors against the exact full-batch run.
/// Sampling plans are drawn once per step (seeded from the manifest seed
/// and the step) and shared by every layer and by pre and post.
CompareResult compare(const RunManifest& manifest, const std::vector<double>& fractions,
                      const std::vector<std::size_t>& ranks);

struct RegimeRow {
  std::uint32_t layer = 0;
  std::uint64_t step = 0;
  std::optional<RegimeLabel> label;  // empty for missing cells
};

std::vector<RegimeRow> classify(const AnalysisResult& analysis, const RegimeThresholds& thresholds);

struct SignatureRow {
  std::uint32_t layer = 0;
  Tag tag = Tag::pre;
  TrendTuple trends{};
  std::string_view signature;
};

/// Per-layer trends of SE, PR, EEE (for each tag) and JS over the trailing
/// `window` steps (0 = all steps); layers with fewer than two complete
/// steps are omitted.
std::vector<SignatureRow> signatures(const AnalysisResult& analysis, std::size_t window = 0, double slope_tol = 1e-3);

struct CorrelationReport {
  std::map<std::string, CorrelationResult> results;
  std::map<std::string, std::string> failures;  // metric -> reason (e.g. constant series)
  std::vector<std::uint64_t> steps;             // common steps used
};

/// Layer-averaged (or single-layer) metric series from metrics.csv against
/// a `step,loss` CSV. Needs at least three common steps.
CorrelationReport correlate(const std::filesystem::path& metrics_csv, const std::filesystem::path& loss_csv,
                            std::optional<std::uint32_t> layer = std::nullopt);

// --- formats ---------------------------------------------------------------

/// Shortest decimal that round-trips; empty for missing.
std::string format_value(std::optional<double> value);

RegimeThresholds load_thresholds(const std::filesystem::path& json_path);

void write_metrics_csv(const AnalysisResult& analysis, const std::filesystem::path& path);
void write_position_csv(const AnalysisResult& analysis, const std::filesystem::path& path);
void write_grid_csv(const HeatmapGrid& grid, const std::filesystem::path& path);
HeatmapGrid read_grid_csv(const std::filesystem::path& path);
void write_regimes(const std::vector<RegimeRow>& rows, const std::filesystem::path& csv_path,
                   const std::filesystem::path& json_path);
void write_signatures_csv(const std::vector<SignatureRow>& rows, const std::filesystem::path& path);
void write_fidelity_csv(const std::vector<FidelityRow>& rows, const std::filesystem::path& path);
void write_correlations_json(const CorrelationReport& report, const std::filesystem::path& path);

/// metrics.csv, every grid, metrics_by_position.csv (when stratified) and
/// errors.log (when any cell failed).
void write_analysis(const AnalysisResult& analysis, const std::filesystem::path& out_dir);

}  // namespace nerve
