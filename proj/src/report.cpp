#include "nerve/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "nerve/errors.hpp"
#include "nerve/rng.hpp"

namespace nerve {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string cell_name(std::uint32_t layer, std::uint64_t step) {
  return "layer " + std::to_string(layer) + " step " + std::to_string(step);
}

std::uint64_t plan_seed(std::uint64_t seed, std::uint64_t step) { return derive_seed(seed ^ 0x5a17c0deULL, step); }

std::uint64_t solver_seed(std::uint64_t seed, std::uint32_t layer, std::uint64_t step, Tag tag) {
  return derive_seed(derive_seed(seed, step), 2 * std::uint64_t{layer} + static_cast<std::uint64_t>(tag) + 1);
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) fail(ErrorKind::io, "write to '" + path.string() + "' failed");
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    out.push_back(field);
  }
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::optional<double> parse_optional(const std::string& text) {
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(ErrorKind::format, "bad numeric field '" + text + "'");
  }
  return v;
}

template <typename T>
T parse_index(const std::string& text, const char* what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(ErrorKind::format, std::string("bad ") + what + " '" + text + "'");
  }
  return v;
}

template <typename T>
std::vector<T> select(const std::set<T>& found, const std::vector<T>& wanted, const char* what,
                      std::vector<std::string>& warnings) {
  if (wanted.empty()) return {found.begin(), found.end()};
  std::vector<T> out;
  for (const T& w : wanted) {
    if (found.count(w)) {
      out.push_back(w);
    } else {
      warnings.push_back(std::string("requested ") + what + " " + std::to_string(w) + " has no dumps");
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct LoadedPair {
  ActivationBatch pre;
  ActivationBatch post;
};

LoadedPair load_pair(const DumpPair& pair, std::uint32_t layer, std::uint64_t step) {
  LoadedPair out{read_dump(*pair.pre), read_dump(*pair.post)};
  if (out.pre.dim() != out.post.dim()) {
    fail(ErrorKind::pairing, cell_name(layer, step) + ": pre D=" + std::to_string(out.pre.dim()) + " but post D=" +
                                 std::to_string(out.post.dim()));
  }
  paired_population_check(out.pre, out.post);
  return out;
}

/// Covariance -> spectrum -> metrics for one paired population. Only this
/// frame holds the two covariance summaries.
MetricRecord measure(const ActivationBatch& pre, const ActivationBatch& post, const RunManifest& manifest,
                     const SolverConfig& solver, std::uint32_t layer, std::uint64_t step) {
  Eigenspectrum spec_pre;
  Eigenspectrum spec_post;
  {
    const CovarianceSummary cov_pre = covariance_of(pre, manifest.accumulator, manifest.chunk_rows);
    const CovarianceSummary cov_post = covariance_of(post, manifest.accumulator, manifest.chunk_rows);
    spec_pre = solve_spectrum(cov_pre, solver, solver_seed(manifest.seed, layer, step, Tag::pre));
    spec_post = solve_spectrum(cov_post, solver, solver_seed(manifest.seed, layer, step, Tag::post));
  }
  return compute_record(layer, step, spec_pre, spec_post, solver.kind != SolverKind::full);
}

void fill_grids(AnalysisResult& result, const std::vector<std::uint32_t>& layers,
                const std::vector<std::uint64_t>& steps) {
  result.grids.clear();
  for (auto name : kGridMetrics) {
    HeatmapGrid grid;
    grid.metric_name = std::string(name);
    grid.rows = layers;
    grid.cols = steps;
    grid.values.assign(layers.size() * steps.size(), std::nullopt);
    result.grids.push_back(std::move(grid));
  }
  for (const CellResult& cell : result.cells) {
    if (!cell.record) continue;
    const auto r = static_cast<std::size_t>(std::lower_bound(layers.begin(), layers.end(), cell.layer) - layers.begin());
    const auto c = static_cast<std::size_t>(std::lower_bound(steps.begin(), steps.end(), cell.step) - steps.begin());
    for (std::size_t g = 0; g < kGridMetrics.size(); ++g) {
      result.grids[g].at(r, c) = metric_value(*cell.record, kGridMetrics[g]);
    }
  }
}

void warn(std::vector<std::string>& warnings, std::string message) {
  std::cerr << "warning: " << message << '\n';
  warnings.push_back(std::move(message));
}

struct MetricRow {
  std::string_view tag;
  std::string_view metric;
  double MetricRecord::*field;
};

constexpr MetricRow kLongForm[] = {
    {"pre", "se", &MetricRecord::se_pre},       {"pre", "pr", &MetricRecord::pr_pre},
    {"pre", "eee", &MetricRecord::eee_pre},     {"post", "se", &MetricRecord::se_post},
    {"post", "pr", &MetricRecord::pr_post},     {"post", "eee", &MetricRecord::eee_post},
    {"pair", "js", &MetricRecord::js},          {"pair", "pr_gain", &MetricRecord::pr_gain},
    {"pair", "delta_eee", &MetricRecord::delta_eee},
};

std::string series_key(const std::string& tag, const std::string& metric) {
  if (tag == "pre" || tag == "post") return metric + "_" + tag;
  return metric;
}

}  // namespace

DumpIndex scan_dumps(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorKind::io, "dump directory '" + dir.string() + "' does not exist");

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".nrv" || ext == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  DumpIndex index;
  for (const auto& file : files) {
    DumpHeader h;
    try {
      h = read_dump_header(file);
    } catch (const Error& e) {
      if (file.extension() == ".nrv") warn(index.warnings, std::string("skipping unreadable dump: ") + e.what());
      continue;
    }
    auto& pair = index.cells[{h.layer, h.step}];
    auto& slot = h.tag == Tag::pre ? pair.pre : pair.post;
    if (slot) {
      fail(ErrorKind::format, "duplicate " + std::string(to_string(h.tag)) + " dump for " +
                                  cell_name(h.layer, h.step) + ": '" + slot->string() + "' and '" + file.string() + "'");
    }
    slot = file;
    index.layers.insert(h.layer);
    index.steps.insert(h.step);
    if (index.feature_dim == 0) index.feature_dim = h.feature_dim;
  }
  if (index.cells.empty()) fail(ErrorKind::argument, "no dumps found in '" + dir.string() + "'");
  return index;
}

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::full: return "full";
    case SolverKind::randsvd: return "randsvd";
    case SolverKind::lanczos: return "lanczos";
  }
  return "full";
}

SolverKind parse_solver(std::string_view text) {
  if (text == "full") return SolverKind::full;
  if (text == "randsvd") return SolverKind::randsvd;
  if (text == "lanczos") return SolverKind::lanczos;
  fail(ErrorKind::argument, "unknown solver '" + std::string(text) + "'");
}

Eigenspectrum solve_spectrum(const CovarianceSummary& cov, const SolverConfig& solver, std::uint64_t seed) {
  const std::size_t k = solver.rank == 0 ? cov.dim() : solver.rank;
  switch (solver.kind) {
    case SolverKind::full: return eig_full(cov);
    case SolverKind::randsvd: return eig_randsvd(cov, k, solver.oversample, solver.power_iters, seed);
    case SolverKind::lanczos: return eig_lanczos(cov.cov(), LanczosOptions{k, solver.lanczos_iters, seed});
  }
  return eig_full(cov);
}

AnalysisResult analyze(const RunManifest& manifest) {
  AnalysisResult result;
  const DumpIndex index = scan_dumps(manifest.dump_dir);
  result.warnings = index.warnings;
  const auto layers = select(index.layers, manifest.layers, "layer", result.warnings);
  const auto steps = select(index.steps, manifest.steps, "step", result.warnings);
  result.ffn_dim = manifest.ffn_dim != 0 ? manifest.ffn_dim : index.feature_dim;

  for (const std::uint64_t step : steps) {
    for (const std::uint32_t layer : layers) {
      CellResult cell;
      cell.layer = layer;
      cell.step = step;
      const auto it = index.cells.find({layer, step});
      if (it == index.cells.end() || !it->second.pre || !it->second.post) {
        if (it != index.cells.end()) {
          cell.error = std::string("missing ") + (it->second.pre ? "post" : "pre") + " dump";
          warn(result.warnings, cell_name(layer, step) + ": " + cell.error + "; skipped");
        } else {
          cell.error = "no dumps";
        }
        result.cells.push_back(std::move(cell));
        continue;
      }
      try {
        LoadedPair pair = load_pair(it->second, layer, step);
        if (manifest.sample_fraction) {
          const SamplingPlan plan = make_plan(pair.pre.rows(), *manifest.sample_fraction, plan_seed(manifest.seed, step));
          pair.pre = apply_plan(pair.pre, plan);
          pair.post = apply_plan(pair.post, plan);
          paired_population_check(pair.pre, pair.post);
        }
        cell.record = measure(pair.pre, pair.post, manifest, manifest.solver, layer, step);

        if (manifest.stratify > 0) {
          for (const PositionGroup& group : stratify_by_position(pair.pre, manifest.stratify)) {
            PositionRecord pos;
            pos.group = group.index;
            pos.label = group.label;
            pos.first_pos = group.first_pos;
            pos.last_pos = group.last_pos;
            try {
              const ActivationBatch pre = select_rows(pair.pre, group.rows);
              const ActivationBatch post = select_rows(pair.post, group.rows);
              pos.record = measure(pre, post, manifest, manifest.solver, layer, step);
            } catch (const Error& e) {
              pos.error = e.what();
              warn(result.warnings, cell_name(layer, step) + " group " + group.label + ": " + e.what());
            }
            cell.by_position.push_back(std::move(pos));
          }
        }
      } catch (const Error& e) {
        cell.record.reset();
        cell.error = e.what();
        warn(result.warnings, cell_name(layer, step) + ": " + e.what());
      }
      result.cells.push_back(std::move(cell));
    }
  }

  std::sort(result.cells.begin(), result.cells.end(),
            [](const CellResult& a, const CellResult& b) { return std::tie(a.layer, a.step) < std::tie(b.layer, b.step); });
  fill_grids(result, layers, steps);
  return result;
}

CompareResult compare(const RunManifest& manifest, const std::vector<double>& fractions,
                      const std::vector<std::size_t>& ranks) {
  CompareResult result;
  const DumpIndex index = scan_dumps(manifest.dump_dir);
  result.warnings = index.warnings;
  const auto layers = select(index.layers, manifest.layers, "layer", result.warnings);
  const auto steps = select(index.steps, manifest.steps, "step", result.warnings);

  for (double f : fractions) {
    if (!(f > 0.0) || f > 1.0) fail(ErrorKind::argument, "sampling fraction must be in (0, 1], got " + std::to_string(f));
    result.runs.push_back({"sampling", format_value(f), {}, {}});
  }
  for (std::size_t k : ranks) result.runs.push_back({"randsvd", std::to_string(k), {}, {}});
  for (std::size_t k : ranks) result.runs.push_back({"lanczos", std::to_string(k), {}, {}});
  const std::size_t n_fractions = fractions.size();

  SolverConfig full;
  full.kind = SolverKind::full;

  for (const std::uint64_t step : steps) {
    for (const std::uint32_t layer : layers) {
      const auto it = index.cells.find({layer, step});
      if (it == index.cells.end() || !it->second.pre || !it->second.post) {
        if (it != index.cells.end()) warn(result.warnings, cell_name(layer, step) + ": unpaired dump; skipped");
        continue;
      }
      const CellKey key{layer, step};
      try {
        const LoadedPair pair = load_pair(it->second, layer, step);
        const MetricRecord exact = measure(pair.pre, pair.post, manifest, full, layer, step);
        result.exact.emplace(key, exact);

        for (std::size_t r = 0; r < 2 * ranks.size(); ++r) {
          ConfigRun& run = result.runs[n_fractions + r];
          SolverConfig solver = manifest.solver;
          solver.kind = r < ranks.size() ? SolverKind::randsvd : SolverKind::lanczos;
          solver.rank = ranks[r % ranks.size()];
          try {
            const MetricRecord approx = measure(pair.pre, pair.post, manifest, solver, layer, step);
            run.reports.emplace(key, fidelity_report(exact, approx));
            run.records.emplace(key, approx);
          } catch (const Error& e) {
            warn(result.warnings, cell_name(layer, step) + " " + run.method + "(" + run.param + "): " + e.what());
          }
        }

        for (std::size_t i = 0; i < n_fractions; ++i) {
          ConfigRun& run = result.runs[i];
          try {
            const SamplingPlan plan = make_plan(pair.pre.rows(), fractions[i], plan_seed(manifest.seed, step));
            const ActivationBatch pre = apply_plan(pair.pre, plan);
            const ActivationBatch post = apply_plan(pair.post, plan);
            paired_population_check(pre, post);
            const MetricRecord approx = measure(pre, post, manifest, full, layer, step);
            run.reports.emplace(key, fidelity_report(exact, approx));
            run.records.emplace(key, approx);
          } catch (const Error& e) {
            warn(result.warnings, cell_name(layer, step) + " sampling(" + run.param + "): " + e.what());
          }
        }
      } catch (const Error& e) {
        warn(result.warnings, cell_name(layer, step) + ": " + e.what());
      }
    }
  }

  for (const ConfigRun& run : result.runs) {
    for (std::size_t m = 0; m < kFidelityMetrics.size(); ++m) {
      FidelityRow row{run.method, run.param, std::string(kFidelityMetrics[m]), std::nullopt};
      if (!run.reports.empty()) {
        double total = 0.0;
        for (const auto& [key, report] : run.reports) total += report.percent_error[m];
        row.percent_error = total / static_cast<double>(run.reports.size());
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

std::vector<RegimeRow> classify(const AnalysisResult& analysis, const RegimeThresholds& thresholds) {
  thresholds.validate();
  std::vector<RegimeRow> rows;
  rows.reserve(analysis.cells.size());
  for (const CellResult& cell : analysis.cells) {
    RegimeRow row{cell.layer, cell.step, std::nullopt};
    if (cell.record) row.label = classify_regime(*cell.record, thresholds);
    rows.push_back(row);
  }
  return rows;
}

std::vector<SignatureRow> signatures(const AnalysisResult& analysis, std::size_t window, double slope_tol) {
  std::map<std::uint32_t, std::vector<const MetricRecord*>> by_layer;
  for (const CellResult& cell : analysis.cells) {
    if (cell.record) by_layer[cell.layer].push_back(&*cell.record);
  }
  std::vector<SignatureRow> rows;
  for (const auto& [layer, records] : by_layer) {
    if (records.size() < 2) continue;
    const std::size_t w = window == 0 ? records.size() : std::min(window, records.size());
    if (w < 2) continue;
    auto series = [&](double MetricRecord::*field) {
      std::vector<double> out;
      for (const MetricRecord* rec : records) out.push_back(rec->*field);
      return trend_of(out, w, slope_tol);
    };
    const Trend js = series(&MetricRecord::js);
    SignatureRow pre{layer, Tag::pre,
                     {series(&MetricRecord::se_pre), series(&MetricRecord::pr_pre), series(&MetricRecord::eee_pre), js},
                     {}};
    pre.signature = match_signature(pre.trends);
    SignatureRow post{layer, Tag::post,
                      {series(&MetricRecord::se_post), series(&MetricRecord::pr_post), series(&MetricRecord::eee_post), js},
                      {}};
    post.signature = match_signature(post.trends);
    rows.push_back(pre);
    rows.push_back(post);
  }
  return rows;
}

CorrelationReport correlate(const fs::path& metrics_csv, const fs::path& loss_csv, std::optional<std::uint32_t> layer) {
  std::ifstream metrics_in(metrics_csv);
  if (!metrics_in) fail(ErrorKind::io, "cannot open '" + metrics_csv.string() + "'");
  std::ifstream loss_in(loss_csv);
  if (!loss_in) fail(ErrorKind::io, "cannot open '" + loss_csv.string() + "'");

  // metric -> step -> (sum, count) over layers
  std::map<std::string, std::map<std::uint64_t, std::pair<double, std::size_t>>> sums;
  std::string line;
  bool header = true;
  while (std::getline(metrics_in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (header) {
      header = false;
      if (f.size() < 5 || f[0] != "layer") fail(ErrorKind::format, "metrics CSV must start with a layer,step,tag,metric,value header");
      continue;
    }
    if (f.size() < 5) fail(ErrorKind::format, "metrics CSV row has " + std::to_string(f.size()) + " fields");
    const auto row_layer = parse_index<std::uint32_t>(f[0], "layer");
    if (layer && row_layer != *layer) continue;
    const auto value = parse_optional(f[4]);
    if (!value) continue;
    auto& slot = sums[series_key(f[2], f[3])][parse_index<std::uint64_t>(f[1], "step")];
    slot.first += *value;
    slot.second += 1;
  }

  std::map<std::uint64_t, double> loss;
  while (std::getline(loss_in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() < 2) fail(ErrorKind::format, "loss CSV rows need step,loss");
    if (!f[0].empty() && !std::isdigit(static_cast<unsigned char>(f[0][0]))) continue;  // header
    const auto v = parse_optional(f[1]);
    if (v) loss[parse_index<std::uint64_t>(f[0], "step")] = *v;
  }

  std::set<std::uint64_t> metric_steps;
  for (const auto& [name, by_step] : sums) {
    for (const auto& [step, acc] : by_step) metric_steps.insert(step);
  }
  CorrelationReport report;
  for (const auto& [step, v] : loss) {
    if (metric_steps.count(step)) report.steps.push_back(step);
  }
  if (report.steps.size() < 3) {
    fail(ErrorKind::argument, "correlation needs at least 3 steps shared by metrics and loss, found " +
                                  std::to_string(report.steps.size()));
  }

  for (const auto& [name, by_step] : sums) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const std::uint64_t step : report.steps) {
      const auto it = by_step.find(step);
      if (it == by_step.end()) continue;
      xs.push_back(it->second.first / static_cast<double>(it->second.second));
      ys.push_back(loss.at(step));
    }
    try {
      report.results.emplace(name, pearson(xs, ys, name));
    } catch (const Error& e) {
      report.failures.emplace(name, e.what());
    }
  }
  return report;
}

std::string format_value(std::optional<double> value) {
  if (!value) return {};
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), *value);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string{};
}

RegimeThresholds load_thresholds(const fs::path& json_path) {
  std::ifstream in(json_path);
  if (!in) fail(ErrorKind::io, "cannot open thresholds file '" + json_path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::format, "thresholds file: " + std::string(e.what()));
  }
  if (!doc.is_object()) fail(ErrorKind::format, "thresholds file must hold a JSON object");
  RegimeThresholds th;
  const std::pair<const char*, double*> fields[] = {
      {"js_high", &th.js_high},           {"js_zero", &th.js_zero},
      {"pr_gain_high", &th.pr_gain_high}, {"pr_gain_moderate", &th.pr_gain_moderate},
      {"deee_strong_neg", &th.deee_strong_neg}, {"deee_weak_band", &th.deee_weak_band},
  };
  for (const auto& [key, value] : doc.items()) {
    const auto it = std::find_if(std::begin(fields), std::end(fields), [&](const auto& f) { return key == f.first; });
    if (it == std::end(fields)) fail(ErrorKind::argument, "unknown threshold '" + key + "'");
    if (!value.is_number()) fail(ErrorKind::format, "threshold '" + key + "' must be a number");
    *it->second = value.get<double>();
  }
  th.validate();
  return th;
}

void write_metrics_csv(const AnalysisResult& analysis, const fs::path& path) {
  auto out = open_output(path);
  out << "layer,step,tag,metric,value,spectrum\n";
  for (const CellResult& cell : analysis.cells) {
    const MetricRecord* rec = cell.record ? &*cell.record : nullptr;
    const std::string spectrum = rec ? rec->spectrum : std::string{};
    for (const MetricRow& row : kLongForm) {
      out << cell.layer << ',' << cell.step << ',' << row.tag << ',' << row.metric << ','
          << format_value(rec ? std::optional<double>(rec->*row.field) : std::nullopt) << ',' << spectrum << '\n';
      if (row.tag == "post" && row.metric == "eee") {
        std::optional<double> util;
        if (rec && analysis.ffn_dim > 0 && rec->pr_post <= static_cast<double>(analysis.ffn_dim)) {
          util = width_utilization(rec->pr_post, analysis.ffn_dim);
        }
        out << cell.layer << ',' << cell.step << ",post,width_util," << format_value(util) << ',' << spectrum << '\n';
      }
    }
  }
  close_output(out, path);
}

void write_position_csv(const AnalysisResult& analysis, const fs::path& path) {
  auto out = open_output(path);
  out << "layer,step,group,first_pos,last_pos,tag,metric,value\n";
  for (const CellResult& cell : analysis.cells) {
    for (const PositionRecord& pos : cell.by_position) {
      const MetricRecord* rec = pos.record ? &*pos.record : nullptr;
      for (const MetricRow& row : kLongForm) {
        out << cell.layer << ',' << cell.step << ',' << pos.label << ',' << pos.first_pos << ',' << pos.last_pos << ','
            << row.tag << ',' << row.metric << ','
            << format_value(rec ? std::optional<double>(rec->*row.field) : std::nullopt) << '\n';
      }
    }
  }
  close_output(out, path);
}

void write_grid_csv(const HeatmapGrid& grid, const fs::path& path) {
  auto out = open_output(path);
  out << "layer";
  for (const auto step : grid.cols) out << ',' << step;
  out << '\n';
  for (std::size_t r = 0; r < grid.rows.size(); ++r) {
    out << grid.rows[r];
    for (std::size_t c = 0; c < grid.cols.size(); ++c) out << ',' << format_value(grid.at(r, c));
    out << '\n';
  }
  close_output(out, path);
}

HeatmapGrid read_grid_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "'");
  HeatmapGrid grid;
  const std::string stem = path.stem().string();
  grid.metric_name = stem.rfind("grid_", 0) == 0 ? stem.substr(5) : stem;

  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::format, "empty grid file '" + path.string() + "'");
  const auto head = split(line);
  if (head.empty() || head[0] != "layer") fail(ErrorKind::format, "grid header must start with 'layer'");
  for (std::size_t i = 1; i < head.size(); ++i) grid.cols.push_back(parse_index<std::uint64_t>(head[i], "step"));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != grid.cols.size() + 1) fail(ErrorKind::format, "grid row has the wrong number of fields");
    grid.rows.push_back(parse_index<std::uint32_t>(f[0], "layer"));
    for (std::size_t i = 1; i < f.size(); ++i) grid.values.push_back(parse_optional(f[i]));
  }
  return grid;
}

void write_regimes(const std::vector<RegimeRow>& rows, const fs::path& csv_path, const fs::path& json_path) {
  auto out = open_output(csv_path);
  out << "layer,step,label\n";
  json doc = json::array();
  for (const RegimeRow& row : rows) {
    const std::string label = row.label ? std::string(to_string(*row.label)) : std::string{};
    out << row.layer << ',' << row.step << ',' << label << '\n';
    doc.push_back({{"layer", row.layer}, {"step", row.step}, {"label", row.label ? json(label) : json(nullptr)}});
  }
  close_output(out, csv_path);
  auto jout = open_output(json_path);
  jout << doc.dump(2) << '\n';
  close_output(jout, json_path);
}

void write_signatures_csv(const std::vector<SignatureRow>& rows, const fs::path& path) {
  auto out = open_output(path);
  out << "layer,tag,se_trend,pr_trend,eee_trend,js_trend,signature\n";
  for (const SignatureRow& row : rows) {
    out << row.layer << ',' << to_string(row.tag);
    for (const Trend t : row.trends) out << ',' << to_string(t);
    out << ',' << row.signature << '\n';
  }
  close_output(out, path);
}

void write_fidelity_csv(const std::vector<FidelityRow>& rows, const fs::path& path) {
  auto out = open_output(path);
  out << "method,param,metric,percent_error\n";
  for (const FidelityRow& row : rows) {
    out << row.method << ',' << row.param << ',' << row.metric << ',' << format_value(row.percent_error) << '\n';
  }
  close_output(out, path);
}

void write_correlations_json(const CorrelationReport& report, const fs::path& path) {
  json doc = json::object();
  for (const auto& [name, res] : report.results) doc[name] = {{"r", res.r}, {"n_points", res.n_points}};
  for (const auto& [name, reason] : report.failures) doc[name] = {{"r", nullptr}, {"error", reason}};
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
  close_output(out, path);
}

void write_analysis(const AnalysisResult& analysis, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create output directory '" + out_dir.string() + "': " + ec.message());
  write_metrics_csv(analysis, out_dir / "metrics.csv");
  for (const HeatmapGrid& grid : analysis.grids) write_grid_csv(grid, out_dir / ("grid_" + grid.metric_name + ".csv"));
  const bool stratified = std::any_of(analysis.cells.begin(), analysis.cells.end(),
                                      [](const CellResult& c) { return !c.by_position.empty(); });
  if (stratified) write_position_csv(analysis, out_dir / "metrics_by_position.csv");

  std::ostringstream errors;
  for (const CellResult& cell : analysis.cells) {
    if (!cell.record && !cell.error.empty()) errors << cell_name(cell.layer, cell.step) << ": " << cell.error << '\n';
  }
  const fs::path log = out_dir / "errors.log";
  if (!errors.str().empty()) {
    auto out = open_output(log);
    out << errors.str();
    close_output(out, log);
  } else {
    fs::remove(log, ec);
  }
}

}  // namespace nerve
