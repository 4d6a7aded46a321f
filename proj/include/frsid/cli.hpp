#pragma once

// Command-line front end: generate / identify / baseline / evaluate /
// benchmark.  All orchestration lives here (the binary is a thin main) so
// tests can drive commands in-process and check exit codes.
//
// Exit codes: 0 success, 1 runtime or numerical failure, 2 usage or
// configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "frsid/baseline.hpp"
#include "frsid/benchmark.hpp"
#include "frsid/errors.hpp"
#include "frsid/identify.hpp"
#include "frsid/metrics.hpp"
#include "frsid/model.hpp"
#include "frsid/simulate.hpp"
#include "frsid/timeseries.hpp"

namespace frsid::cli {

namespace detail {

inline std::string fmt_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return std::string(buffer);
}

/// Parses an SNR value that may be "inf" (noise-free).
inline double parse_snr(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "INF")
    return std::numeric_limits<double>::infinity();
  try {
    std::size_t consumed = 0;
    const double value = std::stod(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ConfigError("snr: expected a number in dB or 'inf', got '" + text +
                      "'");
  }
}

/// Loads --config JSON and overlays values onto variables for keys whose
/// command-line flag was not passed.
class ConfigOverlay {
 public:
  ConfigOverlay(CLI::App* cmd, const std::string& path) : cmd_(cmd) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open: " + path);
    try {
      in >> json_;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config: " + path + ": " + e.what());
    }
    if (!json_.is_object()) throw ConfigError("config: top level must be an object");
  }

  template <typename T>
  void apply(const std::string& key, T& var) const {
    if (json_.is_null() || !json_.contains(key)) return;
    if (cmd_->count("--" + key) > 0) return;  // flags override the file
    try {
      var = json_[key].get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config: field '" + key + "' has the wrong type");
    }
  }

  /// SNR accepts both a JSON number and the string "inf"; stored as text.
  void apply_snr(const std::string& key, std::string& var) const {
    if (json_.is_null() || !json_.contains(key)) return;
    if (cmd_->count("--" + key) > 0) return;
    if (json_[key].is_number()) {
      var = fmt_double(json_[key].get<double>());
    } else if (json_[key].is_string()) {
      var = json_[key].get<std::string>();
    } else {
      throw ConfigError("config: field '" + key + "' must be number or 'inf'");
    }
  }

 private:
  CLI::App* cmd_;
  nlohmann::json json_;
};

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << body;
  if (!out) throw ParseError("write failed: " + path);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateOptions {
  Index n = 5, m = 1, p = 1;
  Index n_samples = 10000;
  std::string snr_text = "inf";
  std::uint64_t seed = 0;
  std::string input_kind = "gauss";  ///< gauss | prbs
  std::string format = "csv";       ///< csv | bin
  std::string out_prefix = "data";
  double sample_time = 0.0;
  bool complex_pairs = false;
  double val_fraction = 0.3;
};

inline int cmd_generate(const GenerateOptions& options) {
  if (options.n_samples < 2)
    throw ConfigError("generate: --nt must be at least 2");
  if (options.val_fraction <= 0.0 || options.val_fraction >= 1.0)
    throw ConfigError("generate: --val-fraction must lie in (0, 1)");
  if (options.format != "csv" && options.format != "bin")
    throw ConfigError("generate: --format must be csv or bin");
  InputKind kind;
  if (options.input_kind == "gauss") {
    kind = InputKind::kWhiteGaussian;
  } else if (options.input_kind == "prbs") {
    kind = InputKind::kPrbs;
  } else {
    throw ConfigError("generate: --input must be gauss or prbs");
  }
  const double snr_db = detail::parse_snr(options.snr_text);

  SystemSpec spec;
  spec.n = options.n;
  spec.m = options.m;
  spec.p = options.p;
  spec.seed = options.seed;
  spec.sample_time = options.sample_time;
  spec.complex_pairs = options.complex_pairs;
  StateSpaceModel truth = generate_system(spec);

  const Index n_val = std::max<Index>(
      1, static_cast<Index>(std::llround(options.val_fraction *
                                         static_cast<double>(options.n_samples))));
  const Matrix u_train =
      make_input(options.m, options.n_samples, kind, derive_seed(options.seed, 1));
  const SimulationRun train =
      simulate(truth, u_train, snr_db, derive_seed(options.seed, 2));
  const Matrix u_val =
      make_input(options.m, n_val, kind, derive_seed(options.seed, 3));
  const SimulationRun val =
      simulate(truth, u_val, snr_db, derive_seed(options.seed, 4));

  truth.eta = train.eta;  // realized innovation covariance
  const std::filesystem::path parent =
      std::filesystem::path(options.out_prefix).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  const std::string ext = options.format == "csv" ? ".csv" : ".bin";
  const std::string train_path = options.out_prefix + "_train" + ext;
  const std::string val_path = options.out_prefix + "_val" + ext;
  const std::string truth_path = options.out_prefix + "_truth.json";
  save_timeseries(train.data, train_path);
  save_timeseries(val.data, val_path);
  save_model(truth, truth_path);

  std::cout << "wrote " << train_path << " (" << options.n_samples
            << " samples)\n"
            << "wrote " << val_path << " (" << n_val << " samples)\n"
            << "wrote " << truth_path << " (n=" << truth.n() << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// identify / baseline
// ---------------------------------------------------------------------------

struct IdentifyOptions {
  std::string data_path;
  std::string val_path;
  std::string truth_path;
  std::string method = "fr2sid";  ///< fr2sid | baseline | both
  Index k = 0;
  Index l = 5;
  int q = 0;
  Index d = 1;
  Index order = 0;  ///< 0 = automatic
  double order_tol = 1e-8;
  Index n_iter = 50;
  std::uint64_t seed = 0;
  bool scale = false;
  std::uint64_t cap_bytes = 4ULL << 30;
  std::string bd = "structural";  ///< structural | regression
  std::string out_dir = "out";
  bool predictor = false;  ///< use one-step-ahead predictor MSE
};

namespace detail {

struct MethodSummary {
  std::string method;
  Index runs = 0;
  Index order = 0;
  double act_ms_mean = 0.0;
  std::optional<double> nee;        ///< aggregate over runs
  std::optional<double> net_mse;    ///< mean over runs
  std::optional<double> markov_err; ///< mean over runs
  std::vector<std::string> warnings;
};

inline MetricsReport make_report(
    const std::string& method, Index run, std::uint64_t seed,
    const IdentifyOptions& options, const IdentifyResult& result,
    Index n_columns, Index n_c, const IoCounters& io,
    const std::optional<TimeSeriesData>& validation,
    const std::optional<StateSpaceModel>& truth) {
  MetricsReport report;
  report.method = method;
  report.run = run;
  report.seed = seed;
  report.n = result.diagnostics.order;
  report.k = options.k;
  report.m = result.model.m();
  report.p = result.model.p();
  report.d = options.d;
  report.l = options.l;
  report.q = method == "baseline" ? 0 : options.q;
  report.n_columns = n_columns;
  report.n_c = n_c;
  report.act_ms = result.diagnostics.act_ms;
  report.io_words_read = io.words_read;
  report.io_words_written = io.words_written;
  report.io_blocks_read = io.blocks_read;
  report.warnings = result.diagnostics.warnings;

  if (truth) {
    if (truth->n() == result.model.n()) {
      report.nee = nee(truth->poles(), result.model.poles());
    } else {
      report.warnings.push_back(
          "estimated order " + std::to_string(result.model.n()) +
          " differs from truth order " + std::to_string(truth->n()) +
          "; NEE omitted");
    }
    report.markov_err =
        markov_error(*truth, result.model, 2 * options.k);
  }
  if (validation) {
    try {
      report.mse = options.predictor
                       ? predictor_mse(result.model, *validation).total
                       : validation_mse(result.model, *validation).total;
    } catch (const InstabilityError&) {
      report.mse = std::numeric_limits<double>::infinity();
      report.warnings.push_back("estimated model unstable on validation data");
    }
  }
  return report;
}

}  // namespace detail

inline int cmd_identify(const IdentifyOptions& options) {
  if (options.data_path.empty())
    throw ConfigError("identify: --data is required");
  if (options.k < 2) throw ConfigError("identify: --k must be at least 2");
  if (options.method != "fr2sid" && options.method != "baseline" &&
      options.method != "both")
    throw ConfigError("identify: --method must be fr2sid, baseline, or both");
  if (options.bd != "structural" && options.bd != "regression")
    throw ConfigError("identify: --bd must be structural or regression");
  if (options.n_iter < 1) throw ConfigError("identify: --iters must be >= 1");

  const TimeSeriesData ts = load_timeseries(options.data_path);
  std::optional<TimeSeriesData> validation;
  if (!options.val_path.empty()) validation = load_timeseries(options.val_path);
  std::optional<StateSpaceModel> truth;
  if (!options.truth_path.empty()) truth = load_model(options.truth_path);
  if (truth && (truth->m() != ts.m() || truth->p() != ts.p()))
    throw DimensionError("identify: truth model channels do not match data");

  const Index n_columns = hankel_columns(ts.n_samples(), options.k);
  std::filesystem::create_directories(options.out_dir);

  std::vector<MetricsReport> reports;
  std::vector<detail::MethodSummary> summaries;

  const auto aggregate = [&](const std::string& method,
                             const std::vector<MetricsReport>& rows,
                             const std::vector<ComplexVector>& eigen_runs,
                             Index order) {
    detail::MethodSummary summary;
    summary.method = method;
    summary.runs = static_cast<Index>(rows.size());
    summary.order = order;
    double act = 0.0, mse = 0.0, markov = 0.0;
    Index mse_count = 0, markov_count = 0;
    for (const auto& row : rows) {
      act += row.act_ms;
      if (row.mse) {
        mse += *row.mse;
        ++mse_count;
      }
      if (row.markov_err) {
        markov += *row.markov_err;
        ++markov_count;
      }
      for (const auto& w : row.warnings) summary.warnings.push_back(w);
    }
    summary.act_ms_mean = act / static_cast<double>(rows.size());
    if (mse_count > 0) summary.net_mse = mse / static_cast<double>(mse_count);
    if (markov_count > 0)
      summary.markov_err = markov / static_cast<double>(markov_count);
    if (truth && !eigen_runs.empty())
      summary.nee = aggregate_nee(truth->poles(), eigen_runs);
    summaries.push_back(std::move(summary));
  };

  if (options.method == "fr2sid" || options.method == "both") {
    IdentifyConfig config;
    config.sketch.k = options.k;
    config.sketch.l = options.l;
    config.sketch.q = options.q;
    config.sketch.d = options.d;
    config.sketch.scale_columns = options.scale;
    config.order_rel_tol = options.order_tol;
    config.order_override = options.order;

    std::vector<MetricsReport> rows;
    std::vector<ComplexVector> eigen_runs;
    Index order = 0;
    for (Index run = 0; run < options.n_iter; ++run) {
      config.sketch.seed = options.seed + static_cast<std::uint64_t>(run);
      IoCounters io;
      const IdentifyResult result = run_fr2sid(ts, config, &io);
      if (run == 0) {
        save_model(result.model,
                   (std::filesystem::path(options.out_dir) / "model_fr2sid.json")
                       .string());
        order = result.diagnostics.order;
      }
      if (truth && truth->n() == result.model.n())
        eigen_runs.push_back(result.model.poles());
      rows.push_back(detail::make_report(
          "fr2sid", run, config.sketch.seed, options, result, n_columns,
          config.sketch.sketch_columns(ts.m(), ts.p()), io, validation, truth));
    }
    aggregate("fr2sid", rows, eigen_runs, order);
    for (auto& row : rows) reports.push_back(std::move(row));
  }

  if (options.method == "baseline" || options.method == "both") {
    BaselineConfig config;
    config.k = options.k;
    config.d = options.d;
    config.order_rel_tol = options.order_tol;
    config.order_override = options.order;
    config.bd_method = options.bd == "structural" ? BdMethod::kStructural
                                                  : BdMethod::kFullRegression;
    config.memory_cap_bytes = options.cap_bytes;
    config.scale_columns = options.scale;

    IoCounters io;
    const IdentifyResult result = run_conventional(ts, config, &io);
    save_model(result.model,
               (std::filesystem::path(options.out_dir) / "model_baseline.json")
                   .string());
    std::vector<MetricsReport> rows;
    rows.push_back(detail::make_report("baseline", 0, options.seed, options,
                                       result, n_columns, 0, io, validation,
                                       truth));
    std::vector<ComplexVector> eigen_runs;
    if (truth && truth->n() == result.model.n())
      eigen_runs.push_back(result.model.poles());
    aggregate("baseline", rows, eigen_runs, result.diagnostics.order);
    for (auto& row : rows) reports.push_back(std::move(row));
  }

  // Per-run CSV.
  std::string runs_csv = MetricsReport::csv_header() + "\n";
  for (const auto& row : reports) runs_csv += row.csv_row() + "\n";
  detail::write_text_file(
      (std::filesystem::path(options.out_dir) / "runs.csv").string(), runs_csv);

  // Aggregate CSV + JSON.
  std::string summary_csv =
      "method,runs,order,k,m,p,d,l,q,N,Nc,act_ms_mean,nee,net_mse,markov_err\n";
  nlohmann::json summary_json = nlohmann::json::array();
  for (const auto& s : summaries) {
    const Index n_c = s.method == "baseline"
                          ? 0
                          : 2 * options.k * (ts.m() + ts.p()) + options.l;
    summary_csv += s.method + "," + std::to_string(s.runs) + "," +
                   std::to_string(s.order) + "," + std::to_string(options.k) +
                   "," + std::to_string(ts.m()) + "," + std::to_string(ts.p()) +
                   "," + std::to_string(options.d) + "," +
                   std::to_string(options.l) + "," +
                   std::to_string(s.method == "baseline" ? 0 : options.q) +
                   "," + std::to_string(n_columns) + "," + std::to_string(n_c) +
                   "," + detail::fmt_double(s.act_ms_mean) + ",";
    summary_csv += (s.nee ? detail::fmt_double(*s.nee) : "") + std::string(",");
    summary_csv +=
        (s.net_mse ? detail::fmt_double(*s.net_mse) : "") + std::string(",");
    summary_csv +=
        (s.markov_err ? detail::fmt_double(*s.markov_err) : "") + "\n";

    nlohmann::json j;
    j["method"] = s.method;
    j["runs"] = s.runs;
    j["order"] = s.order;
    j["act_ms_mean"] = s.act_ms_mean;
    if (s.nee) j["nee"] = *s.nee;
    if (s.net_mse) j["net_mse"] = *s.net_mse;
    if (s.markov_err) j["markov_err"] = *s.markov_err;
    j["warnings"] = s.warnings;
    summary_json.push_back(std::move(j));
  }
  detail::write_text_file(
      (std::filesystem::path(options.out_dir) / "summary.csv").string(),
      summary_csv);
  detail::write_text_file(
      (std::filesystem::path(options.out_dir) / "summary.json").string(),
      summary_json.dump(2) + "\n");

  for (const auto& s : summaries) {
    std::cout << s.method << ": runs=" << s.runs << " order=" << s.order
              << " act_ms=" << s.act_ms_mean;
    if (s.nee) std::cout << " nee=" << detail::fmt_double(*s.nee);
    if (s.net_mse) std::cout << " net_mse=" << detail::fmt_double(*s.net_mse);
    if (s.markov_err)
      std::cout << " markov_err=" << detail::fmt_double(*s.markov_err);
    std::cout << "\n";
    for (const auto& w : s.warnings) std::cout << "  warning: " << w << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateOptions {
  std::string model_path;
  std::string data_path;
  std::string truth_path;
  Index horizon = 20;
  bool predictor = false;
  std::string out_path;
};

inline int cmd_evaluate(const EvaluateOptions& options) {
  if (options.model_path.empty() || options.data_path.empty())
    throw ConfigError("evaluate: --model and --data are required");
  const StateSpaceModel model = load_model(options.model_path);
  const TimeSeriesData ts = load_timeseries(options.data_path);
  if (model.m() != ts.m() || model.p() != ts.p())
    throw DimensionError(
        "evaluate: model channels (m=" + std::to_string(model.m()) +
        ", p=" + std::to_string(model.p()) + ") do not match data (m=" +
        std::to_string(ts.m()) + ", p=" + std::to_string(ts.p()) + ")");

  nlohmann::json j;
  j["model"] = options.model_path;
  j["data"] = options.data_path;
  j["n"] = model.n();
  const MseResult mse = options.predictor ? predictor_mse(model, ts)
                                          : validation_mse(model, ts);
  j["mse"] = mse.total;
  nlohmann::json per_channel = nlohmann::json::array();
  for (Index i = 0; i < mse.per_channel.size(); ++i)
    per_channel.push_back(mse.per_channel(i));
  j["mse_per_channel"] = per_channel;

  if (!options.truth_path.empty()) {
    const StateSpaceModel truth = load_model(options.truth_path);
    if (truth.m() != model.m() || truth.p() != model.p())
      throw DimensionError("evaluate: truth channels do not match model");
    if (truth.n() == model.n()) j["nee"] = nee(truth.poles(), model.poles());
    j["markov_err"] = markov_error(truth, model, options.horizon);
  }

  const std::string body = j.dump(2) + "\n";
  std::cout << body;
  if (!options.out_path.empty())
    detail::write_text_file(options.out_path, body);
  return 0;
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

struct BenchmarkCliOptions {
  std::string shapes = "default";  ///< "default" or "k,m,p,d;k,m,p,d;..."
  Index n_columns = 100000;
  int q = 0;
  Index l = 5;
  Index repeats = 10;
  std::uint64_t seed = 0;
  std::uint64_t cap_bytes = 4ULL << 30;
  std::string out_path;
};

namespace detail {

inline std::vector<BenchmarkShape> parse_shapes(const std::string& text) {
  if (text == "default") return default_benchmark_shapes();
  std::vector<BenchmarkShape> shapes;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t semi = text.find(';', start);
    const std::string item = text.substr(
        start, semi == std::string::npos ? std::string::npos : semi - start);
    if (!item.empty()) {
      BenchmarkShape shape;
      long long k = 0, m = 0, p = 0, d = 0;
      if (std::sscanf(item.c_str(), "%lld,%lld,%lld,%lld", &k, &m, &p, &d) != 4)
        throw ConfigError("benchmark: bad shape '" + item +
                          "' (expected k,m,p,d)");
      shape.k = k;
      shape.m = m;
      shape.p = p;
      shape.d = d;
      shapes.push_back(shape);
    }
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  if (shapes.empty()) throw ConfigError("benchmark: no shapes given");
  return shapes;
}

}  // namespace detail

inline int cmd_benchmark(const BenchmarkCliOptions& options) {
  const auto shapes = detail::parse_shapes(options.shapes);
  BenchmarkOptions bench;
  bench.n_columns = options.n_columns;
  bench.q = options.q;
  bench.l = options.l;
  bench.repeats = options.repeats;
  bench.seed = options.seed;
  bench.memory_cap_bytes = options.cap_bytes;

  std::string csv =
      "k,m,p,d,N,Nc,q,repeats,full_ms,sketch_ms,rqr_ms,speedup,"
      "io_words_read,io_words_written,io_blocks_read,dm_formula_words\n";
  for (const auto& shape : shapes) {
    const BenchmarkResult r = run_benchmark(shape, bench);
    const std::string full_text =
        r.full_refused ? "inf" : detail::fmt_double(r.full_ms);
    const std::string speedup_text =
        r.full_refused ? "inf" : detail::fmt_double(r.speedup);
    csv += std::to_string(r.shape.k) + "," + std::to_string(r.shape.m) + "," +
           std::to_string(r.shape.p) + "," + std::to_string(r.shape.d) + "," +
           std::to_string(r.n_columns) + "," + std::to_string(r.n_c) + "," +
           std::to_string(r.q) + "," + std::to_string(r.repeats) + "," +
           full_text + "," + detail::fmt_double(r.sketch_ms) + "," +
           detail::fmt_double(r.rqr_ms) + "," + speedup_text + "," +
           std::to_string(r.io.words_read) + "," +
           std::to_string(r.io.words_written) + "," +
           std::to_string(r.io.blocks_read) + "," +
           std::to_string(r.dm_formula_words) + "\n";
    std::cout << "shape {" << r.shape.k << "," << r.shape.m << ","
              << r.shape.p << "," << r.shape.d << "}: full=" << full_text
              << "ms compressed=" << detail::fmt_double(r.compressed_ms())
              << "ms speedup=" << speedup_text << "\n";
  }
  if (!options.out_path.empty())
    detail::write_text_file(options.out_path, csv);
  else
    std::cout << csv;
  return 0;
}

// ---------------------------------------------------------------------------
// argument wiring
// ---------------------------------------------------------------------------

/// Builds the CLI and runs one invocation.  @p args excludes argv[0].
inline int run(const std::vector<std::string>& args) {
  CLI::App app{"Randomized subspace identification of linear state-space "
               "models from input/output records"};
  app.require_subcommand(1);

  GenerateOptions gen;
  std::string gen_config;
  CLI::App* generate = app.add_subcommand(
      "generate", "Simulate a random system and write train/validation data");
  generate->add_option("--n", gen.n, "Model order");
  generate->add_option("--m", gen.m, "Input channels");
  generate->add_option("--p", gen.p, "Output channels");
  generate->add_option("--nt", gen.n_samples, "Training samples N_t");
  generate->add_option("--snr", gen.snr_text, "SNR in dB, or 'inf'");
  generate->add_option("--seed", gen.seed, "Seed");
  generate->add_option("--input", gen.input_kind, "Input kind: gauss | prbs");
  generate->add_option("--format", gen.format, "Output format: csv | bin");
  generate->add_option("--out", gen.out_prefix, "Output path prefix");
  generate->add_option("--ts", gen.sample_time, "Sample time (0 = auto)");
  generate->add_flag("--complex-pairs", gen.complex_pairs,
                     "Allow complex-conjugate pole pairs");
  generate->add_option("--val-fraction", gen.val_fraction,
                       "Validation size as a fraction of N_t");
  generate->add_option("--config", gen_config, "JSON config file");

  IdentifyOptions idn;
  std::string idn_config;
  CLI::App* identify = app.add_subcommand(
      "identify", "Estimate a state-space model from a data record");
  identify->add_option("--data", idn.data_path, "Training data file");
  identify->add_option("--val", idn.val_path, "Validation data file");
  identify->add_option("--truth", idn.truth_path, "Ground-truth model JSON");
  identify->add_option("--method", idn.method,
                       "Method: fr2sid | baseline | both");
  identify->add_option("--k", idn.k, "Block-Hankel horizon");
  identify->add_option("--l", idn.l, "Sketch oversampling");
  identify->add_option("--q", idn.q, "Gram-power exponent (0 or 1)");
  identify->add_option("--d", idn.d, "Streaming block count");
  identify->add_option("--order", idn.order, "Model order override (0 = auto)");
  identify->add_option("--order-tol", idn.order_tol,
                       "Relative singular-value cutoff for the order");
  identify->add_option("--iters", idn.n_iter,
                       "Monte-Carlo repetitions (sketch re-drawn each run)");
  identify->add_option("--seed", idn.seed, "Base seed (run j uses seed + j)");
  identify->add_flag("--scale", idn.scale, "Scale Hankel columns by 1/sqrt(N)");
  identify->add_option("--cap", idn.cap_bytes,
                       "Baseline memory cap in bytes");
  identify->add_option("--bd", idn.bd,
                       "Baseline B/D method: structural | regression");
  identify->add_option("--out", idn.out_dir, "Output directory");
  identify->add_flag("--predictor", idn.predictor,
                     "Report one-step-ahead predictor MSE");
  identify->add_option("--config", idn_config, "JSON config file");

  IdentifyOptions base = idn;
  std::string base_config;
  CLI::App* baseline = app.add_subcommand(
      "baseline", "Conventional (uncompressed) identification");
  baseline->add_option("--data", base.data_path, "Training data file");
  baseline->add_option("--val", base.val_path, "Validation data file");
  baseline->add_option("--truth", base.truth_path, "Ground-truth model JSON");
  baseline->add_option("--k", base.k, "Block-Hankel horizon");
  baseline->add_option("--d", base.d, "Streaming block count");
  baseline->add_option("--order", base.order, "Model order override");
  baseline->add_option("--order-tol", base.order_tol,
                       "Relative singular-value cutoff for the order");
  baseline->add_option("--seed", base.seed, "Seed (metadata only)");
  baseline->add_flag("--scale", base.scale, "Scale Hankel columns by 1/sqrt(N)");
  baseline->add_option("--cap", base.cap_bytes, "Memory cap in bytes");
  baseline->add_option("--bd", base.bd, "B/D method: structural | regression");
  baseline->add_option("--out", base.out_dir, "Output directory");
  baseline->add_flag("--predictor", base.predictor,
                     "Report one-step-ahead predictor MSE");
  baseline->add_option("--config", base_config, "JSON config file");

  EvaluateOptions eval;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Score a model file against a data record");
  evaluate->add_option("--model", eval.model_path, "Model JSON file");
  evaluate->add_option("--data", eval.data_path, "Data file");
  evaluate->add_option("--truth", eval.truth_path, "Ground-truth model JSON");
  evaluate->add_option("--horizon", eval.horizon, "Markov-parameter horizon");
  evaluate->add_flag("--predictor", eval.predictor,
                     "Use one-step-ahead predictor MSE");
  evaluate->add_option("--out", eval.out_path, "Also write the JSON here");

  BenchmarkCliOptions bench;
  CLI::App* benchmark = app.add_subcommand(
      "benchmark", "Time full vs compressed factorization");
  benchmark->add_option("--shapes", bench.shapes,
                        "'default' or 'k,m,p,d;k,m,p,d;...'");
  benchmark->add_option("--n", bench.n_columns, "Data-matrix columns N");
  benchmark->add_option("--q", bench.q, "Gram-power exponent");
  benchmark->add_option("--l", bench.l, "Sketch oversampling");
  benchmark->add_option("--repeats", bench.repeats, "Repeats per shape");
  benchmark->add_option("--seed", bench.seed, "Seed");
  benchmark->add_option("--cap", bench.cap_bytes,
                        "Memory cap for the full-matrix side, bytes");
  benchmark->add_option("--out", bench.out_path, "Write the CSV here");

  try {
    // CLI11's vector overload consumes tokens from the back.
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (generate->parsed()) {
      const detail::ConfigOverlay overlay(generate, gen_config);
      overlay.apply("n", gen.n);
      overlay.apply("m", gen.m);
      overlay.apply("p", gen.p);
      overlay.apply("nt", gen.n_samples);
      overlay.apply_snr("snr", gen.snr_text);
      overlay.apply("seed", gen.seed);
      overlay.apply("input", gen.input_kind);
      overlay.apply("format", gen.format);
      overlay.apply("out", gen.out_prefix);
      overlay.apply("ts", gen.sample_time);
      overlay.apply("complex-pairs", gen.complex_pairs);
      overlay.apply("val-fraction", gen.val_fraction);
      return cmd_generate(gen);
    }
    if (identify->parsed() || baseline->parsed()) {
      IdentifyOptions& options = identify->parsed() ? idn : base;
      CLI::App* cmd = identify->parsed() ? identify : baseline;
      const std::string& config_path =
          identify->parsed() ? idn_config : base_config;
      const detail::ConfigOverlay overlay(cmd, config_path);
      overlay.apply("data", options.data_path);
      overlay.apply("val", options.val_path);
      overlay.apply("truth", options.truth_path);
      if (identify->parsed()) overlay.apply("method", options.method);
      overlay.apply("k", options.k);
      overlay.apply("l", options.l);
      overlay.apply("q", options.q);
      overlay.apply("d", options.d);
      overlay.apply("order", options.order);
      overlay.apply("order-tol", options.order_tol);
      overlay.apply("iters", options.n_iter);
      overlay.apply("seed", options.seed);
      overlay.apply("scale", options.scale);
      overlay.apply("cap", options.cap_bytes);
      overlay.apply("bd", options.bd);
      overlay.apply("out", options.out_dir);
      overlay.apply("predictor", options.predictor);
      if (baseline->parsed()) options.method = "baseline";
      return cmd_identify(options);
    }
    if (evaluate->parsed()) return cmd_evaluate(eval);
    if (benchmark->parsed()) return cmd_benchmark(bench);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;  // no subcommand matched (require_subcommand should prevent this)
}

}  // namespace frsid::cli
