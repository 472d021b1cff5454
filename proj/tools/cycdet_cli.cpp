// Batch front end: gen, scd, collect, fit, threshold, roc.
//
// Exit codes: 0 ok, 2 configuration error, 3 numeric / convergence error,
// 4 I/O error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cycdet/error.hpp"
#include "cycdet/harness.hpp"
#include "cycdet/io.hpp"

namespace fs = std::filesystem;
using namespace cycdet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct Common {
  std::string plan_path;
  std::string preset = "desk";
  std::string output_dir = ".";
  std::vector<std::string> overrides;
  unsigned jobs = 0;
};

ExperimentPlan load_plan(const Common& c) {
  io::Json doc;
  if (!c.plan_path.empty()) {
    doc = io::read_json(c.plan_path);
  } else if (c.preset == "paper") {
    doc = io::to_json(ExperimentPlan::paper());
  } else if (c.preset == "desk") {
    doc = io::to_json(ExperimentPlan::desk());
  } else {
    throw ConfigError("unknown preset '" + c.preset + "'");
  }
  for (const auto& o : c.overrides) io::apply_override(doc, o);
  return io::plan_from_json(doc);
}

fs::path prepare_output(const Common& c, const ExperimentPlan& plan) {
  const fs::path dir = c.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  io::write_json(dir / "plan.json", io::to_json(plan));
  return dir;
}

void add_common(CLI::App* cmd, Common& c, bool with_output = true) {
  cmd->add_option("--plan", c.plan_path, "JSON experiment plan");
  cmd->add_option("--preset", c.preset, "Built-in plan when --plan is absent: desk or paper");
  cmd->add_option("--set", c.overrides, "Plan override key=value (dotted keys, repeatable)");
  if (with_output) cmd->add_option("-o,--out", c.output_dir, "Output directory");
  cmd->add_option("--jobs", c.jobs, "Worker threads (0 = all cores)");
}

std::vector<io::ProfileRow> profile_rows(const ExperimentPlan& plan, const std::vector<double>& values) {
  std::vector<io::ProfileRow> rows;
  rows.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) rows.push_back({plan.alpha0_hz(), values[i], i});
  return rows;
}

void write_fit(const fs::path& dir, const HistogramReport& report) {
  io::write_json(dir / "fit.json", io::to_json(report.fit));
  io::write_text(dir / "histogram.csv", io::histogram_csv(report));
}

int run(int argc, char** argv) {
  CLI::App app{"Cyclic-frequency-domain noise modelling and feature detection"};
  app.require_subcommand(1);
  Common common;

  auto* gen = app.add_subcommand("gen", "Write a signal file (AM, noise, or AM in noise)");
  add_common(gen, common);
  std::string kind = "am";
  std::optional<std::uint64_t> seed;
  double snr_db = -10.0;
  gen->add_option("--kind", kind, "am, noise or mix")->check(CLI::IsMember({"am", "noise", "mix"}));
  gen->add_option("--seed", seed, "Generator seed (default: plan master_seed)");
  gen->add_option("--snr", snr_db, "SNR in dB for --kind mix");

  auto* scd = app.add_subcommand("scd", "Write the SCD matrix of one window");
  add_common(scd, common);
  std::string input;
  std::size_t window_index = 0;
  scd->add_option("--input", input, "Signal file base path from `gen` (default: a noise window of the plan)");
  scd->add_option("--window", window_index, "Window index");

  auto* collect = app.add_subcommand("collect", "Write alpha-profile noise samples at alpha0 = 2 fc");
  add_common(collect, common);

  auto* fit = app.add_subcommand("fit", "Fit the GEV noise model; write fit.json and histogram.csv");
  add_common(fit, common);
  std::string samples_path;
  fit->add_option("--samples", samples_path, "Sample CSV (max_magnitude column or a single column)")->required();

  auto* threshold = app.add_subcommand("threshold", "Print the detection threshold for a preset Pf");
  double pf = 0.0;
  std::string fit_path;
  threshold->add_option("--pf", pf, "False-alarm probability in (0, 1)")->required();
  threshold->add_option("--fit", fit_path, "fit.json")->required();

  auto* roc = app.add_subcommand("roc", "Full experiment: collect, fit, ROC sweep");
  add_common(roc, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const RunOptions run_opts{common.jobs};

  if (*threshold) {
    const auto report = io::fit_report_from_json(io::read_json(fit_path));
    std::printf("%s\n", io::csv_number(threshold_for_pf(pf, report.params)).c_str());
    return kExitOk;
  }

  const auto plan = load_plan(common);

  if (*gen) {
    const auto dir = prepare_output(common, plan);
    const std::uint64_t s = seed.value_or(plan.master_seed);
    const auto noise = [&] {
      return generate_awgn(plan.signal.duration_samples, {plan.noise_variance, derive_seed(s, Stream::kSignalNoise, 0)},
                           plan.signal.sample_rate_hz);
    };
    io::Json meta{{"kind", kind}, {"seed", s}, {"spec", io::to_json(plan.signal)}};
    if (kind == "am") {
      io::write_signal(dir / "signal", generate_am(plan.signal, s), meta);
    } else if (kind == "noise") {
      meta["noise_variance"] = plan.noise_variance;
      io::write_signal(dir / "signal", noise(), meta);
    } else {
      meta["noise_variance"] = plan.noise_variance;
      meta["snr_db"] = snr_db;
      meta["snr_convention"] = "full sampling bandwidth";
      io::write_signal(dir / "signal", mix_at_snr(generate_am(plan.signal, s), noise(), snr_db), meta);
    }
    return kExitOk;
  }

  if (*scd) {
    const auto dir = prepare_output(common, plan);
    ScdConfig cfg = plan.scd;
    cfg.alpha_bins.push_back(plan.alpha0_bin());
    std::sort(cfg.alpha_bins.begin(), cfg.alpha_bins.end());
    cfg.alpha_bins.erase(std::unique(cfg.alpha_bins.begin(), cfg.alpha_bins.end()), cfg.alpha_bins.end());
    SampleBuffer window = [&] {
      if (input.empty()) return noise_window(plan, Stream::kNoiseFit, window_index);
      const auto windows = segment_windows(io::read_signal(input), cfg.window_length);
      if (window_index >= windows.size())
        throw ConfigError("window " + std::to_string(window_index) + " out of range (" +
                          std::to_string(windows.size()) + " windows)");
      return windows[window_index];
    }();
    const auto matrix = estimate_scd(window, cfg);
    io::write_scd(dir / "scd", matrix, cfg);
    const auto profile = alpha_profile(matrix, window_index);
    std::vector<io::ProfileRow> rows;
    for (std::size_t c = 0; c < profile.maxima.size(); ++c)
      rows.push_back({profile.alphas_hz[c], profile.maxima[c], window_index});
    io::write_text(dir / "scd_profile.csv", io::profile_csv(rows));
    return kExitOk;
  }

  if (*collect) {
    const auto dir = prepare_output(common, plan);
    const auto values = collect_noise_profile(plan, run_opts);
    io::write_text(dir / "profile.csv", io::profile_csv(profile_rows(plan, values)));
    return kExitOk;
  }

  if (*fit) {
    const auto dir = prepare_output(common, plan);
    const auto samples = io::read_samples_csv(samples_path);
    const auto report = fit_and_histogram(samples, plan.histogram_bins, plan.fit);
    write_fit(dir, report);
    if (!report.fit.converged) throw NumericError("fit did not converge: " + report.fit.note);
    return kExitOk;
  }

  if (*roc) {
    plan.validate(kMinStatisticalWindows);
    const auto dir = prepare_output(common, plan);
    const auto result = run_experiment(plan, run_opts);
    io::write_text(dir / "profile.csv", io::profile_csv(profile_rows(plan, result.noise_profile)));
    write_fit(dir, result.histogram);
    for (const auto& r : result.roc) io::write_text(dir / io::roc_filename(r.snr_db), io::roc_csv(r));
    return kExitOk;
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "cycdet: error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::kConfig:
        return kExitConfig;
      case ErrorKind::kNumeric:
        return kExitNumeric;
      case ErrorKind::kIo:
        return kExitIo;
    }
  } catch (const std::exception& e) {
    std::cerr << "cycdet: error: " << e.what() << "\n";
  }
  return kExitConfig;
}
