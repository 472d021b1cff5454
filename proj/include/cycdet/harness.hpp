#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cycdet/gev.hpp"
#include "cycdet/rng.hpp"
#include "cycdet/scd.hpp"
#include "cycdet/siggen.hpp"

namespace cycdet {

// Everything needed to reproduce a Monte Carlo run. The harness always
// evaluates the single cyclic frequency alpha0 = snap(2 fc); scd.alpha_bins
// only matters for full-matrix exports.
struct ExperimentPlan {
  SignalSpec signal;
  ScdConfig scd;
  double noise_variance = 1.0;
  std::size_t noise_windows = 1000;   // L
  std::size_t signal_windows = 1000;  // M, H1 trials per SNR
  std::vector<double> snr_db_list{-15.0, -10.0, -5.0, 0.0};
  std::vector<double> pf_grid{0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5};
  std::uint64_t master_seed = 20100301;
  std::size_t histogram_bins = 0;  // 0 selects Sturges' rule
  GevFitOptions fit;

  // Desk-scale defaults: L = M = 1000.
  [[nodiscard]] static ExperimentPlan desk();
  // L = 10000 noise windows.
  [[nodiscard]] static ExperimentPlan paper();

  // min_windows applies to both L and M; ROC runs require 100.
  void validate(std::size_t min_windows = 1) const;
  [[nodiscard]] int alpha0_bin() const;
  [[nodiscard]] double alpha0_hz() const;
  [[nodiscard]] std::size_t windows_per_block() const { return signal.duration_samples / scd.window_length; }
};

inline constexpr std::size_t kMinStatisticalWindows = 100;

struct RunOptions {
  unsigned jobs = 0;  // 0: one per hardware thread
};

// Noise-only window i of the given stream (fit set or fresh H0 set).
[[nodiscard]] SampleBuffer noise_window(const ExperimentPlan& plan, Stream stream, std::size_t index);
// Clean AM window for H1 trial t (before noise is added).
[[nodiscard]] SampleBuffer signal_window(const ExperimentPlan& plan, std::size_t trial);

// alpha-profile values at alpha0 over L noise windows.
[[nodiscard]] std::vector<double> collect_noise_profile(const ExperimentPlan& plan, const RunOptions& run = {});
// Same statistic over L fresh noise windows, used for empirical Pf.
[[nodiscard]] std::vector<double> h0_statistics(const ExperimentPlan& plan, const RunOptions& run = {});
// Statistic over M signal-plus-noise trials at one SNR.
[[nodiscard]] std::vector<double> h1_statistics(const ExperimentPlan& plan, double snr_db, const RunOptions& run = {});

// Fraction of statistics strictly above the threshold.
[[nodiscard]] double exceedance_rate(std::span<const double> statistics, double threshold);

// sup |F_empirical - F_model|.
[[nodiscard]] double ks_statistic(std::span<const double> samples, const GevParams& model);

struct HistogramReport {
  std::vector<double> bin_edges;
  std::vector<std::size_t> bin_counts;
  std::vector<double> density;  // counts / (n * width)
  FitReport fit;
  double ks_statistic = 0.0;
};

[[nodiscard]] std::size_t sturges_bins(std::size_t n);

// bins == 0 selects Sturges' rule. Requires at least 100 samples.
[[nodiscard]] HistogramReport fit_and_histogram(std::span<const double> samples, std::size_t bins = 0,
                                                const GevFitOptions& fit = {});

enum class RocKind { kTheoretical, kEmpirical };

struct RocCurve {
  RocKind kind = RocKind::kTheoretical;
  double snr_db = 0.0;
  std::vector<std::pair<double, double>> points;  // (pf, pd), pf ascending
};

// One line of roc_<snr>.csv.
struct RocRow {
  double pf_preset = 0.0;
  double pf_empirical = 0.0;
  double pd_theoretical_curve = 0.0;
  // Empirical curve read off at pf_preset (piecewise-linear in Pf).
  double pd_empirical = 0.0;
  double threshold = 0.0;
  std::size_t trials = 0;
};

struct RocResult {
  double snr_db = 0.0;
  RocCurve theoretical;
  RocCurve empirical;
  std::vector<RocRow> rows;
  std::size_t h0_trials = 0;
  std::size_t h1_trials = 0;
};

// Pd of a curve at an arbitrary Pf: linear between points, flat beyond the ends.
[[nodiscard]] double interpolate_pd(const RocCurve& curve, double pf);
// max over the theoretical curve's points of |Pd_theo - Pd_emp(Pf)|.
[[nodiscard]] double max_pd_gap(const RocCurve& theoretical, const RocCurve& empirical);

// Threshold per preset Pf from the noise model; Pd from H1 trials, empirical
// Pf from fresh H0 windows at the same thresholds.
[[nodiscard]] std::vector<RocResult> run_roc(const ExperimentPlan& plan, const GevParams& noise_model,
                                             const RunOptions& run = {});

struct ExperimentResult {
  std::vector<double> noise_profile;
  HistogramReport histogram;
  std::vector<RocResult> roc;
};

// collect -> fit -> ROC sweep.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentPlan& plan, const RunOptions& run = {});

}  // namespace cycdet
