#include "cycdet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cycdet/detector.hpp"
#include "cycdet/error.hpp"
#include "cycdet/parallel.hpp"
#include "cycdet/rng.hpp"

namespace cycdet {

ExperimentPlan ExperimentPlan::desk() { return ExperimentPlan{}; }

ExperimentPlan ExperimentPlan::paper() {
  ExperimentPlan plan;
  plan.noise_windows = 10000;
  return plan;
}

void ExperimentPlan::validate(std::size_t min_windows) const {
  scd.validate();
  signal.validate(scd.window_length);
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance))
    throw ConfigError("plan: noise variance must be positive");
  if (noise_windows < std::max<std::size_t>(1, min_windows) || signal_windows < std::max<std::size_t>(1, min_windows))
    throw ConfigError("plan: noise_windows and signal_windows must be at least " + std::to_string(min_windows));
  for (double snr : snr_db_list)
    if (!std::isfinite(snr)) throw ConfigError("plan: snr values must be finite");
  for (std::size_t i = 0; i < pf_grid.size(); ++i) {
    if (!(pf_grid[i] > 0.0 && pf_grid[i] < 1.0)) throw ConfigError("plan: pf grid values must lie in (0, 1)");
    if (i > 0 && !(pf_grid[i] > pf_grid[i - 1])) throw ConfigError("plan: pf grid must be strictly increasing");
  }
  (void)alpha0_bin();
}

int ExperimentPlan::alpha0_bin() const {
  const int bin = snap_alpha_bin(2.0 * signal.carrier_freq_hz, scd.window_length, signal.sample_rate_hz);
  if (static_cast<std::size_t>(std::abs(bin)) >= scd.window_length)
    throw ConfigError("plan: alpha0 = 2 fc falls outside the cyclic frequency range");
  return bin;
}

double ExperimentPlan::alpha0_hz() const {
  return static_cast<double>(alpha0_bin()) * signal.sample_rate_hz / static_cast<double>(scd.window_length);
}

SampleBuffer noise_window(const ExperimentPlan& plan, Stream stream, std::size_t index) {
  const NoiseSpec noise{plan.noise_variance, derive_seed(plan.master_seed, stream, index)};
  return generate_awgn(plan.scd.window_length, noise, plan.signal.sample_rate_hz);
}

namespace {

std::vector<SampleBuffer> signal_block(const ExperimentPlan& plan, std::size_t block) {
  const auto am = generate_am(plan.signal, derive_seed(plan.master_seed, Stream::kMessage, block));
  return segment_windows(am, plan.scd.window_length);
}

std::vector<double> noise_statistics(const ExperimentPlan& plan, Stream stream, const RunOptions& run) {
  plan.validate();
  const int alpha0 = plan.alpha0_bin();
  std::vector<double> out(plan.noise_windows);
  parallel_for(out.size(), run.jobs,
               [&](std::size_t i) { out[i] = profile_at(noise_window(plan, stream, i), plan.scd, alpha0); });
  return out;
}

}  // namespace

SampleBuffer signal_window(const ExperimentPlan& plan, std::size_t trial) {
  const auto per_block = plan.windows_per_block();
  return signal_block(plan, trial / per_block).at(trial % per_block);
}

std::vector<double> collect_noise_profile(const ExperimentPlan& plan, const RunOptions& run) {
  return noise_statistics(plan, Stream::kNoiseFit, run);
}

std::vector<double> h0_statistics(const ExperimentPlan& plan, const RunOptions& run) {
  return noise_statistics(plan, Stream::kNoiseH0, run);
}

std::vector<double> h1_statistics(const ExperimentPlan& plan, double snr_db, const RunOptions& run) {
  plan.validate();
  const int alpha0 = plan.alpha0_bin();
  const auto per_block = plan.windows_per_block();
  const auto trials = plan.signal_windows;
  const auto blocks = (trials + per_block - 1) / per_block;
  std::vector<double> out(trials);
  parallel_for(blocks, run.jobs, [&](std::size_t b) {
    const auto windows = signal_block(plan, b);
    for (std::size_t w = 0; w < per_block; ++w) {
      const auto t = b * per_block + w;
      if (t >= trials) break;
      const auto noisy = mix_at_snr(windows[w], noise_window(plan, Stream::kNoiseH1, t), snr_db);
      out[t] = profile_at(noisy, plan.scd, alpha0);
    }
  });
  return out;
}

double exceedance_rate(std::span<const double> statistics, double threshold) {
  if (statistics.empty()) throw ConfigError("exceedance: no statistics");
  const auto hits = std::count_if(statistics.begin(), statistics.end(),
                                  [&](double t) { return exceeds(t, threshold); });
  return static_cast<double>(hits) / static_cast<double>(statistics.size());
}

double ks_statistic(std::span<const double> samples, const GevParams& model) {
  if (samples.empty()) throw ConfigError("ks: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i], model);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

std::size_t sturges_bins(std::size_t n) {
  if (n == 0) throw ConfigError("sturges: no samples");
  return static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)))) + 1;
}

HistogramReport fit_and_histogram(std::span<const double> samples, std::size_t bins, const GevFitOptions& fit) {
  if (samples.size() < kMinStatisticalWindows)
    throw ConfigError("histogram: need at least " + std::to_string(kMinStatisticalWindows) + " samples");
  HistogramReport report;
  report.fit = fit_gev_mle(samples, fit);
  report.ks_statistic = ks_statistic(samples, report.fit.params);

  if (bins == 0) bins = sturges_bins(samples.size());
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double width = (*hi_it - lo) / static_cast<double>(bins);
  report.bin_edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) report.bin_edges[b] = lo + width * static_cast<double>(b);
  report.bin_edges.back() = *hi_it;
  report.bin_counts.assign(bins, 0);
  for (double v : samples) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    report.bin_counts[std::min(b, bins - 1)] += 1;
  }
  report.density.resize(bins);
  const auto n = static_cast<double>(samples.size());
  for (std::size_t b = 0; b < bins; ++b) report.density[b] = static_cast<double>(report.bin_counts[b]) / (n * width);
  return report;
}

double interpolate_pd(const RocCurve& curve, double pf) {
  const auto& pts = curve.points;
  if (pts.empty()) throw ConfigError("roc: empty curve");
  if (pf <= pts.front().first) return pts.front().second;
  if (pf >= pts.back().first) return pts.back().second;
  auto hi = std::upper_bound(pts.begin(), pts.end(), pf, [](double v, const auto& p) { return v < p.first; });
  auto lo = std::prev(hi);
  const double span = hi->first - lo->first;
  if (span <= 0.0) return std::max(lo->second, hi->second);
  return lo->second + (hi->second - lo->second) * (pf - lo->first) / span;
}

double max_pd_gap(const RocCurve& theoretical, const RocCurve& empirical) {
  double gap = 0.0;
  for (const auto& [pf, pd] : theoretical.points) gap = std::max(gap, std::abs(pd - interpolate_pd(empirical, pf)));
  return gap;
}

std::vector<RocResult> run_roc(const ExperimentPlan& plan, const GevParams& noise_model, const RunOptions& run) {
  plan.validate(kMinStatisticalWindows);
  noise_model.validate();
  if (plan.pf_grid.empty()) throw ConfigError("roc: empty pf grid");

  std::vector<double> thresholds;
  for (double pf : plan.pf_grid) thresholds.push_back(threshold_for_pf(pf, noise_model));

  const auto h0 = h0_statistics(plan, run);
  std::vector<double> pf_empirical;
  for (double th : thresholds) pf_empirical.push_back(exceedance_rate(h0, th));

  std::vector<RocResult> results;
  for (double snr : plan.snr_db_list) {
    const auto h1 = h1_statistics(plan, snr, run);
    RocResult r;
    r.snr_db = snr;
    r.h0_trials = h0.size();
    r.h1_trials = h1.size();
    r.theoretical = {RocKind::kTheoretical, snr, {}};
    r.empirical = {RocKind::kEmpirical, snr, {}};
    std::vector<double> pd;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      pd.push_back(exceedance_rate(h1, thresholds[i]));
      r.theoretical.points.emplace_back(plan.pf_grid[i], pd.back());
      r.empirical.points.emplace_back(pf_empirical[i], pd.back());
    }
    // Thresholds fall as pf rises, so empirical Pf is already nondecreasing.
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      RocRow row;
      row.pf_preset = plan.pf_grid[i];
      row.pf_empirical = pf_empirical[i];
      row.pd_theoretical_curve = pd[i];
      row.pd_empirical = interpolate_pd(r.empirical, plan.pf_grid[i]);
      row.threshold = thresholds[i];
      row.trials = h1.size();
      r.rows.push_back(row);
    }
    results.push_back(std::move(r));
  }
  return results;
}

ExperimentResult run_experiment(const ExperimentPlan& plan, const RunOptions& run) {
  plan.validate(kMinStatisticalWindows);
  ExperimentResult result;
  result.noise_profile = collect_noise_profile(plan, run);
  result.histogram = fit_and_histogram(result.noise_profile, plan.histogram_bins, plan.fit);
  if (!result.histogram.fit.converged)
    throw NumericError("experiment: noise model fit did not converge (" + result.histogram.fit.note + ")");
  result.roc = run_roc(plan, result.histogram.fit.params, run);
  return result;
}

}  // namespace cycdet
