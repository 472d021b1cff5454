// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// argv[1] is the path of the cycdet executable (used by the determinism check).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cycdet/detector.hpp"
#include "cycdet/gev.hpp"
#include "cycdet/harness.hpp"
#include "cycdet/io.hpp"
#include "cycdet/scd.hpp"
#include "cycdet/siggen.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace cycdet;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("criterion %d %-22s %s  %s\n", id, name, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// 1 + 2 share one desk run: fit on L noise windows, ROC at -10 dB.
void model_and_roc() {
  auto plan = ExperimentPlan::desk();
  plan.noise_windows = 1000;
  plan.signal_windows = 1000;
  plan.snr_db_list = {-10.0};
  const auto res = run_experiment(plan);

  const double n = static_cast<double>(res.noise_profile.size());
  const double ks = ks_statistic(res.noise_profile, res.histogram.fit.params);
  const double crit = 1.63 / std::sqrt(n);
  const auto& p = res.histogram.fit.params;
  report(1, "gev-model-adequacy", ks < crit,
         fmt("KS=%.4f crit=%.4f (kappa=%.4f mu=%.5f", ks, crit, p.kappa, p.mu) + fmt(" sigma=%.5f)", p.sigma));

  const auto& roc = res.roc.front();
  const double gap = max_pd_gap(roc.theoretical, roc.empirical);
  double worst_z = 0.0;
  bool pf_ok = true;
  for (const auto& row : roc.rows) {
    const double se = std::sqrt(row.pf_preset * (1.0 - row.pf_preset) / static_cast<double>(roc.h0_trials));
    const double z = std::abs(row.pf_empirical - row.pf_preset) / se;
    worst_z = std::max(worst_z, z);
    if (z > 3.0) pf_ok = false;
  }
  report(2, "roc-agreement", gap <= 0.05 && pf_ok,
         fmt("max|dPd|=%.4f (<=0.05) worst Pf deviation=%.2f SE (<=3)", gap, worst_z));
}

void threshold_closed_form() {
  double worst = 0.0;
  for (double kappa : {-0.3, 0.0, 1e-7, 0.3})
    for (double pf : {1e-3, 0.01, 0.05, 0.1, 0.5}) {
      const GevParams p{kappa, 0.0, 1.0};
      const double err = std::abs(survival(threshold_for_pf(pf, p), p) - pf);
      const double err_oracle = std::abs((1.0 - oracle::gev_cdf(threshold_for_pf(pf, p), kappa, 0.0, 1.0)) - pf);
      worst = std::max({worst, err, err_oracle});
    }
  report(3, "threshold-closed-form", worst <= 1e-10, fmt("max|1-F(th)-pf|=%.3g (<=1e-10)", worst));
}

std::vector<double> draws(double kappa, double mu, double sigma, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) {
    double u = 0.0;
    while (u <= 0.0) u = uni(eng);
    const double y = -std::log(u);
    x = kappa == 0.0 ? mu - sigma * std::log(y) : mu + sigma * (std::pow(y, -kappa) - 1.0) / kappa;
  }
  return out;
}

// Grid box of +-4 SE around truth; the best grid point must sit within one
// grid step of the fitted optimum on every free axis.
bool grid_confirms(const std::vector<double>& xs, const double truth[3], const double se[3], const double fit[3],
                   double& worst_steps) {
  constexpr int kSteps = 17;
  double lo[3], hi[3];
  for (int i = 0; i < 3; ++i) {
    lo[i] = truth[i] - 4.0 * se[i];
    hi[i] = truth[i] + 4.0 * se[i];
  }
  const auto g = oracle::grid_search(xs, lo, hi, kSteps);
  const double got[3] = {g.kappa, g.mu, g.sigma};
  bool ok = true;
  for (int i = 0; i < 3; ++i) {
    if (se[i] == 0.0) continue;
    const double step = (hi[i] - lo[i]) / (kSteps - 1);
    const double s = std::abs(got[i] - fit[i]) / step;
    worst_steps = std::max(worst_steps, s);
    if (s > 1.0) ok = false;
  }
  return ok;
}

void mle_recovery() {
  constexpr std::size_t n = 10000;
  bool ok = true;
  double worst_se = 0.0, worst_steps = 0.0;

  const auto xg = draws(0.0, 5.0, 2.0, n, 101);
  const auto fg = fit_gumbel_mle(xg);
  const auto seg = oracle::gumbel_standard_errors(n, 2.0);
  ok = ok && fg.converged;
  const double zg[2] = {std::abs(fg.params.mu - 5.0) / seg[0], std::abs(fg.params.sigma - 2.0) / seg[1]};
  for (double z : zg) worst_se = std::max(worst_se, z);
  {
    const double truth[3] = {0.0, 5.0, 2.0}, se[3] = {0.0, seg[0], seg[1]};
    const double fit[3] = {0.0, fg.params.mu, fg.params.sigma};
    ok = grid_confirms(xg, truth, se, fit, worst_steps) && ok;
  }

  const auto xv = draws(0.1, 3.0, 0.5, n, 202);
  const auto fv = fit_gev_mle(xv);
  const auto sev = oracle::gev_standard_errors(xv, 0.1, 3.0, 0.5);
  ok = ok && fv.converged;
  const double zv[3] = {std::abs(fv.params.kappa - 0.1) / sev[0], std::abs(fv.params.mu - 3.0) / sev[1],
                        std::abs(fv.params.sigma - 0.5) / sev[2]};
  for (double z : zv) worst_se = std::max(worst_se, z);
  {
    const double truth[3] = {0.1, 3.0, 0.5}, se[3] = {sev[0], sev[1], sev[2]};
    const double fit[3] = {fv.params.kappa, fv.params.mu, fv.params.sigma};
    ok = grid_confirms(xv, truth, se, fit, worst_steps) && ok;
  }
  ok = ok && worst_se <= 3.0;
  report(4, "mle-recovery", ok,
         fmt("worst |fit-truth|=%.2f SE (<=3), grid optimum within %.2f steps (<=1)", worst_se, worst_steps));
}

void scd_oracles() {
  const auto plan = ExperimentPlan::desk();
  const std::size_t k = plan.scd.window_length;
  const double fs = plan.signal.sample_rate_hz;

  // alpha = 0 column against a direct-DFT smoothed periodogram.
  const auto win = noise_window(plan, Stream::kNoiseFit, 0);
  ScdConfig cfg = plan.scd;
  cfg.alpha_bins = {0};
  const auto s0 = estimate_scd(win, cfg);
  const auto ref = oracle::smoothed_periodogram(win.samples(), cfg.smoothing_length, true);
  double psd_err = 0.0;
  for (std::size_t r = 0; r < k; ++r) psd_err = std::max(psd_err, std::abs(s0.value(r, 0) - ref[r]) / ref[r]);

  // Conjugate symmetry S^{-a}(f) = conj(S^a(f)) and |S| scaling by c^2.
  cfg.alpha_bins = {-plan.alpha0_bin(), -400, -2, 2, 400, plan.alpha0_bin()};
  const auto s = estimate_scd(win, cfg);
  double sym_err = 0.0;
  for (std::size_t r = 0; r < s.rows(); ++r)
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t cm = 5 - c;
      if (!s.valid(r, c)) continue;
      const auto a = s.value(r, c), b = s.value(r, cm);
      sym_err = std::max(sym_err, std::abs(a - std::conj(b)) / std::max(std::abs(a), 1e-300));
    }
  const double c = 7.25;
  std::vector<double> scaled(win.samples().begin(), win.samples().end());
  for (auto& v : scaled) v *= c;
  const auto sc = estimate_scd(SampleBuffer(std::move(scaled), fs), cfg);
  double scale_err = 0.0;
  for (std::size_t i = 0; i < s.values().size(); ++i) {
    if (!s.valid_mask()[i]) continue;
    const auto a = s.values()[i];
    if (a == 0.0) continue;
    scale_err = std::max(scale_err, std::abs(sc.values()[i] - c * c * a) / (c * c * std::abs(a)));
  }

  // AM feature: alpha0 profile over the median profile at alphas away from
  // the AM cycle frequencies, averaged over Monte Carlo trials at -10 dB.
  constexpr std::size_t kTrials = 40;
  const int a0 = plan.alpha0_bin();
  ScdConfig fcfg = plan.scd;
  fcfg.alpha_bins = {a0};
  for (int a = 200; a < static_cast<int>(k) - 200; a += 100)
    if (std::abs(a - a0) >= 200) fcfg.alpha_bins.push_back(a);
  double ratio_sum = 0.0;
  for (std::size_t t = 0; t < kTrials; ++t) {
    const auto x = mix_at_snr(signal_window(plan, t), noise_window(plan, Stream::kNoiseH1, t), -10.0);
    const auto prof = alpha_profile(estimate_scd(x, fcfg));
    std::vector<double> others(prof.maxima.begin() + 1, prof.maxima.end());
    std::nth_element(others.begin(), others.begin() + others.size() / 2, others.end());
    ratio_sum += prof.maxima.front() / others[others.size() / 2];
  }
  const double ratio = ratio_sum / kTrials;

  const bool ok = psd_err <= 1e-12 && sym_err <= 1e-10 && scale_err <= 1e-10 && ratio >= 3.0;
  report(5, "scd-oracles", ok,
         fmt("psd rel=%.2g (<=1e-12) conj rel=%.2g scale rel=%.2g (<=1e-10)", psd_err, sym_err, scale_err) +
             fmt(" feature ratio=%.2f (>=3)", ratio));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void determinism(const std::string& cli) {
  const fs::path root = fs::temp_directory_path() / ("cycdet_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  io::write_json(root / "plan.json", io::to_json(ExperimentPlan::desk()));

  bool ok = true;
  std::string detail;
  const fs::path a = root / "a", b = root / "b";
  const std::string base = "\"" + cli + "\" roc --plan \"" + (root / "plan.json").string() + "\"";
  const int ra = std::system((base + " --jobs 1 -o \"" + a.string() + "\"").c_str());
  const int rb = std::system((base + " --jobs 4 -o \"" + b.string() + "\"").c_str());
  if (ra != 0 || rb != 0) {
    ok = false;
    detail = "roc exited with " + std::to_string(ra) + "/" + std::to_string(rb);
  } else {
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      ++files;
      const fs::path other = b / e.path().filename();
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
        ok = false;
        detail += e.path().filename().string() + " differs; ";
      }
    }
    std::size_t files_b = std::distance(fs::directory_iterator(b), fs::directory_iterator{});
    if (files != files_b) ok = false;
    if (files < 4) ok = false;
    detail += std::to_string(files) + " files compared, jobs 1 vs 4";
  }
  fs::remove_all(root);
  report(6, "determinism", ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-cycdet>\n");
    return 2;
  }
  try {
    model_and_roc();
    threshold_closed_form();
    mle_recovery();
    scd_oracles();
    determinism(argv[1]);
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
