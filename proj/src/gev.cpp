#include "cycdet/gev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "cycdet/error.hpp"
#include "cycdet/rng.hpp"

namespace cycdet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr std::size_t kMinSamples = 30;

// Per-sample quantities of the GEV log-density at reduced variate z.
//   s = 1 + kappa z,  a = log s,  t = s^(-1/kappa)  (t = exp(-z) for Gumbel)
struct Reduced {
  bool in_support = true;
  double s = 1.0;
  double a = 0.0;
  double a_over_kappa = 0.0;
  double t = 0.0;
};

Reduced reduce(double z, double kappa) {
  Reduced r;
  if (std::abs(kappa) < kGumbelKappaEps) {
    r.a_over_kappa = z;
    r.t = std::exp(-z);
    return r;
  }
  const double u = kappa * z;
  if (!(u > -1.0)) {
    r.in_support = false;
    return r;
  }
  r.s = 1.0 + u;
  r.a = std::log1p(u);
  r.a_over_kappa = r.a / kappa;
  r.t = std::exp(-r.a_over_kappa);
  return r;
}

// (log(1 + u) - u / (1 + u)) / kappa^2 with u = kappa z. The series branch
// avoids the cancellation when |u| is small and covers kappa == 0.
double curvature_term(double z, double kappa, const Reduced& r) {
  const double u = kappa * z;
  if (std::abs(u) < 1e-3) {
    double acc = 0.0;
    double pw = 1.0;
    double sign = 1.0;
    for (int n = 2; n <= 9; ++n) {
      acc += sign * (static_cast<double>(n - 1) / static_cast<double>(n)) * pw;
      pw *= u;
      sign = -sign;
    }
    return z * z * acc;
  }
  return (r.a - u / r.s) / (kappa * kappa);
}

void check_samples(std::span<const double> samples) {
  if (samples.size() < kMinSamples)
    throw NumericError("gev fit: need at least " + std::to_string(kMinSamples) + " samples, got " +
                       std::to_string(samples.size()));
  for (double v : samples)
    if (!std::isfinite(v)) throw NumericError("gev fit: non-finite sample");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) throw NumericError("gev fit: degenerate data (all samples equal, zero variance)");
}

struct RootResult {
  double x = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Brent's method on a bracket with f(a), f(b) of opposite sign.
template <class F>
RootResult brent_root(F&& f, double a, double b, double fa, double fb, double xtol, int max_iter) {
  RootResult out;
  if (fa == 0.0) return {a, 0, true};
  if (fb == 0.0) return {b, 0, true};
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 1; it <= max_iter; ++it) {
    out.iterations = it;
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * kEps * std::abs(b) + 0.5 * xtol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) {
      out.x = b;
      out.converged = true;
      return out;
    }
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  out.x = b;
  return out;
}

std::array<double, 2> gumbel_residuals(std::span<const double> x, double mu, double sigma) {
  double r1 = 0.0, r2 = 0.0;
  for (double v : x) {
    const double z = (v - mu) / sigma;
    const double e = std::exp(-z);
    r1 += e;
    r2 += z * (1.0 - e);
  }
  const auto n = static_cast<double>(x.size());
  return {r1 / n - 1.0, r2 / n - 1.0};
}

double sample_variance(std::span<const double> x) {
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(x.size() - 1);
}

bool within(const GevParams& p, const GevFitOptions& o) {
  return p.sigma > 0.0 && std::isfinite(p.mu) && p.kappa >= o.kappa_min && p.kappa <= o.kappa_max;
}

// Solves the 3x3 system h * x = g by Gaussian elimination with partial pivoting.
bool solve3(std::array<std::array<double, 3>, 3> h, std::array<double, 3> g, std::array<double, 3>& x) {
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(h[r][col]) > std::abs(h[piv][col])) piv = r;
    if (h[piv][col] == 0.0 || !std::isfinite(h[piv][col])) return false;
    std::swap(h[piv], h[col]);
    std::swap(g[piv], g[col]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = h[r][col] / h[col][col];
      for (int c = col; c < 3; ++c) h[r][c] -= f * h[col][c];
      g[r] -= f * g[col];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double acc = g[r];
    for (int c = r + 1; c < 3; ++c) acc -= h[r][c] * x[c];
    x[r] = acc / h[r][r];
  }
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

GevParams with_shift(const GevParams& p, const std::array<double, 3>& step, double scale) {
  return {p.kappa + scale * step[0], p.mu + scale * step[1], p.sigma + scale * step[2]};
}

// Damped Newton ascent on the full log-likelihood. Gradient is analytic, the
// Hessian is a central difference of the gradient.
struct RefineResult {
  GevParams params;
  double log_likelihood;
  int iterations;
  bool converged;
};

RefineResult joint_refine(std::span<const double> x, GevParams p, const GevFitOptions& o) {
  double ll = log_likelihood(x, p);
  for (int it = 1; it <= o.max_iter; ++it) {
    const auto grad = log_likelihood_gradient(x, p);
    const std::array<double, 3> h{1e-5, 1e-5 * p.sigma, 1e-5 * p.sigma};
    std::array<std::array<double, 3>, 3> hess{};
    bool ok = true;
    for (int j = 0; j < 3 && ok; ++j) {
      std::array<double, 3> e{};
      e[j] = h[j];
      const auto gp = log_likelihood_gradient(x, with_shift(p, e, 1.0));
      const auto gm = log_likelihood_gradient(x, with_shift(p, e, -1.0));
      for (int i = 0; i < 3; ++i) {
        hess[i][j] = (gp[i] - gm[i]) / (2.0 * h[j]);
        ok = ok && std::isfinite(hess[i][j]);
      }
    }
    if (!ok) return {p, ll, it, false};
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) hess[i][j] = hess[j][i] = 0.5 * (hess[i][j] + hess[j][i]);

    // Newton step solves (-H) step = grad; fall back to scaled gradient ascent
    // when -H is not positive along the step.
    std::array<std::array<double, 3>, 3> neg{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) neg[i][j] = -hess[i][j];
    std::array<double, 3> step{};
    const bool newton = solve3(neg, grad, step) &&
                        (step[0] * grad[0] + step[1] * grad[1] + step[2] * grad[2]) > 0.0;
    if (!newton) {
      const double n = static_cast<double>(x.size());
      step = {grad[0] / n, grad[1] * p.sigma * p.sigma / n, grad[2] * p.sigma * p.sigma / n};
    }

    double scale = 1.0;
    GevParams next = p;
    double next_ll = -kInf;
    for (int ls = 0; ls < 60; ++ls, scale *= 0.5) {
      next = with_shift(p, step, scale);
      if (!within(next, o)) continue;
      next_ll = log_likelihood(x, next);
      if (next_ll >= ll) break;
    }
    auto negligible = [&](const std::array<double, 3>& delta) {
      return std::abs(delta[0]) <= o.tol && std::abs(delta[1]) <= o.tol * p.sigma &&
             std::abs(delta[2]) <= o.tol * p.sigma;
    };
    // A Newton step that cannot improve the likelihood is already at the
    // rounding floor of the optimum.
    if (!(next_ll >= ll)) return {p, ll, it, newton && negligible(step)};

    const bool small = negligible({next.kappa - p.kappa, next.mu - p.mu, next.sigma - p.sigma});
    p = next;
    ll = next_ll;
    if (small && newton) return {p, ll, it, true};
  }
  return {p, ll, o.max_iter, false};
}

}  // namespace

void GevParams::validate() const {
  if (!std::isfinite(kappa) || !std::isfinite(mu) || !std::isfinite(sigma))
    throw ConfigError("gev: parameters must be finite");
  if (!(sigma > 0.0)) throw ConfigError("gev: sigma must be positive");
}

bool GevParams::is_gumbel() const noexcept { return std::abs(kappa) < kGumbelKappaEps; }

double log_pdf(double x, const GevParams& p) {
  if (!std::isfinite(x)) throw ConfigError("gev pdf: non-finite argument");
  p.validate();
  const double z = (x - p.mu) / p.sigma;
  const auto r = reduce(z, p.kappa);
  if (!r.in_support) return -kInf;
  if (p.is_gumbel()) return -std::log(p.sigma) - z - r.t;
  return -std::log(p.sigma) - r.a - r.a_over_kappa - r.t;
}

double pdf(double x, const GevParams& p) { return std::exp(log_pdf(x, p)); }

double cdf(double x, const GevParams& p) {
  if (std::isnan(x)) throw ConfigError("gev cdf: NaN argument");
  p.validate();
  if (x == kInf) return 1.0;
  if (x == -kInf) return 0.0;
  const auto r = reduce((x - p.mu) / p.sigma, p.kappa);
  if (!r.in_support) return p.kappa > 0.0 ? 0.0 : 1.0;
  return std::exp(-r.t);
}

double survival(double x, const GevParams& p) {
  if (std::isnan(x)) throw ConfigError("gev survival: NaN argument");
  p.validate();
  if (x == kInf) return 0.0;
  if (x == -kInf) return 1.0;
  const auto r = reduce((x - p.mu) / p.sigma, p.kappa);
  if (!r.in_support) return p.kappa > 0.0 ? 1.0 : 0.0;
  return -std::expm1(-r.t);
}

double threshold_for_pf(double pf, const GevParams& p) {
  if (!(pf > 0.0 && pf < 1.0)) throw ConfigError("threshold: pf must lie strictly inside (0, 1)");
  p.validate();
  const double log_y = std::log(-std::log1p(-pf));
  if (p.is_gumbel()) return p.mu - p.sigma * log_y;
  return p.mu + p.sigma * std::expm1(-p.kappa * log_y) / p.kappa;
}

double log_likelihood(std::span<const double> samples, const GevParams& p) {
  double acc = 0.0;
  for (double v : samples) {
    const double lp = log_pdf(v, p);
    if (lp == -kInf) return -kInf;
    acc += lp;
  }
  return acc;
}

double profile_kappa_score(std::span<const double> samples, double kappa, double mu, double sigma) {
  double acc = 0.0;
  for (double v : samples) {
    const double z = (v - mu) / sigma;
    const auto r = reduce(z, kappa);
    if (!r.in_support) return std::numeric_limits<double>::quiet_NaN();
    acc += curvature_term(z, kappa, r) * (1.0 - r.t) - z / r.s;
  }
  return acc;
}

std::array<double, 3> log_likelihood_gradient(std::span<const double> samples, const GevParams& p) {
  std::array<double, 3> g{};
  const double k = p.is_gumbel() ? 0.0 : p.kappa;
  for (double v : samples) {
    const double z = (v - p.mu) / p.sigma;
    const auto r = reduce(z, p.kappa);
    if (!r.in_support) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      return {nan, nan, nan};
    }
    const double core = (1.0 + k - r.t) / r.s;
    g[0] += curvature_term(z, p.kappa, r) * (1.0 - r.t) - z / r.s;
    g[1] += core / p.sigma;
    g[2] += (-1.0 + z * core) / p.sigma;
  }
  return g;
}

FitReport fit_gumbel_mle(std::span<const double> samples, double tol, int max_iter) {
  if (!(tol > 0.0)) throw ConfigError("gumbel fit: tol must be positive");
  if (max_iter < 1) throw ConfigError("gumbel fit: max_iter must be positive");
  check_samples(samples);

  // Work with offsets from the minimum so every weight exp(-d / sigma) <= 1.
  const double base = *std::min_element(samples.begin(), samples.end());
  std::vector<double> d(samples.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = samples[i] - base;
  const double mean_d = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());

  // sigma solves sigma = mean(N) - sum N w / sum w, w = exp(-N / sigma).
  auto score = [&](double sigma) {
    double sw = 0.0, sdw = 0.0;
    for (double v : d) {
      const double w = std::exp(-v / sigma);
      sw += w;
      sdw += v * w;
    }
    return sigma - mean_d + sdw / sw;
  };

  const double start = std::sqrt(6.0 * sample_variance(samples)) / 3.141592653589793;
  double lo = start, hi = start;
  double flo = score(lo), fhi = flo;
  int expand = 0;
  while (flo >= 0.0 && expand++ < 200) flo = score(lo *= 0.5);
  while (fhi <= 0.0 && expand++ < 400) fhi = score(hi *= 2.0);
  if (flo >= 0.0 || fhi <= 0.0) throw NumericError("gumbel fit: could not bracket the scale equation");

  const double xtol = std::max(tol * 1e-3, 4.0 * kEps) * start;
  const auto root = brent_root(score, lo, hi, flo, fhi, xtol, max_iter);
  const double sigma = root.x;
  double sw = 0.0;
  for (double v : d) sw += std::exp(-v / sigma);
  const double mu = base - sigma * std::log(sw / static_cast<double>(d.size()));

  FitReport report;
  report.params = {0.0, mu, sigma};
  report.sample_count = samples.size();
  report.tol = tol;
  report.iterations = root.iterations + expand;
  report.gumbel_residuals = gumbel_residuals(samples, mu, sigma);
  report.converged = root.converged && std::abs(report.gumbel_residuals[0]) <= tol &&
                     std::abs(report.gumbel_residuals[1]) <= tol;
  report.log_likelihood = log_likelihood(samples, report.params);
  if (!report.converged) report.note = "gumbel scale equation did not converge";
  return report;
}

FitReport fit_gev_mle(std::span<const double> samples, const GevFitOptions& options) {
  if (!(options.kappa_min < options.kappa_max)) throw ConfigError("gev fit: empty kappa search interval");
  FitReport report = fit_gumbel_mle(samples, options.tol, options.max_iter);
  if (!report.converged) return report;
  const double mu = report.params.mu;
  const double sigma = report.params.sigma;

  // Keep 1 + kappa z > 0 for every sample.
  double zmin = kInf, zmax = -kInf;
  for (double v : samples) {
    const double z = (v - mu) / sigma;
    zmin = std::min(zmin, z);
    zmax = std::max(zmax, z);
  }
  constexpr double kMargin = 1.0 - 1e-9;
  double lo = options.kappa_min;
  double hi = options.kappa_max;
  if (zmax > 0.0) lo = std::max(lo, -kMargin / zmax);
  if (zmin < 0.0) hi = std::min(hi, kMargin / -zmin);

  double kappa = 0.0;
  if (lo >= hi) {
    report.note = "kappa bracket empty after support shrinkage; kept Gumbel fit";
  } else {
    auto score = [&](double k) { return profile_kappa_score(samples, k, mu, sigma); };
    const double slo = score(lo);
    const double shi = score(hi);
    if (slo > 0.0 && shi < 0.0) {
      const auto root = brent_root(score, lo, hi, slo, shi, options.tol * 1e-3, options.max_iter);
      report.iterations += root.iterations;
      if (!root.converged) {
        report.converged = false;
        report.note = "profile kappa root did not converge";
      }
      kappa = root.x;
    } else {
      report.note = "no interior stationary point of the kappa profile; kept Gumbel fit";
    }
  }
  if (std::abs(kappa) < kGumbelKappaEps) kappa = 0.0;
  report.params = {kappa, mu, sigma};
  report.log_likelihood = log_likelihood(samples, report.params);

  if (options.joint_refine && report.converged) {
    const auto refined = joint_refine(samples, report.params, options);
    report.iterations += refined.iterations;
    if (refined.log_likelihood >= report.log_likelihood) {
      report.params = refined.params;
      report.log_likelihood = refined.log_likelihood;
    }
    if (!refined.converged) {
      report.converged = false;
      report.note = "joint refinement did not converge";
    }
  }
  return report;
}

std::vector<double> sample_gev(const GevParams& p, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("sample_gev: n must be at least 1");
  p.validate();
  Engine engine = make_engine(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) {
    double u = 0.0;
    while (u <= 0.0) u = uniform(engine);
    const double log_y = std::log(-std::log(u));
    v = p.is_gumbel() ? p.mu - p.sigma * log_y : p.mu + p.sigma * std::expm1(-p.kappa * log_y) / p.kappa;
  }
  return out;
}

}  // namespace cycdet
