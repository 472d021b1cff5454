#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cycdet {

// Generalized Extreme Value parameters:
//   F(x) = exp(-(1 + kappa (x - mu) / sigma)^(-1/kappa)),  kappa != 0
//   F(x) = exp(-exp(-(x - mu) / sigma)),                    kappa == 0
struct GevParams {
  double kappa = 0.0;
  double mu = 0.0;
  double sigma = 1.0;

  void validate() const;
  [[nodiscard]] bool is_gumbel() const noexcept;
};

// Shapes with |kappa| below this use the Gumbel closed forms.
inline constexpr double kGumbelKappaEps = 1e-8;

[[nodiscard]] double pdf(double x, const GevParams& p);
[[nodiscard]] double log_pdf(double x, const GevParams& p);
[[nodiscard]] double cdf(double x, const GevParams& p);
// 1 - cdf, computed without cancellation in the upper tail.
[[nodiscard]] double survival(double x, const GevParams& p);
// lambda such that survival(lambda) == pf.
[[nodiscard]] double threshold_for_pf(double pf, const GevParams& p);

// Sum of log densities; -inf if any sample is outside the support.
[[nodiscard]] double log_likelihood(std::span<const double> samples, const GevParams& p);

struct GevFitOptions {
  double tol = 1e-9;
  int max_iter = 200;
  double kappa_min = -0.5;
  double kappa_max = 0.5;
  // After the Gumbel + profile-kappa stages, polish all three parameters
  // jointly by Newton ascent on the full log-likelihood.
  bool joint_refine = true;
};

struct FitReport {
  GevParams params;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  std::size_t sample_count = 0;
  double tol = 0.0;
  // Dimensionless Gumbel score residuals at the stage-1 (mu, sigma):
  //   mean(exp(-z)) - 1   and   mean(z (1 - exp(-z))) - 1,  z = (N - mu) / sigma
  std::array<double, 2> gumbel_residuals{};
  std::string note;
};

// Two-parameter Gumbel MLE. Throws NumericError for fewer than 30 samples,
// non-finite samples or zero variance.
[[nodiscard]] FitReport fit_gumbel_mle(std::span<const double> samples, double tol = 1e-9, int max_iter = 200);

// Stage 1: Gumbel (mu, sigma). Stage 2: kappa maximising the profile
// likelihood l(kappa | mu, sigma) by bracketed root finding on dl/dkappa.
// Stage 3 (options.joint_refine): joint Newton polish.
[[nodiscard]] FitReport fit_gev_mle(std::span<const double> samples, const GevFitOptions& options = {});

// dl/dkappa of the profile likelihood at fixed (mu, sigma).
[[nodiscard]] double profile_kappa_score(std::span<const double> samples, double kappa, double mu, double sigma);

// Gradient of the full log-likelihood with respect to (kappa, mu, sigma).
[[nodiscard]] std::array<double, 3> log_likelihood_gradient(std::span<const double> samples, const GevParams& p);

// Inverse-CDF sampling.
[[nodiscard]] std::vector<double> sample_gev(const GevParams& p, std::size_t n, std::uint64_t seed);

}  // namespace cycdet
