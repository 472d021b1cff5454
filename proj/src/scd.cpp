#include "cycdet/scd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

#include "cycdet/error.hpp"
#include "cycdet/fft.hpp"

namespace cycdet {
namespace {

using Complex = std::complex<double>;

// Index range [lo, hi) of signed frequency bins f for which both f + h and
// f - h stay inside [-K/2, K/2).
struct Support {
  long lo;
  long hi;
};

Support support_for(int alpha_bin, std::size_t k) {
  const long half = std::abs(alpha_bin) / 2;
  const long nyq = static_cast<long>(k / 2);
  return {-nyq + half, nyq - half};
}

std::size_t wrap(long bin, std::size_t k) {
  const long n = static_cast<long>(k);
  return static_cast<std::size_t>(((bin % n) + n) % n);
}

}  // namespace

void ScdConfig::validate() const {
  const auto k = window_length;
  if (k < 2 || (k & (k - 1)) != 0) throw ConfigError("scd: window length must be a power of two >= 2");
  if (smoothing_length == 0) throw ConfigError("scd: smoothing length must be positive");
  if (effective_smoothing() >= k) throw ConfigError("scd: smoothing length must be below the window length");
  if (alpha_bins.empty()) throw ConfigError("scd: empty alpha grid");
  for (int a : alpha_bins) {
    if (a % 2 != 0) throw ConfigError("scd: alpha bin " + std::to_string(a) + " is not on the even-bin grid");
    if (static_cast<std::size_t>(std::abs(a)) >= k)
      throw ConfigError("scd: alpha bin " + std::to_string(a) + " exceeds the window length");
  }
}

int snap_alpha_bin(double alpha_hz, std::size_t window_length, double sample_rate_hz) {
  if (!std::isfinite(alpha_hz) || !(sample_rate_hz > 0.0)) throw ConfigError("snap: invalid cyclic frequency");
  const double bins = alpha_hz * static_cast<double>(window_length) / sample_rate_hz;
  return 2 * static_cast<int>(std::lround(bins / 2.0));
}

std::vector<double> taper_coefficients(Taper taper, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (taper == Taper::kHamming && length > 1) {
    const double denom = static_cast<double>(length - 1);
    for (std::size_t n = 0; n < length; ++n)
      w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / denom);
  }
  return w;
}

double taper_power(std::span<const double> taper) {
  double acc = 0.0;
  for (double v : taper) acc += v * v;
  return acc / static_cast<double>(taper.size());
}

ScdMatrix::ScdMatrix(std::vector<double> f_axis_hz, std::vector<int> alpha_bins, std::vector<double> alpha_axis_hz,
                     std::vector<Complex> values, std::vector<std::uint8_t> valid_mask)
    : f_axis_hz_(std::move(f_axis_hz)),
      alpha_bins_(std::move(alpha_bins)),
      alpha_axis_hz_(std::move(alpha_axis_hz)),
      values_(std::move(values)),
      valid_(std::move(valid_mask)) {
  if (alpha_bins_.size() != alpha_axis_hz_.size()) throw ConfigError("scd matrix: alpha axes disagree");
  const auto cells = f_axis_hz_.size() * alpha_bins_.size();
  if (values_.size() != cells || valid_.size() != cells) throw ConfigError("scd matrix: shape mismatch");
}

std::size_t ScdMatrix::column_of(int alpha_bin) const {
  auto it = std::find(alpha_bins_.begin(), alpha_bins_.end(), alpha_bin);
  if (it == alpha_bins_.end()) throw ConfigError("scd matrix: alpha bin " + std::to_string(alpha_bin) + " not on grid");
  return static_cast<std::size_t>(it - alpha_bins_.begin());
}

double AlphaProfile::at(int alpha_bin) const {
  auto it = std::find(alpha_bins.begin(), alpha_bins.end(), alpha_bin);
  if (it == alpha_bins.end()) throw ConfigError("alpha profile: alpha bin " + std::to_string(alpha_bin) + " not present");
  return maxima[static_cast<std::size_t>(it - alpha_bins.begin())];
}

std::vector<SampleBuffer> segment_windows(const SampleBuffer& buffer, std::size_t window_length) {
  if (window_length == 0) throw ConfigError("segment: window length must be positive");
  if (window_length > buffer.size())
    throw ConfigError("segment: window length " + std::to_string(window_length) + " exceeds buffer length " +
                      std::to_string(buffer.size()));
  const auto count = buffer.size() / window_length;
  const auto samples = buffer.samples();
  std::vector<SampleBuffer> windows;
  windows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto first = samples.begin() + static_cast<std::ptrdiff_t>(i * window_length);
    windows.emplace_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(window_length)),
                         buffer.sample_rate_hz());
  }
  return windows;
}

ScdMatrix estimate_scd(const SampleBuffer& window, const ScdConfig& cfg) {
  cfg.validate();
  const std::size_t k = cfg.window_length;
  if (window.size() != k)
    throw ConfigError("scd: window has " + std::to_string(window.size()) + " samples, expected " + std::to_string(k));

  const auto w = taper_coefficients(cfg.taper, k);
  std::vector<double> tapered(k);
  const auto x = window.samples();
  for (std::size_t n = 0; n < k; ++n) tapered[n] = w[n] * x[n];
  const auto spectrum = fft::forward_real(tapered);
  const double norm = 1.0 / (static_cast<double>(k) * taper_power(w));

  const double fs = window.sample_rate_hz();
  const double bin_hz = fs / static_cast<double>(k);
  const long nyq = static_cast<long>(k / 2);
  std::vector<double> f_axis(k);
  for (std::size_t r = 0; r < k; ++r) f_axis[r] = static_cast<double>(static_cast<long>(r) - nyq) * bin_hz;

  const std::size_t cols = cfg.alpha_bins.size();
  std::vector<double> alpha_hz(cols);
  std::vector<Complex> values(k * cols, Complex{});
  std::vector<std::uint8_t> mask(k * cols, 0);

  const long half_width = static_cast<long>(cfg.effective_smoothing() / 2);
  std::vector<Complex> periodogram(k);
  // Prefix sums in extended precision keep the moving average within a few
  // ulps of a direct summation.
  std::vector<long double> prefix_re(k + 1);
  std::vector<long double> prefix_im(k + 1);

  for (std::size_t c = 0; c < cols; ++c) {
    const int a = cfg.alpha_bins[c];
    alpha_hz[c] = static_cast<double>(a) * bin_hz;
    const long h = a / 2;
    const auto [lo, hi] = support_for(a, k);
    const auto count = static_cast<std::size_t>(hi - lo);

    for (std::size_t i = 0; i < count; ++i) {
      const long f = lo + static_cast<long>(i);
      periodogram[i] = norm * (spectrum[wrap(f + h, k)] * std::conj(spectrum[wrap(f - h, k)]));
    }
    prefix_re[0] = 0.0L;
    prefix_im[0] = 0.0L;
    for (std::size_t i = 0; i < count; ++i) {
      prefix_re[i + 1] = prefix_re[i] + periodogram[i].real();
      prefix_im[i + 1] = prefix_im[i] + periodogram[i].imag();
    }
    for (std::size_t i = 0; i < count; ++i) {
      const long first = std::max(0L, static_cast<long>(i) - half_width);
      const long last = std::min(static_cast<long>(count) - 1, static_cast<long>(i) + half_width);
      const auto n = static_cast<long double>(last - first + 1);
      const auto re = (prefix_re[static_cast<std::size_t>(last + 1)] - prefix_re[static_cast<std::size_t>(first)]) / n;
      const auto im = (prefix_im[static_cast<std::size_t>(last + 1)] - prefix_im[static_cast<std::size_t>(first)]) / n;
      const auto row = static_cast<std::size_t>(lo + static_cast<long>(i) + nyq);
      values[row * cols + c] = Complex(static_cast<double>(re), static_cast<double>(im));
      mask[row * cols + c] = 1;
    }
  }
  return ScdMatrix(std::move(f_axis), cfg.alpha_bins, std::move(alpha_hz), std::move(values), std::move(mask));
}

AlphaProfile alpha_profile(const ScdMatrix& scd, std::size_t window_index) {
  AlphaProfile profile;
  profile.window_index = window_index;
  const auto bins = scd.alpha_bins();
  const auto hz = scd.alpha_axis_hz();
  profile.alpha_bins.assign(bins.begin(), bins.end());
  profile.alphas_hz.assign(hz.begin(), hz.end());
  profile.maxima.resize(scd.cols());
  for (std::size_t c = 0; c < scd.cols(); ++c) {
    bool any = false;
    double best = 0.0;
    for (std::size_t r = 0; r < scd.rows(); ++r) {
      if (!scd.valid(r, c)) continue;
      any = true;
      best = std::max(best, std::abs(scd.value(r, c)));
    }
    if (!any) throw NumericError("alpha profile: alpha bin " + std::to_string(bins[c]) + " has no valid cells");
    profile.maxima[c] = best;
  }
  return profile;
}

double profile_at(const SampleBuffer& window, const ScdConfig& cfg, int alpha_bin) {
  ScdConfig single = cfg;
  single.alpha_bins = {alpha_bin};
  return alpha_profile(estimate_scd(window, single)).maxima.front();
}

}  // namespace cycdet
