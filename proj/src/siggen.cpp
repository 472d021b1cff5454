#include "cycdet/siggen.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "cycdet/error.hpp"
#include "cycdet/fft.hpp"
#include "cycdet/rng.hpp"

namespace cycdet {
namespace {

double measure_power(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

SampleBuffer::SampleBuffer(std::vector<double> samples, double sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz) {
  if (samples_.empty()) throw ConfigError("sample buffer: no samples");
  if (!positive_finite(sample_rate_hz_)) throw ConfigError("sample buffer: sample rate must be positive");
  if (!std::all_of(samples_.begin(), samples_.end(), [](double v) { return std::isfinite(v); }))
    throw ConfigError("sample buffer: non-finite sample");
  mean_power_ = measure_power(samples_);
}

void SignalSpec::validate(std::size_t analysis_window) const {
  if (!positive_finite(carrier_freq_hz) || !positive_finite(baseband_bandwidth_hz) ||
      !positive_finite(sample_rate_hz))
    throw ConfigError("signal spec: frequencies must be positive and finite");
  if (carrier_freq_hz >= sample_rate_hz / 2.0)
    throw ConfigError("signal spec: carrier " + std::to_string(carrier_freq_hz) +
                      " Hz violates Nyquist for fs=" + std::to_string(sample_rate_hz) + " Hz");
  if (baseband_bandwidth_hz >= carrier_freq_hz)
    throw ConfigError("signal spec: baseband bandwidth must be below the carrier");
  if (duration_samples == 0) throw ConfigError("signal spec: duration must be positive");
  if (analysis_window > 0 && duration_samples < 2 * analysis_window)
    throw ConfigError("signal spec: duration must cover at least two analysis windows");
  if (!std::isfinite(modulation_index) || modulation_index < 0.0 || modulation_index > 1.0)
    throw ConfigError("signal spec: modulation index must lie in [0, 1]");
}

void NoiseSpec::validate() const {
  if (!positive_finite(variance)) throw ConfigError("noise spec: variance must be positive");
}

std::vector<double> generate_message(const SignalSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t n = spec.duration_samples;
  std::vector<double> message(n, 0.0);
  const auto max_bin = static_cast<std::size_t>(
      std::floor(spec.baseband_bandwidth_hz * static_cast<double>(n) / spec.sample_rate_hz));
  if (spec.modulation_index == 0.0 || max_bin == 0) return message;

  Engine engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> white(n);
  for (auto& v : white) v = normal(engine);

  // Brick-wall low-pass: keep bins 1..max_bin (DC removed so m(t) is zero mean).
  auto spectrum = fft::forward_real(white);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    if (k == 0 || k > max_bin) spectrum[k] = 0.0;
  }
  message = fft::inverse_real(spectrum);

  double peak = 0.0;
  for (double v : message) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return message;
  const double scale = spec.modulation_index / peak;
  for (auto& v : message) v *= scale;
  return message;
}

SampleBuffer generate_am(const SignalSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto message = generate_message(spec, seed);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> out(spec.duration_samples);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double phase = two_pi * spec.carrier_freq_hz * static_cast<double>(k) / spec.sample_rate_hz;
    out[k] = (1.0 + message[k]) * std::cos(phase);
  }
  return SampleBuffer(std::move(out), spec.sample_rate_hz);
}

SampleBuffer generate_awgn(std::size_t length, const NoiseSpec& noise, double sample_rate_hz) {
  if (length == 0) throw ConfigError("awgn: length must be at least 1");
  noise.validate();
  Engine engine = make_engine(noise.seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(noise.variance));
  std::vector<double> out(length);
  for (auto& v : out) v = normal(engine);
  return SampleBuffer(std::move(out), sample_rate_hz);
}

double snr_gain(const SampleBuffer& signal, const SampleBuffer& noise, double snr_db) {
  if (signal.size() != noise.size()) throw ConfigError("mix: signal and noise lengths differ");
  if (signal.sample_rate_hz() != noise.sample_rate_hz())
    throw ConfigError("mix: signal and noise sample rates differ");
  if (!std::isfinite(snr_db)) throw ConfigError("mix: snr_db must be finite");
  if (signal.mean_power() == 0.0) throw NumericError("mix: signal has zero power");
  if (noise.mean_power() == 0.0) throw NumericError("mix: noise has zero power");
  const double target = noise.mean_power() * std::pow(10.0, snr_db / 10.0);
  return std::sqrt(target / signal.mean_power());
}

SampleBuffer mix_at_snr(const SampleBuffer& signal, const SampleBuffer& noise, double snr_db) {
  const double gain = snr_gain(signal, noise, snr_db);
  std::vector<double> out(signal.size());
  const auto s = signal.samples();
  const auto n = noise.samples();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = gain * s[k] + n[k];
  return SampleBuffer(std::move(out), signal.sample_rate_hz());
}

}  // namespace cycdet
