#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cycdet {

enum class Modulation { kAm };

// Real-valued samples plus their sample rate. Immutable after construction;
// mean power is measured once and kept alongside the samples.
class SampleBuffer {
 public:
  SampleBuffer(std::vector<double> samples, double sample_rate_hz);

  [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  [[nodiscard]] double mean_power() const noexcept { return mean_power_; }
  [[nodiscard]] double operator[](std::size_t i) const { return samples_[i]; }

 private:
  std::vector<double> samples_;
  double sample_rate_hz_;
  double mean_power_;
};

struct SignalSpec {
  double carrier_freq_hz = 1.0e6;
  double baseband_bandwidth_hz = 10.0e3;
  double sample_rate_hz = 3.0e6;
  std::size_t duration_samples = 8192;
  Modulation modulation = Modulation::kAm;
  // Peak |m(t)|. Zero gives an unmodulated carrier.
  double modulation_index = 0.5;

  // Throws ConfigError. When analysis_window > 0 the buffer must hold at
  // least two windows.
  void validate(std::size_t analysis_window = 0) const;
};

struct NoiseSpec {
  double variance = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// (1 + m(t)) cos(2 pi fc t), m(t) band-limited Gaussian scaled to peak
// spec.modulation_index. Carrier phase is zero.
[[nodiscard]] SampleBuffer generate_am(const SignalSpec& spec, std::uint64_t seed);

// The message m(t) alone, before it multiplies the carrier.
[[nodiscard]] std::vector<double> generate_message(const SignalSpec& spec, std::uint64_t seed);

[[nodiscard]] SampleBuffer generate_awgn(std::size_t length, const NoiseSpec& noise,
                                         double sample_rate_hz = 1.0);

// Gain g applied to `signal` so that P(g*s) / P(n) equals snr_db. Powers are
// measured over the whole sampling bandwidth.
[[nodiscard]] double snr_gain(const SampleBuffer& signal, const SampleBuffer& noise, double snr_db);

[[nodiscard]] SampleBuffer mix_at_snr(const SampleBuffer& signal, const SampleBuffer& noise,
                                      double snr_db);

}  // namespace cycdet
