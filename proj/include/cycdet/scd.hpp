#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cycdet/siggen.hpp"

namespace cycdet {

enum class Taper { kHamming, kRectangular };

// Frequency-smoothing SCD estimator settings. Cyclic frequencies are given as
// even DFT-bin offsets so that f +/- alpha/2 falls on integer bins.
struct ScdConfig {
  std::size_t window_length = 4096;
  Taper taper = Taper::kHamming;
  // Even lengths are coerced up to the next odd value (centred average).
  std::size_t smoothing_length = 1300;
  std::vector<int> alpha_bins{0};

  [[nodiscard]] std::size_t effective_smoothing() const noexcept { return smoothing_length | 1U; }
  void validate() const;
};

// Nearest even bin offset to a cyclic frequency in Hz.
[[nodiscard]] int snap_alpha_bin(double alpha_hz, std::size_t window_length, double sample_rate_hz);

// Taper coefficients (symmetric Hamming) and U = mean(w^2).
[[nodiscard]] std::vector<double> taper_coefficients(Taper taper, std::size_t length);
[[nodiscard]] double taper_power(std::span<const double> taper);

// S^alpha(f) on a (f, alpha) grid. Rows are signed frequency bins
// -K/2 .. K/2-1 (row r <-> bin r - K/2), columns follow the configured alpha
// grid. A cell is valid when both f + alpha/2 and f - alpha/2 are inside the
// Nyquist band [-K/2, K/2).
class ScdMatrix {
 public:
  ScdMatrix(std::vector<double> f_axis_hz, std::vector<int> alpha_bins, std::vector<double> alpha_axis_hz,
            std::vector<std::complex<double>> values, std::vector<std::uint8_t> valid_mask);

  [[nodiscard]] std::size_t rows() const noexcept { return f_axis_hz_.size(); }
  [[nodiscard]] std::size_t cols() const noexcept { return alpha_bins_.size(); }
  [[nodiscard]] std::complex<double> value(std::size_t row, std::size_t col) const {
    return values_[row * cols() + col];
  }
  [[nodiscard]] bool valid(std::size_t row, std::size_t col) const { return valid_[row * cols() + col] != 0; }
  [[nodiscard]] std::span<const double> f_axis_hz() const noexcept { return f_axis_hz_; }
  [[nodiscard]] std::span<const int> alpha_bins() const noexcept { return alpha_bins_; }
  [[nodiscard]] std::span<const double> alpha_axis_hz() const noexcept { return alpha_axis_hz_; }
  [[nodiscard]] std::span<const std::complex<double>> values() const noexcept { return values_; }
  [[nodiscard]] std::span<const std::uint8_t> valid_mask() const noexcept { return valid_; }
  // Column index of an alpha bin, or throws ConfigError.
  [[nodiscard]] std::size_t column_of(int alpha_bin) const;

 private:
  std::vector<double> f_axis_hz_;
  std::vector<int> alpha_bins_;
  std::vector<double> alpha_axis_hz_;
  std::vector<std::complex<double>> values_;  // row-major (f, alpha)
  std::vector<std::uint8_t> valid_;
};

struct AlphaProfile {
  std::vector<int> alpha_bins;
  std::vector<double> alphas_hz;
  std::vector<double> maxima;
  std::size_t window_index = 0;

  // Profile value at an alpha bin, or throws ConfigError.
  [[nodiscard]] double at(int alpha_bin) const;
};

// Non-overlapping windows n(iK + j), 0 <= j < K; the tail is dropped.
[[nodiscard]] std::vector<SampleBuffer> segment_windows(const SampleBuffer& buffer, std::size_t window_length);

[[nodiscard]] ScdMatrix estimate_scd(const SampleBuffer& window, const ScdConfig& cfg);

// N(alpha) = max over valid f of |S^alpha(f)|.
[[nodiscard]] AlphaProfile alpha_profile(const ScdMatrix& scd, std::size_t window_index = 0);

// estimate_scd + alpha_profile for one cyclic frequency.
[[nodiscard]] double profile_at(const SampleBuffer& window, const ScdConfig& cfg, int alpha_bin);

}  // namespace cycdet
