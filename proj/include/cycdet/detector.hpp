#pragma once

#include <cstddef>
#include <optional>

#include "cycdet/gev.hpp"
#include "cycdet/scd.hpp"
#include "cycdet/siggen.hpp"

namespace cycdet {

// Single-cycle-frequency feature detector. Exactly one of `threshold` and
// `preset_pf` is set; a preset Pf is turned into a threshold through the
// fitted noise model.
struct DetectorConfig {
  int alpha0_bin = 0;
  ScdConfig scd;
  std::optional<double> threshold;
  std::optional<double> preset_pf;
  std::optional<GevParams> noise_model;

  void validate() const;
};

struct Decision {
  double statistic = 0.0;
  double threshold = 0.0;
  bool occupied = false;
  std::size_t window_index = 0;
  int alpha0_bin = 0;
  double alpha0_hz = 0.0;
};

[[nodiscard]] double resolve_threshold(const DetectorConfig& cfg);

// Occupied iff statistic > threshold; a tie is unoccupied.
[[nodiscard]] constexpr bool exceeds(double statistic, double threshold) noexcept { return statistic > threshold; }

[[nodiscard]] Decision detect(const SampleBuffer& window, const DetectorConfig& cfg, std::size_t window_index = 0);

// Pf = P(T > threshold | H0) under the noise model.
[[nodiscard]] double theoretical_pf(double threshold, const GevParams& noise_model);

}  // namespace cycdet
