#include "cycdet/detector.hpp"

#include <cmath>

#include "cycdet/error.hpp"

namespace cycdet {

void DetectorConfig::validate() const {
  if (threshold.has_value() == preset_pf.has_value())
    throw ConfigError("detector: set exactly one of threshold and preset_pf");
  if (threshold && std::isnan(*threshold)) throw ConfigError("detector: threshold is NaN");
  if (preset_pf && !noise_model) throw ConfigError("detector: preset_pf needs a fitted noise model");
  if (alpha0_bin % 2 != 0) throw ConfigError("detector: alpha0 is not on the even-bin grid");
}

double resolve_threshold(const DetectorConfig& cfg) {
  cfg.validate();
  if (cfg.threshold) return *cfg.threshold;
  return threshold_for_pf(*cfg.preset_pf, *cfg.noise_model);
}

Decision detect(const SampleBuffer& window, const DetectorConfig& cfg, std::size_t window_index) {
  Decision d;
  d.threshold = resolve_threshold(cfg);
  d.statistic = profile_at(window, cfg.scd, cfg.alpha0_bin);
  d.occupied = exceeds(d.statistic, d.threshold);
  d.window_index = window_index;
  d.alpha0_bin = cfg.alpha0_bin;
  d.alpha0_hz = static_cast<double>(cfg.alpha0_bin) * window.sample_rate_hz() /
                static_cast<double>(cfg.scd.window_length);
  return d;
}

double theoretical_pf(double threshold, const GevParams& noise_model) { return survival(threshold, noise_model); }

}  // namespace cycdet
