#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cycdet/detector.hpp"
#include "cycdet/gev.hpp"
#include "cycdet/harness.hpp"
#include "cycdet/scd.hpp"
#include "cycdet/siggen.hpp"

namespace cycdet::io {

using Json = nlohmann::ordered_json;

// Numbers in CSV files carry 9 significant digits.
[[nodiscard]] std::string csv_number(double v);

[[nodiscard]] Json to_json(const SignalSpec& spec);
[[nodiscard]] Json to_json(const ScdConfig& cfg);
[[nodiscard]] Json to_json(const GevFitOptions& opts);
[[nodiscard]] Json to_json(const ExperimentPlan& plan);
[[nodiscard]] Json to_json(const FitReport& report);

// Missing keys keep the desk defaults. Throws ConfigError on malformed input.
[[nodiscard]] ExperimentPlan plan_from_json(const Json& j);
[[nodiscard]] FitReport fit_report_from_json(const Json& j);

// Applies "a.b.c=value" overrides to a plan document; values are parsed as
// JSON when possible, otherwise taken as strings.
void apply_override(Json& plan, const std::string& assignment);

[[nodiscard]] Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

// <base>.f64 holds little-endian float64 samples; <base>.json the sidecar.
void write_signal(const std::filesystem::path& base, const SampleBuffer& buffer, const Json& sidecar);
[[nodiscard]] SampleBuffer read_signal(const std::filesystem::path& base);

// <base>.bin holds row-major (f, alpha) complex64 pairs (float32 re, im,
// little-endian, invalid cells zero); <base>.json the axes and config.
void write_scd(const std::filesystem::path& base, const ScdMatrix& scd, const ScdConfig& cfg);

struct ProfileRow {
  double alpha_hz;
  double max_magnitude;
  std::size_t window_index;
};

[[nodiscard]] std::string profile_csv(std::span<const ProfileRow> rows);
// Returns the max_magnitude column, or the first column of a header-less file.
[[nodiscard]] std::vector<double> read_samples_csv(const std::filesystem::path& path);

[[nodiscard]] std::string histogram_csv(const HistogramReport& report);
[[nodiscard]] std::string roc_csv(const RocResult& roc);
[[nodiscard]] std::string decisions_csv(std::span<const Decision> decisions);

// "roc_-10.csv", "roc_0.csv", "roc_2.5.csv".
[[nodiscard]] std::string roc_filename(double snr_db);

}  // namespace cycdet::io
