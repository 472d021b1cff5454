#include "cycdet/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cycdet/error.hpp"

namespace cycdet::io {
namespace fs = std::filesystem;

namespace {

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  auto bits = std::bit_cast<U>(value);
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

double get_le_f64(const unsigned char* bytes) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::ofstream open_out(const fs::path& path, bool binary = false) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

const char* taper_name(Taper t) { return t == Taper::kHamming ? "hamming" : "rectangular"; }

Taper taper_from(const std::string& name) {
  if (name == "hamming") return Taper::kHamming;
  if (name == "rectangular") return Taper::kRectangular;
  throw ConfigError("unknown taper '" + name + "'");
}

template <class T>
void read_field(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

Json to_json(const SignalSpec& spec) {
  return Json{{"carrier_freq_hz", spec.carrier_freq_hz},
              {"baseband_bandwidth_hz", spec.baseband_bandwidth_hz},
              {"sample_rate_hz", spec.sample_rate_hz},
              {"duration_samples", spec.duration_samples},
              {"modulation", "AM"},
              {"modulation_index", spec.modulation_index}};
}

Json to_json(const ScdConfig& cfg) {
  return Json{{"window_length", cfg.window_length},
              {"taper", taper_name(cfg.taper)},
              {"smoothing_length", cfg.smoothing_length},
              {"effective_smoothing_length", cfg.effective_smoothing()},
              {"alpha_bins", cfg.alpha_bins}};
}

Json to_json(const GevFitOptions& opts) {
  return Json{{"tol", opts.tol},
              {"max_iter", opts.max_iter},
              {"kappa_min", opts.kappa_min},
              {"kappa_max", opts.kappa_max},
              {"joint_refine", opts.joint_refine}};
}

Json to_json(const ExperimentPlan& plan) {
  return Json{{"signal", to_json(plan.signal)},
              {"scd", to_json(plan.scd)},
              {"noise_variance", plan.noise_variance},
              {"noise_windows", plan.noise_windows},
              {"signal_windows", plan.signal_windows},
              {"snr_db", plan.snr_db_list},
              {"snr_convention", "full sampling bandwidth"},
              {"pf_grid", plan.pf_grid},
              {"master_seed", plan.master_seed},
              {"histogram_bins", plan.histogram_bins},
              {"alpha0_bin", plan.alpha0_bin()},
              {"alpha0_hz", plan.alpha0_hz()},
              {"fit", to_json(plan.fit)}};
}

Json to_json(const FitReport& r) {
  return Json{{"kappa", r.params.kappa},
              {"mu", r.params.mu},
              {"sigma", r.params.sigma},
              {"log_likelihood", r.log_likelihood},
              {"converged", r.converged},
              {"sample_count", r.sample_count},
              {"solver", Json{{"tol", r.tol}, {"iterations", r.iterations}}},
              {"note", r.note}};
}

ExperimentPlan plan_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("plan: expected a JSON object");
  ExperimentPlan plan = ExperimentPlan::desk();
  if (j.contains("signal")) {
    const auto& s = j.at("signal");
    read_field(s, "carrier_freq_hz", plan.signal.carrier_freq_hz);
    read_field(s, "baseband_bandwidth_hz", plan.signal.baseband_bandwidth_hz);
    read_field(s, "sample_rate_hz", plan.signal.sample_rate_hz);
    read_field(s, "duration_samples", plan.signal.duration_samples);
    read_field(s, "modulation_index", plan.signal.modulation_index);
    if (s.contains("modulation") && s.at("modulation") != "AM")
      throw ConfigError("plan: only AM modulation is supported");
  }
  if (j.contains("scd")) {
    const auto& s = j.at("scd");
    read_field(s, "window_length", plan.scd.window_length);
    read_field(s, "smoothing_length", plan.scd.smoothing_length);
    read_field(s, "alpha_bins", plan.scd.alpha_bins);
    if (s.contains("taper")) {
      std::string name;
      read_field(s, "taper", name);
      plan.scd.taper = taper_from(name);
    }
  }
  read_field(j, "noise_variance", plan.noise_variance);
  read_field(j, "noise_windows", plan.noise_windows);
  read_field(j, "signal_windows", plan.signal_windows);
  read_field(j, "snr_db", plan.snr_db_list);
  read_field(j, "pf_grid", plan.pf_grid);
  read_field(j, "master_seed", plan.master_seed);
  read_field(j, "histogram_bins", plan.histogram_bins);
  if (j.contains("fit")) {
    const auto& f = j.at("fit");
    read_field(f, "tol", plan.fit.tol);
    read_field(f, "max_iter", plan.fit.max_iter);
    read_field(f, "kappa_min", plan.fit.kappa_min);
    read_field(f, "kappa_max", plan.fit.kappa_max);
    read_field(f, "joint_refine", plan.fit.joint_refine);
  }
  plan.validate();
  return plan;
}

FitReport fit_report_from_json(const Json& j) {
  FitReport r;
  try {
    r.params = {j.at("kappa").get<double>(), j.at("mu").get<double>(), j.at("sigma").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("fit report: ") + e.what());
  }
  read_field(j, "log_likelihood", r.log_likelihood);
  read_field(j, "converged", r.converged);
  read_field(j, "sample_count", r.sample_count);
  read_field(j, "note", r.note);
  if (j.contains("solver")) {
    read_field(j.at("solver"), "tol", r.tol);
    read_field(j.at("solver"), "iterations", r.iterations);
  }
  r.params.validate();
  return r;
}

void apply_override(Json& plan, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &plan;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override '" + assignment + "' has an empty key segment");
    if (!node->is_object()) throw ConfigError("override '" + assignment + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path.string() + " is not valid JSON");
  return j;
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void write_signal(const fs::path& base, const SampleBuffer& buffer, const Json& sidecar) {
  auto data_path = base;
  data_path += ".f64";
  auto out = open_out(data_path, true);
  for (double v : buffer.samples()) put_le(out, v);
  if (!out) throw IoError("write failed: " + data_path.string());
  Json meta = sidecar;
  meta["sample_rate_hz"] = buffer.sample_rate_hz();
  meta["sample_count"] = buffer.size();
  meta["mean_power"] = buffer.mean_power();
  meta["dtype"] = "float64-le";
  auto meta_path = base;
  meta_path += ".json";
  write_json(meta_path, meta);
}

SampleBuffer read_signal(const fs::path& base) {
  auto meta_path = base;
  meta_path += ".json";
  const auto meta = read_json(meta_path);
  auto data_path = base;
  data_path += ".f64";
  std::ifstream in(data_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + data_path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 8 != 0) throw IoError(data_path.string() + ": truncated float64 data");
  std::vector<double> samples(bytes.size() / 8);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = get_le_f64(bytes.data() + 8 * i);
  double fs = 0.0;
  read_field(meta, "sample_rate_hz", fs);
  return SampleBuffer(std::move(samples), fs);
}

void write_scd(const fs::path& base, const ScdMatrix& scd, const ScdConfig& cfg) {
  auto data_path = base;
  data_path += ".bin";
  auto out = open_out(data_path, true);
  for (std::size_t r = 0; r < scd.rows(); ++r) {
    for (std::size_t c = 0; c < scd.cols(); ++c) {
      const auto v = scd.valid(r, c) ? scd.value(r, c) : std::complex<double>{};
      put_le(out, static_cast<float>(v.real()));
      put_le(out, static_cast<float>(v.imag()));
    }
  }
  if (!out) throw IoError("write failed: " + data_path.string());

  // Valid cells of each column form one contiguous run of rows.
  Json valid = Json::array();
  for (std::size_t c = 0; c < scd.cols(); ++c) {
    long first = -1, last = -1;
    for (std::size_t r = 0; r < scd.rows(); ++r) {
      if (!scd.valid(r, c)) continue;
      if (first < 0) first = static_cast<long>(r);
      last = static_cast<long>(r);
    }
    valid.push_back(Json{{"row_begin", first}, {"row_end", last + 1}});
  }
  const auto f = scd.f_axis_hz();
  const auto a = scd.alpha_axis_hz();
  Json meta{{"rows", scd.rows()},
            {"cols", scd.cols()},
            {"layout", "row-major (f, alpha)"},
            {"dtype", "complex64-le"},
            {"f_axis_hz", std::vector<double>(f.begin(), f.end())},
            {"alpha_axis_hz", std::vector<double>(a.begin(), a.end())},
            {"alpha_bins", std::vector<int>(scd.alpha_bins().begin(), scd.alpha_bins().end())},
            {"valid_rows", valid},
            {"config", to_json(cfg)}};
  auto meta_path = base;
  meta_path += ".json";
  write_json(meta_path, meta);
}

std::string profile_csv(std::span<const ProfileRow> rows) {
  std::string out = "alpha_hz,max_magnitude,window_index\n";
  for (const auto& r : rows)
    out += csv_number(r.alpha_hz) + "," + csv_number(r.max_magnitude) + "," + std::to_string(r.window_index) + "\n";
  return out;
}

std::vector<double> read_samples_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t column = 0;
  bool first = true;
  std::vector<double> out;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (first) {
      first = false;
      char* end = nullptr;
      std::strtod(fields.front().c_str(), &end);
      if (end == fields.front().c_str()) {
        for (std::size_t i = 0; i < fields.size(); ++i)
          if (fields[i] == "max_magnitude") column = i;
        continue;
      }
    }
    if (column >= fields.size()) throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": missing column");
    char* end = nullptr;
    const double v = std::strtod(fields[column].c_str(), &end);
    if (end == fields[column].c_str()) throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": not a number");
    out.push_back(v);
  }
  return out;
}

std::string histogram_csv(const HistogramReport& report) {
  std::string out = "bin_left,bin_right,count,density,fitted_pdf\n";
  for (std::size_t b = 0; b < report.bin_counts.size(); ++b) {
    const double mid = 0.5 * (report.bin_edges[b] + report.bin_edges[b + 1]);
    out += csv_number(report.bin_edges[b]) + "," + csv_number(report.bin_edges[b + 1]) + "," +
           std::to_string(report.bin_counts[b]) + "," + csv_number(report.density[b]) + "," +
           csv_number(pdf(mid, report.fit.params)) + "\n";
  }
  return out;
}

std::string roc_csv(const RocResult& roc) {
  std::string out = "pf_preset,pf_empirical,pd_theoretical_curve,pd_empirical,threshold,trials\n";
  for (const auto& r : roc.rows)
    out += csv_number(r.pf_preset) + "," + csv_number(r.pf_empirical) + "," + csv_number(r.pd_theoretical_curve) +
           "," + csv_number(r.pd_empirical) + "," + csv_number(r.threshold) + "," + std::to_string(r.trials) + "\n";
  return out;
}

std::string decisions_csv(std::span<const Decision> decisions) {
  std::string out = "window_index,statistic,threshold,occupied\n";
  for (const auto& d : decisions)
    out += std::to_string(d.window_index) + "," + csv_number(d.statistic) + "," + csv_number(d.threshold) + "," +
           (d.occupied ? "1" : "0") + "\n";
  return out;
}

std::string roc_filename(double snr_db) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", snr_db);
  return std::string("roc_") + buf + ".csv";
}

}  // namespace cycdet::io
