#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "cycdet/error.hpp"
#include "cycdet/io.hpp"

using namespace cycdet;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "cycdet_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("plan json round trip") {
  auto plan = ExperimentPlan::desk();
  plan.snr_db_list = {-12.5, 3.0};
  plan.master_seed = 0xFFFFFFFFFFFFULL;
  plan.scd.taper = Taper::kRectangular;
  plan.fit.joint_refine = false;
  const auto j = io::to_json(plan);
  const auto back = io::plan_from_json(j);
  CHECK(io::to_json(back) == j);
  CHECK(j["alpha0_bin"] == 2730);
  CHECK(j["snr_convention"] == "full sampling bandwidth");
}

TEST_CASE("plan json defaults and errors") {
  const auto plan = io::plan_from_json(io::Json::object());
  CHECK(plan.noise_windows == 1000);
  CHECK_THROWS_AS((void)io::plan_from_json(io::Json::parse(R"({"pf_grid":[0.5,0.1]})")), ConfigError);
  CHECK_THROWS_AS((void)io::plan_from_json(io::Json::parse(R"({"noise_windows":"many"})")), ConfigError);
  CHECK_THROWS_AS((void)io::plan_from_json(io::Json::parse(R"({"signal":{"modulation":"FM"}})")), ConfigError);
  CHECK_THROWS_AS((void)io::plan_from_json(io::Json::parse(R"({"scd":{"taper":"kaiser"}})")), ConfigError);
  CHECK_THROWS_AS((void)io::plan_from_json(io::Json::array()), ConfigError);
}

TEST_CASE("overrides") {
  auto j = io::to_json(ExperimentPlan::desk());
  io::apply_override(j, "noise_windows=250");
  io::apply_override(j, "scd.taper=rectangular");
  io::apply_override(j, "snr_db=[-3, 1]");
  io::apply_override(j, "fit.extra.depth=1");
  const auto plan = io::plan_from_json(j);
  CHECK(plan.noise_windows == 250);
  CHECK(plan.scd.taper == Taper::kRectangular);
  CHECK(plan.snr_db_list == std::vector<double>{-3.0, 1.0});
  CHECK_THROWS_AS(io::apply_override(j, "novalue"), ConfigError);
  CHECK_THROWS_AS(io::apply_override(j, "noise_windows.x=1"), ConfigError);
}

TEST_CASE("fit report json") {
  FitReport r;
  r.params = {-0.0690989, 0.0544038, 0.020947};
  r.log_likelihood = 2468.5;
  r.iterations = 24;
  r.converged = true;
  r.sample_count = 1000;
  r.tol = 1e-9;
  const auto j = io::to_json(r);
  CHECK(j["solver"]["iterations"] == 24);
  CHECK(j["solver"]["tol"] == 1e-9);
  const auto back = io::fit_report_from_json(j);
  CHECK(back.params.kappa == r.params.kappa);
  CHECK(back.params.mu == r.params.mu);
  CHECK(back.params.sigma == r.params.sigma);
  CHECK(back.converged);
  CHECK(back.sample_count == 1000);
  CHECK_THROWS_AS((void)io::fit_report_from_json(io::Json::parse(R"({"kappa":0,"mu":0})")), ConfigError);
  CHECK_THROWS_AS((void)io::fit_report_from_json(io::Json::parse(R"({"kappa":0,"mu":0,"sigma":-1})")), ConfigError);
}

TEST_CASE("signal export is little-endian float64 with a sidecar") {
  const SampleBuffer b({1.0, -0.5, 3.25e-7}, 3e6);
  const auto base = scratch("sig");
  io::write_signal(base, b, io::Json{{"seed", 9}});
  CHECK(fs::file_size(fs::path(base.string() + ".f64")) == 24);
  std::ifstream in(base.string() + ".f64", std::ios::binary);
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  CHECK(bytes[7] == 0x3F);  // 1.0 = 0x3FF0000000000000
  CHECK(bytes[6] == 0xF0);
  const auto back = io::read_signal(base);
  CHECK(std::equal(back.samples().begin(), back.samples().end(), b.samples().begin()));
  CHECK(back.sample_rate_hz() == 3e6);
  const auto meta = io::read_json(base.string() + ".json");
  CHECK(meta["seed"] == 9);
  CHECK(meta["sample_count"] == 3);
}

TEST_CASE("scd export layout") {
  ScdConfig cfg;
  cfg.window_length = 16;
  cfg.smoothing_length = 3;
  cfg.alpha_bins = {0, 4};
  const auto scd = estimate_scd(generate_awgn(16, {1.0, 2}, 16.0), cfg);
  const auto base = scratch("scd");
  io::write_scd(base, scd, cfg);
  CHECK(fs::file_size(fs::path(base.string() + ".bin")) == 16 * 2 * 8);
  std::ifstream in(base.string() + ".bin", std::ios::binary);
  std::vector<float> data(16 * 2 * 2);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * 4));
  // Row 5, column 1 (alpha = 4) sits at float offset (5 * 2 + 1) * 2.
  CHECK(data[(5 * 2 + 1) * 2] == static_cast<float>(scd.value(5, 1).real()));
  CHECK(data[(5 * 2 + 1) * 2 + 1] == static_cast<float>(scd.value(5, 1).imag()));
  // Row 0 is outside the alpha = 4 support and is written as zero.
  CHECK(data[(0 * 2 + 1) * 2] == 0.0f);
  const auto meta = io::read_json(base.string() + ".json");
  CHECK(meta["valid_rows"][1]["row_begin"] == 2);
  CHECK(meta["valid_rows"][1]["row_end"] == 14);
  CHECK(meta["alpha_axis_hz"][1] == 4.0);
}

TEST_CASE("csv formats") {
  CHECK(io::csv_number(0.1234567891234) == "0.123456789");
  CHECK(io::csv_number(2.0) == "2");
  const std::vector<io::ProfileRow> rows{{2e6, 0.05, 0}, {2e6, 0.0625, 1}};
  const auto text = io::profile_csv(rows);
  CHECK(text == "alpha_hz,max_magnitude,window_index\n2000000,0.05,0\n2000000,0.0625,1\n");
  const auto path = scratch("profile.csv");
  io::write_text(path, text);
  CHECK(io::read_samples_csv(path) == std::vector<double>{0.05, 0.0625});
  io::write_text(path, "1.5\n2.5\n\n3.5\n");
  CHECK(io::read_samples_csv(path) == std::vector<double>{1.5, 2.5, 3.5});
  io::write_text(path, "alpha_hz,max_magnitude\n1,abc\n");
  CHECK_THROWS_AS((void)io::read_samples_csv(path), ConfigError);
  CHECK_THROWS_AS((void)io::read_samples_csv(scratch("missing.csv")), IoError);

  RocResult roc;
  roc.rows.push_back({0.01, 0.007, 0.978, 0.9816666667, 0.13695, 1000});
  CHECK(io::roc_csv(roc) ==
        "pf_preset,pf_empirical,pd_theoretical_curve,pd_empirical,threshold,trials\n"
        "0.01,0.007,0.978,0.981666667,0.13695,1000\n");
  const std::vector<Decision> ds{{0.2, 0.1, true, 3, 2730, 2e6}};
  CHECK(io::decisions_csv(ds) == "window_index,statistic,threshold,occupied\n3,0.2,0.1,1\n");
  CHECK(io::roc_filename(-10.0) == "roc_-10.csv");
  CHECK(io::roc_filename(2.5) == "roc_2.5.csv");
}
