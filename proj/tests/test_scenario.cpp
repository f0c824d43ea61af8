#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "swapsim/errors.hpp"
#include "swapsim/scenario.hpp"

using namespace swapsim;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

}  // namespace

TEST_CASE("reference scenario validates and carries the frozen pair density") {
  const ScenarioConfig cfg = ScenarioConfig::reference();
  cfg.validate();
  CHECK(cfg.q_a() == doctest::Approx(0.014065882368596882).epsilon(1e-12));
  CHECK(cfg.q_b() == cfg.q_a());
  CHECK(cfg.coherence().ps() == doctest::Approx(358.2070076836242).epsilon(1e-12));
  CHECK(cfg.overlap_mu == 0.82);
  const DetectorRoles roles = cfg.roles();
  CHECK(roles.station_1 == "station_sc");
  CHECK(roles.station_2 == "station_apd");
  CHECK(roles.analyzer_a_plus == "analyzer_a_plus");
  CHECK(roles.analyzer_b_minus == "analyzer_b_minus");
}

TEST_CASE("bench scenario keeps the timing physics but strips losses") {
  const ScenarioConfig cfg = ScenarioConfig::bench();
  cfg.validate();
  CHECK(cfg.q_a() == doctest::Approx(0.0014065882368596877).epsilon(1e-12));
  CHECK(cfg.coherence().ps() == ScenarioConfig::reference().coherence().ps());
  CHECK(cfg.station_sc.efficiency.value() == 1.0);
  CHECK(cfg.station_apd.mode == DetectorMode::free_running);
  CHECK(cfg.analyzer_a.insertion_transmission.value() == 1.0);
  CHECK(cfg.station_sc.dark_count_rate.per_s() == 0.0);
}

TEST_CASE("derived analysis defaults track the configured physics") {
  const ScenarioConfig cfg = ScenarioConfig::reference();
  CHECK(cfg.bunching_threshold().ps() == cfg.coherence().ps());
  CHECK(cfg.tau_bin_center().ps() == 1200.0);
  CHECK(cfg.tau_bin_half_width().ps() == cfg.coherence().ps() / 2.0);
  const double sigma_j = combined_jitter_sigma(cfg.station_jitters()).ps();
  CHECK(cfg.interference_window().ps() ==
        doctest::Approx(cfg.tau_bin_half_width().ps() + 5.0 * sigma_j + 4.0).epsilon(1e-12));

  ScenarioConfig overridden = cfg;
  overridden.analysis.bunching_threshold = Duration::picoseconds(300.0);
  overridden.analysis.tau_bin_center = Duration::picoseconds(1100.0);
  overridden.analysis.tau_bin_half_width = Duration::picoseconds(150.0);
  overridden.analysis.interference_window = Duration::picoseconds(200.0);
  overridden.validate();
  CHECK(overridden.bunching_threshold().ps() == 300.0);
  CHECK(overridden.tau_bin_center().ps() == 1100.0);
  CHECK(overridden.tau_bin_half_width().ps() == 150.0);
  CHECK(overridden.interference_window().ps() == 200.0);
}

TEST_CASE("scenario save-load-save is byte idempotent") {
  const auto p1 = temp_file("swapsim_cfg1.json");
  const auto p2 = temp_file("swapsim_cfg2.json");
  ScenarioConfig cfg = ScenarioConfig::reference();
  cfg.run.master_seed = 20260814;
  cfg.analysis.multipair_mode = MultipairMode::monte_carlo;
  cfg.analysis.multipair_trials = 50000;
  cfg.analysis.interference_window = Duration::picoseconds(222.0);
  save_scenario(cfg, p1);
  const ScenarioConfig loaded = load_scenario(p1);
  save_scenario(loaded, p2);
  CHECK(slurp(p1) == slurp(p2));
  CHECK(loaded.run.master_seed == 20260814);
  CHECK(loaded.analysis.multipair_mode == MultipairMode::monte_carlo);
  CHECK(loaded.analysis.multipair_trials == 50000);
  CHECK(loaded.analysis.interference_window.has_value());
  CHECK(loaded.interference_window().ps() == 222.0);
  CHECK(loaded.q_a() == cfg.q_a());
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("optional analysis fields stay absent through a round trip") {
  const auto p = temp_file("swapsim_cfg3.json");
  save_scenario(ScenarioConfig::reference(), p);
  const ScenarioConfig loaded = load_scenario(p);
  CHECK_FALSE(loaded.analysis.bunching_threshold.has_value());
  CHECK_FALSE(loaded.analysis.tau_bin_center.has_value());
  CHECK_FALSE(loaded.analysis.tau_bin_half_width.has_value());
  CHECK_FALSE(loaded.analysis.interference_window.has_value());
  std::filesystem::remove(p);
}

TEST_CASE("unknown keys and malformed values are rejected") {
  const auto p = temp_file("swapsim_cfg4.json");
  ScenarioConfig cfg = ScenarioConfig::reference();
  save_scenario(cfg, p);
  std::string body = slurp(p);

  spit(p, body.substr(0, body.size() - 2) + ",\"surprise\": 1}\n");
  CHECK_THROWS_AS(load_scenario(p), ConfigError);

  std::string bad_unit = body;
  bad_unit.replace(bad_unit.find("\"unit\": \"ps\""), 12, "\"unit\": \"fortnight\"");
  spit(p, bad_unit);
  CHECK_THROWS_AS(load_scenario(p), ConfigError);

  std::string bad_shape = body;
  bad_shape.replace(bad_shape.find("\"gaussian\""), 10, "\"boxcar\"");
  spit(p, bad_shape);
  CHECK_THROWS_AS(load_scenario(p), ConfigError);

  std::string bad_version = body;
  bad_version.replace(bad_version.find("\"schema_version\": 1"), 19, "\"schema_version\": 9");
  spit(p, bad_version);
  CHECK_THROWS_AS(load_scenario(p), ConfigError);

  spit(p, "{ not json");
  CHECK_THROWS_AS(load_scenario(p), ConfigError);
  CHECK_THROWS_AS(load_scenario(temp_file("swapsim_absent.json")), ConfigError);
  std::filesystem::remove(p);
}

TEST_CASE("the short run-mode alias is accepted") {
  const auto p = temp_file("swapsim_cfg5.json");
  ScenarioConfig cfg = ScenarioConfig::reference();
  cfg.run.mode = RunMode::full_stream;
  save_scenario(cfg, p);
  std::string body = slurp(p);
  body.replace(body.find("\"full_stream\""), 13, "\"full\"");
  spit(p, body);
  CHECK(load_scenario(p).run.mode == RunMode::full_stream);
  std::filesystem::remove(p);
}

TEST_CASE("in-file constraint violations surface as config errors") {
  const auto p = temp_file("swapsim_cfg6.json");
  ScenarioConfig cfg = ScenarioConfig::reference();
  save_scenario(cfg, p);
  std::string body = slurp(p);
  // Push the analysis bin past the station pairing window.
  body.replace(body.find("\"phase_settings\": 13"), 20, "\"phase_settings\": 13,"
               "\"tau_bin_center\": {\"unit\": \"ns\", \"value\": 11.0}");
  spit(p, body);
  CHECK_THROWS_AS(load_scenario(p), ConfigError);
  std::filesystem::remove(p);
}

TEST_CASE("cross-field validation catches inconsistent setups") {
  ScenarioConfig dup = ScenarioConfig::reference();
  dup.station_apd.id = "station_sc";
  CHECK_THROWS_AS(dup.validate(), std::domain_error);

  ScenarioConfig mu = ScenarioConfig::reference();
  mu.overlap_mu = 1.2;
  CHECK_THROWS_AS(mu.validate(), std::domain_error);

  ScenarioConfig few = ScenarioConfig::reference();
  few.analysis.phase_settings = 4;
  CHECK_THROWS_AS(few.validate(), std::domain_error);

  ScenarioConfig narrow = ScenarioConfig::reference();
  narrow.analysis.hom_span = Duration::picoseconds(100.0);
  CHECK_THROWS_AS(narrow.validate(), std::domain_error);

  ScenarioConfig overlap = ScenarioConfig::reference();
  overlap.analysis.tau_bin_center = Duration::picoseconds(500.0);
  CHECK_THROWS_AS(overlap.validate(), std::domain_error);

  ScenarioConfig past_window = ScenarioConfig::reference();
  past_window.analysis.window_bsm = Duration::picoseconds(1300.0);
  CHECK_THROWS_AS(past_window.validate(), std::domain_error);

  ScenarioConfig trials = ScenarioConfig::reference();
  trials.analysis.multipair_mode = MultipairMode::monte_carlo;
  trials.analysis.multipair_trials = 500;
  CHECK_THROWS_AS(trials.validate(), std::domain_error);

  ScenarioConfig hot = ScenarioConfig::reference();
  hot.source_a.filter_bandwidth_fwhm = Wavelength::nanometres(100.0);
  CHECK_THROWS_AS(hot.validate(), std::domain_error);
}

TEST_CASE("time rescaling preserves every dimensionless statistic input") {
  const ScenarioConfig base = ScenarioConfig::reference();
  const ScenarioConfig fast = boosted(base, 1024.0);
  // Pair density per coherence time is the dimensionless knob: bit-exact under
  // power-of-two rescaling.
  CHECK(fast.q_a() == base.q_a());
  CHECK(fast.q_b() == base.q_b());
  CHECK(fast.coherence().ps() * 1024.0 == base.coherence().ps());
  CHECK(fast.analyzer_a.path_difference.ps() * 1024.0 == base.analyzer_a.path_difference.ps());
  CHECK(fast.station_sc.jitter_fwhm.ps() * 1024.0 == base.station_sc.jitter_fwhm.ps());
  CHECK(fast.analysis.tdc_resolution.ps() * 1024.0 == base.analysis.tdc_resolution.ps());
  CHECK(fast.run.duration.ps() * 1024.0 == base.run.duration.ps());
  // Derived windows track the scaled physics without explicit overrides.
  CHECK(fast.tau_bin_center().ps() * 1024.0 == base.tau_bin_center().ps());
  CHECK(fast.tau_bin_half_width().ps() * 1024.0 == base.tau_bin_half_width().ps());
  // Dark rates scale up so darks-per-window is invariant.
  CHECK(fast.station_sc.dark_count_rate.per_s() ==
        base.station_sc.dark_count_rate.per_s() * 1024.0);
  fast.validate();
  CHECK_THROWS_AS(boosted(base, 0.0), std::domain_error);
  CHECK_THROWS_AS(boosted(base, -2.0), std::domain_error);
}

TEST_CASE("assumption notes surface seeds, windows and provenance flags") {
  const ScenarioConfig cfg = ScenarioConfig::reference();
  const auto notes = assumption_notes(cfg);
  auto contains = [&notes](const std::string& needle) {
    for (const auto& n : notes)
      if (n.find(needle) != std::string::npos) return true;
    return false;
  };
  CHECK(contains("master_seed=42"));
  CHECK(contains("overlap_mu=0.82 (calibrated scalar)"));
  CHECK(contains("(assumed)"));
  CHECK(contains("derived: analysis bin plus timing margin"));
  CHECK(contains("dark counts omitted in conditioned mode"));
}
