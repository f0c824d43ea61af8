#include <fstream>
#include <initializer_list>
#include <string>

#include "json.hpp"
#include "swapsim/errors.hpp"
#include "swapsim/scenario.hpp"

namespace swapsim {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

void check_keys(const json& obj, const std::string& context,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(context + " must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + context);
  }
}

const json& require(const json& obj, const std::string& context, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(context + " is missing '" + key + "'");
  return *it;
}

double require_number(const json& obj, const std::string& context, const char* key) {
  const json& v = require(obj, context, key);
  if (!v.is_number()) throw ConfigError(context + "." + key + " must be a number");
  return v.get<double>();
}

// Physical quantities are {"value": <number>, "unit": <string>} pairs.
double unit_value(const json& j, const std::string& context) {
  check_keys(j, context, {"value", "unit"});
  return require_number(j, context, "value");
}

std::string unit_name(const json& j, const std::string& context) {
  const json& u = require(j, context, "unit");
  if (!u.is_string()) throw ConfigError(context + ".unit must be a string");
  return u.get<std::string>();
}

Duration parse_duration(const json& j, const std::string& context) {
  const double v = unit_value(j, context);
  const std::string u = unit_name(j, context);
  if (u == "ps") return Duration::picoseconds(v);
  if (u == "ns") return Duration::nanoseconds(v);
  if (u == "us") return Duration::microseconds(v);
  if (u == "ms") return Duration::seconds(v * 1e-3);
  if (u == "s") return Duration::seconds(v);
  throw ConfigError(context + ": unknown time unit '" + u + "'");
}

Wavelength parse_wavelength(const json& j, const std::string& context) {
  const double v = unit_value(j, context);
  const std::string u = unit_name(j, context);
  if (u == "pm") return Wavelength::picometres(v);
  if (u == "nm") return Wavelength::nanometres(v);
  if (u == "um") return Wavelength::micrometres(v);
  throw ConfigError(context + ": unknown wavelength unit '" + u + "'");
}

Power parse_power(const json& j, const std::string& context) {
  const double v = unit_value(j, context);
  const std::string u = unit_name(j, context);
  if (u == "uW") return Power::microwatts(v);
  if (u == "mW") return Power::milliwatts(v);
  if (u == "W") return Power::watts(v);
  throw ConfigError(context + ": unknown power unit '" + u + "'");
}

Rate parse_rate(const json& j, const std::string& context) {
  const double v = unit_value(j, context);
  const std::string u = unit_name(j, context);
  if (u == "per_s") return Rate::per_second(v);
  throw ConfigError(context + ": unknown rate unit '" + u + "'");
}

json dump_duration(Duration d) { return {{"value", d.ps()}, {"unit", "ps"}}; }
json dump_wavelength(Wavelength w) { return {{"value", w.nm()}, {"unit", "nm"}}; }
json dump_power(Power p) { return {{"value", p.mW()}, {"unit", "mW"}}; }
json dump_rate(Rate r) { return {{"value", r.per_s()}, {"unit", "per_s"}}; }

SourceSpec parse_source(const json& j, const std::string& context) {
  check_keys(j, context,
             {"pump_power", "pump_wavelength", "conversion_efficiency_per_nm",
              "phase_matched_bandwidth", "filter_center", "filter_bandwidth_fwhm",
              "filter_lineshape", "filter_transmission", "coupling_efficiency"});
  SourceSpec s;
  s.pump_power = parse_power(require(j, context, "pump_power"), context + ".pump_power");
  s.pump_wavelength =
      parse_wavelength(require(j, context, "pump_wavelength"), context + ".pump_wavelength");
  s.conversion_efficiency_per_nm = require_number(j, context, "conversion_efficiency_per_nm");
  if (!(s.conversion_efficiency_per_nm >= 0.0))
    throw ConfigError(context + ".conversion_efficiency_per_nm must be non-negative");
  s.phase_matched_bandwidth = parse_wavelength(require(j, context, "phase_matched_bandwidth"),
                                               context + ".phase_matched_bandwidth");
  s.filter_center =
      parse_wavelength(require(j, context, "filter_center"), context + ".filter_center");
  s.filter_bandwidth_fwhm = parse_wavelength(require(j, context, "filter_bandwidth_fwhm"),
                                             context + ".filter_bandwidth_fwhm");
  const std::string shape = require(j, context, "filter_lineshape").get<std::string>();
  if (shape == "gaussian") {
    s.filter_lineshape = Lineshape::gaussian;
  } else if (shape == "lorentzian") {
    s.filter_lineshape = Lineshape::lorentzian;
  } else {
    throw ConfigError(context + ".filter_lineshape must be gaussian or lorentzian");
  }
  s.filter_transmission = Probability::of(require_number(j, context, "filter_transmission"));
  s.coupling_efficiency = Probability::of(require_number(j, context, "coupling_efficiency"));
  return s;
}

json dump_source(const SourceSpec& s) {
  return {{"pump_power", dump_power(s.pump_power)},
          {"pump_wavelength", dump_wavelength(s.pump_wavelength)},
          {"conversion_efficiency_per_nm", s.conversion_efficiency_per_nm},
          {"phase_matched_bandwidth", dump_wavelength(s.phase_matched_bandwidth)},
          {"filter_center", dump_wavelength(s.filter_center)},
          {"filter_bandwidth_fwhm", dump_wavelength(s.filter_bandwidth_fwhm)},
          {"filter_lineshape", s.filter_lineshape == Lineshape::gaussian ? "gaussian" : "lorentzian"},
          {"filter_transmission", s.filter_transmission.value()},
          {"coupling_efficiency", s.coupling_efficiency.value()}};
}

AnalyzerSpec parse_analyzer(const json& j, const std::string& context) {
  check_keys(j, context, {"path_difference", "phase", "insertion_transmission"});
  AnalyzerSpec a;
  a.path_difference =
      parse_duration(require(j, context, "path_difference"), context + ".path_difference");
  a.phase = require_number(j, context, "phase");
  a.insertion_transmission =
      Probability::of(require_number(j, context, "insertion_transmission"));
  return a;
}

json dump_analyzer(const AnalyzerSpec& a) {
  return {{"path_difference", dump_duration(a.path_difference)},
          {"phase", a.phase},
          {"insertion_transmission", a.insertion_transmission.value()}};
}

DetectorModel parse_detector(const json& j, const std::string& context) {
  check_keys(j, context,
             {"id", "efficiency", "jitter_fwhm", "dark_count_rate", "dark_prob_per_ns", "mode",
              "gate_width", "gate_delay", "dead_time"});
  DetectorModel d;
  d.id = require(j, context, "id").get<std::string>();
  d.efficiency = Probability::of(require_number(j, context, "efficiency"));
  d.jitter_fwhm = parse_duration(require(j, context, "jitter_fwhm"), context + ".jitter_fwhm");
  const std::string mode = require(j, context, "mode").get<std::string>();
  if (mode == "free_running") {
    d.mode = DetectorMode::free_running;
  } else if (mode == "gated") {
    d.mode = DetectorMode::gated;
  } else {
    throw ConfigError(context + ".mode must be free_running or gated");
  }
  if (j.contains("dark_count_rate"))
    d.dark_count_rate =
        parse_rate(j.at("dark_count_rate"), context + ".dark_count_rate");
  if (j.contains("dark_prob_per_ns")) {
    d.dark_prob_per_ns = require_number(j, context, "dark_prob_per_ns");
    if (d.dark_prob_per_ns < 0.0)
      throw ConfigError(context + ".dark_prob_per_ns must be non-negative");
  }
  if (j.contains("gate_width"))
    d.gate_width = parse_duration(j.at("gate_width"), context + ".gate_width");
  if (j.contains("gate_delay"))
    d.gate_delay = parse_duration(j.at("gate_delay"), context + ".gate_delay");
  d.dead_time = parse_duration(require(j, context, "dead_time"), context + ".dead_time");
  return d;
}

json dump_detector(const DetectorModel& d) {
  json j{{"id", d.id},
         {"efficiency", d.efficiency.value()},
         {"jitter_fwhm", dump_duration(d.jitter_fwhm)},
         {"mode", d.mode == DetectorMode::free_running ? "free_running" : "gated"},
         {"dead_time", dump_duration(d.dead_time)}};
  if (d.mode == DetectorMode::free_running) {
    j["dark_count_rate"] = dump_rate(d.dark_count_rate);
  } else {
    j["dark_prob_per_ns"] = d.dark_prob_per_ns;
    j["gate_width"] = dump_duration(d.gate_width);
    j["gate_delay"] = dump_duration(d.gate_delay);
  }
  return j;
}

RunSettings parse_run(const json& j, const std::string& context) {
  check_keys(j, context,
             {"mode", "duration", "target_event_count", "master_seed", "memory_budget_pairs"});
  RunSettings r;
  const std::string mode = require(j, context, "mode").get<std::string>();
  if (mode == "full_stream" || mode == "full") {
    r.mode = RunMode::full_stream;
  } else if (mode == "conditioned") {
    r.mode = RunMode::conditioned;
  } else {
    throw ConfigError(context + ".mode must be full_stream or conditioned");
  }
  if (j.contains("duration")) r.duration = parse_duration(j.at("duration"), context + ".duration");
  if (j.contains("target_event_count")) {
    if (!j.at("target_event_count").is_number_integer())
      throw ConfigError(context + ".target_event_count must be an integer");
    r.target_event_count = j.at("target_event_count").get<long>();
  }
  if (j.contains("master_seed")) {
    if (!j.at("master_seed").is_number_unsigned() && !j.at("master_seed").is_number_integer())
      throw ConfigError(context + ".master_seed must be an unsigned integer");
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
  }
  if (j.contains("memory_budget_pairs"))
    r.memory_budget_pairs = require_number(j, context, "memory_budget_pairs");
  return r;
}

json dump_run(const RunSettings& r) {
  return {{"mode", r.mode == RunMode::full_stream ? "full_stream" : "conditioned"},
          {"duration", dump_duration(r.duration)},
          {"target_event_count", r.target_event_count},
          {"master_seed", r.master_seed},
          {"memory_budget_pairs", r.memory_budget_pairs}};
}

AnalysisSettings parse_analysis(const json& j, const std::string& context) {
  check_keys(j, context,
             {"window_bsm", "window_outer", "hom_window_outer", "hom_bin_width", "hom_span",
              "bunching_threshold", "tau_bin_center", "tau_bin_half_width", "interference_window",
              "tdc_resolution", "phase_settings", "fixed_alpha", "multipair_mode",
              "multipair_trials"});
  AnalysisSettings a;
  const auto opt_duration = [&](const char* key, auto setter) {
    if (j.contains(key)) setter(parse_duration(j.at(key), context + "." + key));
  };
  opt_duration("window_bsm", [&](Duration d) { a.window_bsm = d; });
  opt_duration("window_outer", [&](Duration d) { a.window_outer = d; });
  opt_duration("hom_window_outer", [&](Duration d) { a.hom_window_outer = d; });
  opt_duration("hom_bin_width", [&](Duration d) { a.hom_bin_width = d; });
  opt_duration("hom_span", [&](Duration d) { a.hom_span = d; });
  opt_duration("bunching_threshold", [&](Duration d) { a.bunching_threshold = d; });
  opt_duration("tau_bin_center", [&](Duration d) { a.tau_bin_center = d; });
  opt_duration("tau_bin_half_width", [&](Duration d) { a.tau_bin_half_width = d; });
  opt_duration("interference_window", [&](Duration d) { a.interference_window = d; });
  opt_duration("tdc_resolution", [&](Duration d) { a.tdc_resolution = d; });
  if (j.contains("phase_settings")) {
    if (!j.at("phase_settings").is_number_integer())
      throw ConfigError(context + ".phase_settings must be an integer");
    a.phase_settings = j.at("phase_settings").get<int>();
  }
  if (j.contains("fixed_alpha")) a.fixed_alpha = require_number(j, context, "fixed_alpha");
  if (j.contains("multipair_mode")) {
    const json& mode_field = j.at("multipair_mode");
    if (!mode_field.is_string())
      throw ConfigError(context + ".multipair_mode must be a string");
    const std::string mode = mode_field.get<std::string>();
    if (mode == "analytic") {
      a.multipair_mode = MultipairMode::analytic;
    } else if (mode == "monte_carlo") {
      a.multipair_mode = MultipairMode::monte_carlo;
    } else {
      throw ConfigError(context + ".multipair_mode must be 'analytic' or 'monte_carlo'");
    }
  }
  if (j.contains("multipair_trials")) {
    if (!j.at("multipair_trials").is_number_integer())
      throw ConfigError(context + ".multipair_trials must be an integer");
    a.multipair_trials = j.at("multipair_trials").get<long>();
  }
  return a;
}

json dump_analysis(const AnalysisSettings& a) {
  json j{{"window_bsm", dump_duration(a.window_bsm)},
         {"window_outer", dump_duration(a.window_outer)},
         {"hom_window_outer", dump_duration(a.hom_window_outer)},
         {"hom_bin_width", dump_duration(a.hom_bin_width)},
         {"hom_span", dump_duration(a.hom_span)},
         {"tdc_resolution", dump_duration(a.tdc_resolution)},
         {"phase_settings", a.phase_settings},
         {"fixed_alpha", a.fixed_alpha},
         {"multipair_mode",
          a.multipair_mode == MultipairMode::analytic ? "analytic" : "monte_carlo"},
         {"multipair_trials", a.multipair_trials}};
  if (a.bunching_threshold) j["bunching_threshold"] = dump_duration(*a.bunching_threshold);
  if (a.tau_bin_center) j["tau_bin_center"] = dump_duration(*a.tau_bin_center);
  if (a.tau_bin_half_width) j["tau_bin_half_width"] = dump_duration(*a.tau_bin_half_width);
  if (a.interference_window) j["interference_window"] = dump_duration(*a.interference_window);
  return j;
}

ScenarioConfig parse_scenario(const json& j) {
  check_keys(j, "config",
             {"schema_version", "source_a", "source_b", "overlap_mu", "analyzer_a", "analyzer_b",
              "detectors", "run", "analysis"});
  const json& version = require(j, "config", "schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion)
    throw ConfigError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) +
                      ")");
  ScenarioConfig cfg;
  cfg.source_a = parse_source(require(j, "config", "source_a"), "source_a");
  cfg.source_b = parse_source(require(j, "config", "source_b"), "source_b");
  cfg.overlap_mu = require_number(j, "config", "overlap_mu");
  cfg.analyzer_a = parse_analyzer(require(j, "config", "analyzer_a"), "analyzer_a");
  cfg.analyzer_b = parse_analyzer(require(j, "config", "analyzer_b"), "analyzer_b");
  const json& dets = require(j, "config", "detectors");
  check_keys(dets, "detectors", {"station_sc", "station_apd", "analyzer_a", "analyzer_b"});
  cfg.station_sc = parse_detector(require(dets, "detectors", "station_sc"),
                                  "detectors.station_sc");
  cfg.station_apd = parse_detector(require(dets, "detectors", "station_apd"),
                                   "detectors.station_apd");
  cfg.analyzer_det_a = parse_detector(require(dets, "detectors", "analyzer_a"),
                                      "detectors.analyzer_a");
  cfg.analyzer_det_b = parse_detector(require(dets, "detectors", "analyzer_b"),
                                      "detectors.analyzer_b");
  cfg.run = parse_run(require(j, "config", "run"), "run");
  cfg.analysis = parse_analysis(require(j, "config", "analysis"), "analysis");
  try {
    cfg.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

json dump_scenario(const ScenarioConfig& cfg) {
  return {{"schema_version", kSchemaVersion},
          {"source_a", dump_source(cfg.source_a)},
          {"source_b", dump_source(cfg.source_b)},
          {"overlap_mu", cfg.overlap_mu},
          {"analyzer_a", dump_analyzer(cfg.analyzer_a)},
          {"analyzer_b", dump_analyzer(cfg.analyzer_b)},
          {"detectors",
           {{"station_sc", dump_detector(cfg.station_sc)},
            {"station_apd", dump_detector(cfg.station_apd)},
            {"analyzer_a", dump_detector(cfg.analyzer_det_a)},
            {"analyzer_b", dump_detector(cfg.analyzer_det_b)}}},
          {"run", dump_run(cfg.run)},
          {"analysis", dump_analysis(cfg.analysis)}};
}

}  // namespace

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse failure in " + path.string() + ": " + e.what());
  }
  try {
    return parse_scenario(j);
  } catch (const json::exception& e) {
    throw ConfigError("config structure error in " + path.string() + ": " + e.what());
  }
}

void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << dump_scenario(config).dump(2) << '\n';
}

}  // namespace swapsim
