#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "swapsim/errors.hpp"
#include "swapsim/runner.hpp"
#include "swapsim/scenario.hpp"

namespace {

using nlohmann::json;
using namespace swapsim;

struct CommonOptions {
  std::string config_path;
  std::string preset = "reference";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<long> events;
  std::optional<double> duration_s;
  std::string out_dir;
  std::string format = "csv";
};

void add_common_options(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path, "Scenario JSON file");
  cmd->add_option("--preset", opt.preset, "Built-in scenario when no --config is given")
      ->check(CLI::IsMember({"reference", "bench"}));
  cmd->add_option("--seed", opt.seed, "Override run.master_seed");
  cmd->add_option("--mode", opt.mode, "Override run.mode")
      ->check(CLI::IsMember({"full", "full_stream", "conditioned"}));
  cmd->add_option("--events", opt.events, "Override run.target_event_count");
  cmd->add_option("--duration", opt.duration_s, "Override run.duration, in seconds");
  cmd->add_option("--out", opt.out_dir, "Output directory (created if missing)");
  cmd->add_option("--format", opt.format, "Data table format")
      ->check(CLI::IsMember({"csv", "json"}));
}

ScenarioConfig resolve_config(const CommonOptions& opt) {
  ScenarioConfig cfg;
  if (!opt.config_path.empty()) {
    cfg = load_scenario(opt.config_path);
  } else if (opt.preset == "bench") {
    cfg = ScenarioConfig::bench();
  } else {
    cfg = ScenarioConfig::reference();
  }
  if (opt.seed) cfg.run.master_seed = *opt.seed;
  if (opt.mode) {
    cfg.run.mode = (*opt.mode == "conditioned") ? RunMode::conditioned : RunMode::full_stream;
  }
  if (opt.events) cfg.run.target_event_count = *opt.events;
  if (opt.duration_s) cfg.run.duration = Duration::seconds(*opt.duration_s);
  cfg.validate();
  return cfg;
}

std::filesystem::path prepare_out_dir(const CommonOptions& opt) {
  std::filesystem::path dir(opt.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

json common_header(const char* command, const ScenarioConfig& cfg) {
  json j;
  j["schema_version"] = 1;
  j["command"] = command;
  j["mode"] = cfg.run.mode == RunMode::conditioned ? "conditioned" : "full_stream";
  j["master_seed"] = cfg.run.master_seed;
  j["assumptions"] = assumption_notes(cfg);
  return j;
}

void emit(const json& summary, const CommonOptions& opt, const char* file_name) {
  if (!opt.out_dir.empty()) {
    std::ofstream out(prepare_out_dir(opt) / file_name);
    out << summary.dump(2) << "\n";
  }
  std::cout << summary.dump(2) << "\n";
}

json fit_to_json(const DipFit& fit) {
  return json{{"visibility", fit.visibility},       {"visibility_err", fit.visibility_err},
              {"fwhm_ps", fit.fwhm_ps},             {"fwhm_err_ps", fit.fwhm_err_ps},
              {"baseline", fit.baseline},           {"baseline_err", fit.baseline_err},
              {"chi2", fit.chi2},                   {"iterations", fit.iterations},
              {"converged", fit.converged}};
}

json fit_to_json(const FringeFit& fit) {
  return json{{"visibility", fit.visibility},
              {"visibility_err", fit.visibility_err},
              {"phase_offset", fit.phase_offset},
              {"phase_err", fit.phase_err},
              {"chi2", fit.chi2},
              {"dof", fit.dof}};
}

int run_hom_scan_cmd(const CommonOptions& opt, const std::string& timestamps_path) {
  ScenarioConfig cfg = resolve_config(opt);
  HomScanResult result;
  if (!timestamps_path.empty()) {
    result = analyze_hom_table(cfg, TimestampTable::read_csv(timestamps_path));
  } else {
    result = run_hom_scan(cfg);
  }

  json summary = common_header("hom-scan", cfg);
  summary["histogram_events"] = result.histogram_events;
  summary["candidates"] = result.candidates;
  summary["fit"] = fit_to_json(result.fit);
  summary["predicted"] = {{"visibility", result.predicted_visibility},
                          {"fwhm_ps", result.predicted_fwhm_ps}};
  if (opt.format == "json") {
    summary["histogram"] = {{"bin_width_ps", result.histogram.bin_width_ps},
                            {"lo_ps", result.histogram.lo_ps},
                            {"counts", result.histogram.counts}};
  } else if (!opt.out_dir.empty()) {
    write_histogram_csv(result.histogram, prepare_out_dir(opt) / "hom_histogram.csv",
                        assumption_notes(cfg));
  }
  emit(summary, opt, "hom_scan.json");
  return 0;
}

int run_swap_scan_cmd(const CommonOptions& opt) {
  ScenarioConfig cfg = resolve_config(opt);
  const SwapScanResult result = run_swap_scan(cfg);

  json summary = common_header("swap-scan", cfg);
  json samples = json::array();
  for (const FringeSample& s : result.samples) {
    samples.push_back({{"alpha", s.alpha},
                       {"beta", s.beta},
                       {"r_pp", s.r_pp},
                       {"r_pm", s.r_pm},
                       {"r_mp", s.r_mp},
                       {"r_mm", s.r_mm},
                       {"e", s.e},
                       {"sigma_e", s.sigma_e}});
  }
  summary["samples"] = samples;
  summary["threefold_counts"] = result.threefold_counts;
  summary["fit"] = fit_to_json(result.fit);
  summary["werner"] = {
      {"entangled", result.werner.verdict == EntanglementVerdict::entangled},
      {"isotropic_noise_assumption", result.werner.isotropic_noise_assumption}};
  summary["flatness"] = {{"chi2", result.flatness.chi2},
                         {"p_value", result.flatness.p_value},
                         {"dof", result.flatness.dof}};
  summary["predicted"] = {
      {"visibility", result.predicted.value},
      {"temporal_factor", result.predicted.temporal_factor},
      {"multipair_factor", result.predicted.multipair_factor},
      {"multipair_mode",
       result.predicted.mode == MultipairMode::analytic ? "analytic" : "monte_carlo"}};
  if (opt.format == "csv" && !opt.out_dir.empty()) {
    write_fringe_csv(result.samples, prepare_out_dir(opt) / "fringe.csv",
                     assumption_notes(cfg));
  }
  emit(summary, opt, "swap_scan.json");
  return 0;
}

int run_rate_budget_cmd(const CommonOptions& opt) {
  ScenarioConfig cfg = resolve_config(opt);
  const RateBudget budget = rate_budget(cfg);

  json summary = common_header("rate-budget", cfg);
  json stages = json::array();
  for (const RateStage& s : budget.stages) {
    stages.push_back({{"label", s.label},
                      {"factor", s.factor},
                      {"rate_per_s", s.rate_per_s},
                      {"assumed", s.assumed}});
  }
  summary["stages"] = stages;
  summary["twofold_rate_per_s"] = budget.twofold_rate_per_s;
  summary["fourfold_rate_per_s"] = budget.fourfold_rate_per_s;
  summary["fourfold_per_hour"] = budget.fourfold_per_hour();
  summary["unmodeled"] = budget.unmodeled;
  if (opt.format == "csv" && !opt.out_dir.empty()) {
    std::ofstream out(prepare_out_dir(opt) / "rate_budget.csv");
    out << "label,factor,rate_per_s,assumed\n";
    for (const RateStage& s : budget.stages) {
      std::string label = s.label;
      for (char& c : label) {
        if (c == ',') c = ';';
      }
      out << label << "," << s.factor << "," << s.rate_per_s << ","
          << (s.assumed ? 1 : 0) << "\n";
    }
  }
  emit(summary, opt, "rate_budget.json");
  return 0;
}

int run_oracle_check_cmd(const CommonOptions& opt, double bin_ps, double span_ps) {
  ScenarioConfig cfg = resolve_config(opt);
  OracleGrid grid;
  if (bin_ps > 0.0) grid.bin_width = Duration::picoseconds(bin_ps);
  if (span_ps > 0.0) grid.span = Duration::picoseconds(span_ps);
  const OracleCheckReport report = oracle_check(grid, cfg);

  json summary = common_header("oracle-check", cfg);
  summary["tolerance"] = report.tolerance;
  summary["max_deviation_cross"] = report.max_deviation_cross;
  summary["max_deviation_dip"] = report.max_deviation_dip;
  summary["max_deviation_partial"] = report.max_deviation_partial;
  summary["pass"] = report.pass;
  json rows = json::array();
  for (const OracleCheckRow& r : report.rows) {
    rows.push_back({{"delta_ps", r.delta_ps},
                    {"oracle_cross", r.oracle_cross},
                    {"oracle_same", r.oracle_same},
                    {"closed_form_cross", r.closed_form_cross},
                    {"convolved_cross", r.convolved_cross},
                    {"closed_form_dip", r.closed_form_dip}});
  }
  summary["rows"] = rows;
  if (opt.format == "csv" && !opt.out_dir.empty()) {
    std::ofstream out(prepare_out_dir(opt) / "oracle_check.csv");
    out << "delta_ps,oracle_cross,oracle_same,closed_form_cross,convolved_cross,"
           "closed_form_dip\n";
    for (const OracleCheckRow& r : report.rows) {
      out << r.delta_ps << "," << r.oracle_cross << "," << r.oracle_same << ","
          << r.closed_form_cross << "," << r.convolved_cross << "," << r.closed_form_dip
          << "\n";
    }
  }
  emit(summary, opt, "oracle_check.json");
  return report.pass ? 0 : 1;
}

int run_simulate_cmd(const CommonOptions& opt) {
  ScenarioConfig cfg = resolve_config(opt);
  TimestampTable table;
  long candidates = 0;
  if (cfg.run.mode == RunMode::conditioned) {
    table = conditioned_hom_table(cfg, cfg.run.target_event_count, &candidates);
  } else {
    table = simulate_timestamps(cfg);
  }

  json summary = common_header("simulate", cfg);
  summary["rows"] = table.rows().size();
  summary["candidates"] = candidates;
  if (!opt.out_dir.empty()) {
    const auto path = prepare_out_dir(opt) / "timestamps.csv";
    table.write_csv(path);
    summary["timestamps"] = path.string();
  }
  emit(summary, opt, "simulate.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale simulator for continuous-wave entanglement swapping"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string timestamps_path;
  double oracle_bin_ps = 0.0;
  double oracle_span_ps = 0.0;

  CLI::App* hom = app.add_subcommand("hom-scan", "Two-photon dip scan and fit");
  add_common_options(hom, opt);
  hom->add_option("--timestamps", timestamps_path,
                  "Analyze an existing timestamp CSV instead of simulating");

  CLI::App* swap = app.add_subcommand("swap-scan", "Phase-settings fringe scan and fit");
  add_common_options(swap, opt);

  CLI::App* budget = app.add_subcommand("rate-budget", "Multiplicative detection rate chain");
  add_common_options(budget, opt);

  CLI::App* oracle = app.add_subcommand("oracle-check",
                                        "Brute-force amplitude check of the dip closed forms");
  add_common_options(oracle, opt);
  oracle->add_option("--oracle-bin-ps", oracle_bin_ps, "Oracle grid bin width in ps");
  oracle->add_option("--oracle-span-ps", oracle_span_ps, "Oracle grid span in ps");

  CLI::App* simulate = app.add_subcommand("simulate", "Write the raw timestamp table");
  add_common_options(simulate, opt);

  try {
    app.parse(argc, argv);
    if (hom->parsed()) return run_hom_scan_cmd(opt, timestamps_path);
    if (swap->parsed()) return run_swap_scan_cmd(opt);
    if (budget->parsed()) return run_rate_budget_cmd(opt);
    if (oracle->parsed()) return run_oracle_check_cmd(opt, oracle_bin_ps, oracle_span_ps);
    if (simulate->parsed()) return run_simulate_cmd(opt);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const GuardError& e) {
    std::cerr << "guard: " << e.what() << "\n";
    return 4;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
