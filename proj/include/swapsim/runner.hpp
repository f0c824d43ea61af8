#pragma once

#include <string>
#include <vector>

#include "swapsim/coincidence.hpp"
#include "swapsim/detection.hpp"
#include "swapsim/oracle.hpp"
#include "swapsim/scenario.hpp"

namespace swapsim {

// Event-level simulation of one run: emissions, losses, splitter port
// sampling, heralded analyzer outcomes, detection, TDC. Bit-reproducible per
// (config, master_seed).
TimestampTable simulate_timestamps(const ScenarioConfig& config);

// Conditioned-ensemble synthesis: only post-selected heralds are generated,
// with the same downstream table format so both modes share the analysis.
// target_events counts heralds whose analyzer photons both registered.
// candidates_out (optional) reports proposals drawn before acceptance.
TimestampTable conditioned_hom_table(const ScenarioConfig& config, long target_events,
                                     long* candidates_out = nullptr);
TimestampTable conditioned_swap_table(const ScenarioConfig& config, double beta,
                                      long target_events, int setting_index);

struct HomScanResult {
  RunMode mode = RunMode::conditioned;
  Histogram histogram;
  DipFit fit;
  long histogram_events = 0;  // 4-fold events inside the histogram span
  long candidates = 0;        // conditioned mode: proposals before acceptance
  double predicted_visibility = 0.0;
  double predicted_fwhm_ps = 0.0;
};

HomScanResult run_hom_scan(const ScenarioConfig& config);

// Analysis of an externally supplied timestamp table with this scenario's
// windows (same path the simulated modes use).
HomScanResult analyze_hom_table(const ScenarioConfig& config, const TimestampTable& table);

struct SwapScanResult {
  RunMode mode = RunMode::conditioned;
  std::vector<FringeSample> samples;
  std::vector<double> threefold_counts;  // analyzer a '+' arm per setting
  FringeFit fit;
  WernerCheck werner;
  FlatnessResult flatness;
  ConditionalVisibility predicted;
};

SwapScanResult run_swap_scan(const ScenarioConfig& config);

struct RateStage {
  std::string label;
  double factor = 1.0;  // multiplicative, (0,1] except the generation stage
  double rate_per_s = 0.0;
  bool assumed = false;  // no directly quoted value behind this factor
};

struct RateBudget {
  std::vector<RateStage> stages;
  double twofold_rate_per_s = 0.0;
  double fourfold_rate_per_s = 0.0;
  std::vector<std::string> unmodeled;
  double fourfold_per_hour() const { return fourfold_rate_per_s * 3600.0; }
};

// Closed-form multiplicative rate chain from raw pair generation down to
// post-selected 4-fold coincidences.
RateBudget rate_budget(const ScenarioConfig& config);

struct OracleCheckRow {
  double delta_ps = 0.0;
  double oracle_cross = 0.0;
  double oracle_same = 0.0;
  double closed_form_cross = 0.0;
  double convolved_cross = 0.0;  // oracle curve under station jitter
  double closed_form_dip = 0.0;
};

struct OracleCheckReport {
  std::vector<OracleCheckRow> rows;
  double max_deviation_cross = 0.0;   // oracle vs closed form, mu = 1
  double max_deviation_dip = 0.0;     // convolved oracle vs jittered closed form
  double max_deviation_partial = 0.0; // oracle vs closed form, mu = 0.5
  double tolerance = 1e-3;
  bool pass = false;
};

// Delay sweep comparing the brute-force amplitude oracle against the closed
// forms, with and without detector jitter.
OracleCheckReport oracle_check(const OracleGrid& grid, const ScenarioConfig& config,
                               int sweep_points = 41);

}  // namespace swapsim
