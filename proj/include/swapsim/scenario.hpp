#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "swapsim/coincidence.hpp"
#include "swapsim/detection.hpp"
#include "swapsim/interference.hpp"
#include "swapsim/source_model.hpp"
#include "swapsim/units.hpp"

namespace swapsim {

enum class RunMode { full_stream, conditioned };

struct RunSettings {
  RunMode mode = RunMode::conditioned;
  Duration duration = Duration::seconds(1.0);  // full_stream
  long target_event_count = 10000;             // conditioned
  std::uint64_t master_seed = 42;
  // Refuse full_stream runs expected to emit more pairs than this.
  double memory_budget_pairs = 5e7;
};

// Windows and bins of the analysis stage. Optional values default to
// quantities derived from the configured coherence time / analyzers,
// so they track boosted or edited scenarios automatically.
struct AnalysisSettings {
  Duration window_bsm = Duration::nanoseconds(10.0);
  Duration window_outer = Duration::picoseconds(500.0);
  // Wide attach window for the dip scan keeps the 4-fold baseline flat in tau.
  Duration hom_window_outer = Duration::nanoseconds(3.0);
  Duration hom_bin_width = Duration::picoseconds(50.0);
  Duration hom_span = Duration::picoseconds(1500.0);
  std::optional<Duration> bunching_threshold;   // default: coherence time
  std::optional<Duration> tau_bin_center;       // default: analyzer a imbalance
  std::optional<Duration> tau_bin_half_width;   // default: coherence time / 2
  // default: tau bin half width + 5 sigma of combined station jitter + TDC
  // resolution, so every event recordable inside the analysis bin interferes.
  std::optional<Duration> interference_window;
  Duration tdc_resolution = Duration::picoseconds(4.0);
  int phase_settings = 13;
  double fixed_alpha = 0.0;
  // Estimator for the multi-pair contamination factor of the fringe.
  MultipairMode multipair_mode = MultipairMode::analytic;
  long multipair_trials = 200000;
};

struct ScenarioConfig {
  SourceSpec source_a;
  SourceSpec source_b;
  // Cross-source overlap at the joint splitter; same-source photons are
  // mutually indistinguishable by construction.
  double overlap_mu = 0.82;
  AnalyzerSpec analyzer_a;
  AnalyzerSpec analyzer_b;
  DetectorModel station_sc;    // free-running trigger arm
  DetectorModel station_apd;   // gated arm
  DetectorModel analyzer_det_a;  // applied to both ports of analyzer a
  DetectorModel analyzer_det_b;
  RunSettings run;
  AnalysisSettings analysis;

  // Published-experiment defaults.
  static ScenarioConfig reference();
  // Lossless high-rate variant for cross-mode consistency runs.
  static ScenarioConfig bench();

  WavePacket packet() const { return source_a.filtered_packet(); }
  OverlapModel overlap() const { return OverlapModel::from_packet(packet(), overlap_mu); }
  double q_a() const;
  double q_b() const;
  Duration coherence() const { return packet().coherence_time(); }
  Duration bunching_threshold() const;
  Duration tau_bin_center() const;
  Duration tau_bin_half_width() const;
  Duration interference_window() const;
  // Station detector jitters, the inputs to the dip/fringe temporal factor.
  std::vector<Duration> station_jitters() const;
  DetectorRoles roles() const;

  // Throws if any cross-field constraint is violated.
  void validate() const;
};

// Time-rescaled replica: pair rates scaled up by factor (via filter bandwidth),
// every explicit duration scaled down by factor. Dimensionless statistics are
// invariant; wall-clock cost per simulated second drops by factor^2.
ScenarioConfig boosted(const ScenarioConfig& config, double factor);

ScenarioConfig load_scenario(const std::filesystem::path& path);
void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path);

// Declared-assumption lines surfaced in every report header.
std::vector<std::string> assumption_notes(const ScenarioConfig& config);

}  // namespace swapsim
