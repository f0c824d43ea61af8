#include "swapsim/scenario.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace swapsim {

ScenarioConfig ScenarioConfig::reference() {
  ScenarioConfig cfg;
  cfg.source_a = SourceSpec{};
  cfg.source_b = SourceSpec{};
  cfg.overlap_mu = 0.82;  // calibrated against the 77% dip
  cfg.analyzer_a = AnalyzerSpec{};
  cfg.analyzer_b = AnalyzerSpec{};
  cfg.station_sc = DetectorModel::superconducting("station_sc");
  cfg.station_apd = DetectorModel::station_apd("station_apd");
  cfg.analyzer_det_a = DetectorModel::analyzer_apd("analyzer_a");
  cfg.analyzer_det_b = DetectorModel::analyzer_apd("analyzer_b");
  return cfg;
}

ScenarioConfig ScenarioConfig::bench() {
  ScenarioConfig cfg = reference();
  // Same timing physics, losses stripped and rate lowered so full_stream runs
  // produce useful 4-fold statistics in fractions of a second.
  for (SourceSpec* s : {&cfg.source_a, &cfg.source_b}) {
    s->conversion_efficiency_per_nm = 5.0e-8;
    s->filter_transmission = Probability::of(1.0);
    s->coupling_efficiency = Probability::of(1.0);
  }
  cfg.analyzer_a.insertion_transmission = Probability::of(1.0);
  cfg.analyzer_b.insertion_transmission = Probability::of(1.0);
  for (DetectorModel* d :
       {&cfg.station_sc, &cfg.station_apd, &cfg.analyzer_det_a, &cfg.analyzer_det_b}) {
    d->efficiency = Probability::of(1.0);
    d->dark_count_rate = Rate::per_second(0.0);
    d->dark_prob_per_ns = 0.0;
    d->mode = DetectorMode::free_running;
    d->dead_time = Duration::picoseconds(0.0);
  }
  cfg.analyzer_det_a.jitter_fwhm = Duration::picoseconds(100.0);
  cfg.analyzer_det_b.jitter_fwhm = Duration::picoseconds(100.0);
  cfg.run.duration = Duration::seconds(0.25);
  return cfg;
}

double ScenarioConfig::q_a() const {
  return pairs_per_coherence_time(filtered_pair_rate(source_a),
                                  source_a.filtered_packet().coherence_time());
}

double ScenarioConfig::q_b() const {
  return pairs_per_coherence_time(filtered_pair_rate(source_b),
                                  source_b.filtered_packet().coherence_time());
}

Duration ScenarioConfig::bunching_threshold() const {
  return analysis.bunching_threshold.value_or(coherence());
}

Duration ScenarioConfig::tau_bin_center() const {
  return analysis.tau_bin_center.value_or(analyzer_a.path_difference);
}

Duration ScenarioConfig::tau_bin_half_width() const {
  return analysis.tau_bin_half_width.value_or(coherence() / 2.0);
}

Duration ScenarioConfig::interference_window() const {
  // Default: wide enough that every pair able to land inside the recorded
  // analysis bin carries the configured contrast, so the top-hat coherence
  // rule and the post-selection bin select the same events on both the
  // event-level and conditioned paths.
  const std::vector<Duration> jitters = station_jitters();
  return analysis.interference_window.value_or(
      tau_bin_half_width() + combined_jitter_sigma(jitters) * 5.0 + analysis.tdc_resolution);
}

std::vector<Duration> ScenarioConfig::station_jitters() const {
  return {station_sc.jitter_fwhm, station_apd.jitter_fwhm};
}

DetectorRoles ScenarioConfig::roles() const {
  DetectorRoles r;
  r.station_1 = station_sc.id;
  r.station_2 = station_apd.id;
  r.analyzer_a_plus = analyzer_det_a.id + "_plus";
  r.analyzer_a_minus = analyzer_det_a.id + "_minus";
  r.analyzer_b_plus = analyzer_det_b.id + "_plus";
  r.analyzer_b_minus = analyzer_det_b.id + "_minus";
  return r;
}

void ScenarioConfig::validate() const {
  if (!(overlap_mu >= 0.0 && overlap_mu <= 1.0))
    throw std::domain_error("overlap_mu must be in [0,1]");
  // Packet construction and filtered rate enforce the spectral constraints.
  (void)overlap();
  (void)source_b.filtered_packet();
  (void)q_a();
  (void)q_b();
  if (!(analyzer_a.path_difference.ps() > 0.0) || !(analyzer_b.path_difference.ps() > 0.0))
    throw std::domain_error("analyzer path differences must be positive");

  std::set<std::string> ids;
  for (const DetectorModel* d : {&station_sc, &station_apd, &analyzer_det_a, &analyzer_det_b}) {
    if (d->id.empty()) throw std::domain_error("detector id must not be empty");
    if (!ids.insert(d->id).second) throw std::domain_error("duplicate detector id " + d->id);
    if (d->mode == DetectorMode::gated && !(d->gate_width.ps() > 0.0))
      throw std::domain_error("gated detector " + d->id + " needs a positive gate width");
    if (d->jitter_fwhm.ps() < 0.0)
      throw std::domain_error("detector " + d->id + " has negative jitter");
    if (d->dead_time.ps() < 0.0)
      throw std::domain_error("detector " + d->id + " has negative dead time");
    if (d->dark_prob_per_ns < 0.0)
      throw std::domain_error("detector " + d->id + " has negative dark probability");
  }

  if (run.mode == RunMode::full_stream && !(run.duration.ps() > 0.0))
    throw std::domain_error("full_stream runs need a positive duration");
  if (run.mode == RunMode::conditioned && run.target_event_count < 1)
    throw std::domain_error("conditioned runs need target_event_count >= 1");
  if (!(run.memory_budget_pairs > 0.0))
    throw std::domain_error("memory budget must be positive");

  if (!(analysis.window_bsm.ps() > 0.0) || !(analysis.window_outer.ps() > 0.0) ||
      !(analysis.hom_window_outer.ps() > 0.0))
    throw std::domain_error("analysis windows must be positive");
  if (!(analysis.hom_bin_width.ps() > 0.0))
    throw std::domain_error("hom_bin_width must be positive");
  if (!(analysis.hom_span.ps() >= 3.5 * analysis.hom_bin_width.ps()))
    throw std::domain_error("hom_span must cover at least 7 bins");
  if (!(analysis.tdc_resolution.ps() > 0.0))
    throw std::domain_error("tdc_resolution must be positive");
  if (analysis.phase_settings < 5)
    throw std::domain_error("need at least 5 phase settings");
  if (analysis.multipair_mode == MultipairMode::monte_carlo && analysis.multipair_trials < 1000)
    throw std::domain_error("multipair_trials must be at least 1000");
  if (!(bunching_threshold().ps() >= 0.0))
    throw std::domain_error("bunching threshold must be non-negative");
  if (!(tau_bin_half_width().ps() > 0.0))
    throw std::domain_error("tau bin half width must be positive");
  if (!(interference_window().ps() >= 0.0))
    throw std::domain_error("interference window must be non-negative");
  if (tau_bin_center().ps() - tau_bin_half_width().ps() <= bunching_threshold().ps())
    throw std::domain_error("tau bin overlaps the bunching-rejection region");
  if (tau_bin_center().ps() + tau_bin_half_width().ps() >= analysis.window_bsm.ps())
    throw std::domain_error("tau bin extends past the station pairing window");
}

namespace {

Wavelength scale_bandwidth(Wavelength w, double factor) {
  return Wavelength::nanometres(w.nm() * factor);
}

}  // namespace

ScenarioConfig boosted(const ScenarioConfig& config, double factor) {
  if (!(factor > 0.0)) throw std::domain_error("boost factor must be positive");
  ScenarioConfig out = config;
  const double inv = 1.0 / factor;
  for (SourceSpec* s : {&out.source_a, &out.source_b})
    s->filter_bandwidth_fwhm = scale_bandwidth(s->filter_bandwidth_fwhm, factor);
  for (AnalyzerSpec* a : {&out.analyzer_a, &out.analyzer_b})
    a->path_difference = a->path_difference * inv;
  for (DetectorModel* d :
       {&out.station_sc, &out.station_apd, &out.analyzer_det_a, &out.analyzer_det_b}) {
    d->jitter_fwhm = d->jitter_fwhm * inv;
    d->dead_time = d->dead_time * inv;
    d->gate_width = d->gate_width * inv;
    d->gate_delay = d->gate_delay * inv;
    d->dark_count_rate = Rate::per_second(d->dark_count_rate.per_s() * factor);
    d->dark_prob_per_ns = d->dark_prob_per_ns * factor;
  }
  AnalysisSettings& an = out.analysis;
  an.window_bsm = an.window_bsm * inv;
  an.window_outer = an.window_outer * inv;
  an.hom_window_outer = an.hom_window_outer * inv;
  an.hom_bin_width = an.hom_bin_width * inv;
  an.hom_span = an.hom_span * inv;
  an.tdc_resolution = an.tdc_resolution * inv;
  for (std::optional<Duration>* opt :
       {&an.bunching_threshold, &an.tau_bin_center, &an.tau_bin_half_width,
        &an.interference_window}) {
    if (opt->has_value()) *opt = **opt * inv;
  }
  out.run.duration = out.run.duration * inv;
  out.validate();
  return out;
}

std::vector<std::string> assumption_notes(const ScenarioConfig& config) {
  std::ostringstream os;
  const auto line = [&os](auto&&... parts) {
    os.str("");
    (os << ... << parts);
    return os.str();
  };
  std::vector<std::string> notes;
  notes.push_back(line("master_seed=", config.run.master_seed));
  notes.push_back(line("mode=", config.run.mode == RunMode::conditioned ? "conditioned"
                                                                        : "full_stream"));
  notes.push_back(line("overlap_mu=", config.overlap_mu, " (calibrated scalar)"));
  notes.push_back(line("window_bsm_ps=", config.analysis.window_bsm.ps(), " (assumed)"));
  notes.push_back(line("window_outer_ps=", config.analysis.window_outer.ps(), " (assumed)"));
  notes.push_back(line("hom_window_outer_ps=", config.analysis.hom_window_outer.ps(),
                       " (assumed)"));
  notes.push_back(line("tdc_resolution_ps=", config.analysis.tdc_resolution.ps(), " (assumed)"));
  notes.push_back(line("bunching_threshold_ps=", config.bunching_threshold().ps(),
                       config.analysis.bunching_threshold ? "" : " (derived: coherence time)"));
  notes.push_back(line("tau_bin_center_ps=", config.tau_bin_center().ps(),
                       config.analysis.tau_bin_center ? "" : " (derived: analyzer imbalance)"));
  notes.push_back(line("tau_bin_half_width_ps=", config.tau_bin_half_width().ps(),
                       config.analysis.tau_bin_half_width ? "" : " (derived: coherence/2)"));
  notes.push_back(line("interference_window_ps=", config.interference_window().ps(),
                       config.analysis.interference_window
                           ? ""
                           : " (derived: analysis bin plus timing margin)"));
  notes.push_back(line("analyzer_jitter_fwhm_ps=", config.analyzer_det_a.jitter_fwhm.ps(),
                       " (assumed; device value not pinned)"));
  notes.push_back(line("station_gate=", config.station_apd.gate_width.ns(), "ns width, ",
                       config.station_apd.gate_delay.ns(), "ns delay (assumed fiber delay)"));
  notes.push_back("dark counts omitted in conditioned mode (negligible inside windows)");
  return notes;
}

}  // namespace swapsim
