#include "swapsim/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "swapsim/errors.hpp"
#include "swapsim/source_model.hpp"

namespace swapsim {
namespace {

// Downstream state of one pair beyond emission/survival: splitter port of the
// station photon and routing of the analyzer photon.
struct PairState {
  std::int8_t station_port = -1;  // 0 = trigger arm, 1 = gated arm, -1 = lost
  std::int8_t analyzer_port = -1;
  bool joint_sampled = false;
  double analyzer_arrival_ps = 0.0;
};

double slot_arrival_ps(Slot slot, double t_early_ps, double t_late_ps, double pd_ps) {
  switch (slot) {
    case Slot::early:
      return t_early_ps;
    case Slot::middle:
      return t_late_ps;
    case Slot::late:
      return t_late_ps + pd_ps;
  }
  return t_late_ps;
}

// Station 2-fold triggers for the analyzer detector gates: greedy earliest
// pairing of the two station click streams, trigger time = later click.
std::vector<DetectionRecord> match_station_pairs(const std::vector<DetectionRecord>& first,
                                                 const std::vector<DetectionRecord>& second,
                                                 Duration window) {
  std::vector<DetectionRecord> triggers;
  const double w = window.ps();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < first.size() && j < second.size()) {
    const double t1 = first[i].recorded_time.ps();
    const double t2 = second[j].recorded_time.ps();
    if (t2 < t1 - w) {
      ++j;
    } else if (t2 > t1 + w) {
      ++i;
    } else {
      DetectionRecord trig;
      trig.recorded_time = Duration::picoseconds(std::max(t1, t2));
      trig.true_time = trig.recorded_time;
      triggers.push_back(trig);
      ++i;
      ++j;
    }
  }
  return triggers;
}

MultipairSettings multipair_settings_of(const ScenarioConfig& cfg) {
  MultipairSettings s;
  s.mode = cfg.analysis.multipair_mode;
  s.trials = cfg.analysis.multipair_trials;
  return s;
}

double jitter_sigma_ps(const DetectorModel& d) {
  return d.jitter_fwhm.ps() / constants::fwhm_per_sigma;
}

}  // namespace

TimestampTable simulate_timestamps(const ScenarioConfig& cfg) {
  cfg.validate();

  const Rate rate_a = filtered_pair_rate(cfg.source_a);
  const Rate rate_b = filtered_pair_rate(cfg.source_b);
  const double total_rate = rate_a.per_s() + rate_b.per_s();
  const double expected_pairs = total_rate * cfg.run.duration.s();
  if (expected_pairs > cfg.run.memory_budget_pairs) {
    std::ostringstream msg;
    msg << "expected pair count " << expected_pairs << " exceeds the memory budget of "
        << cfg.run.memory_budget_pairs << " pairs; reduce run.duration below "
        << cfg.run.memory_budget_pairs / total_rate << " s or raise run.memory_budget_pairs";
    throw GuardError(msg.str());
  }

  const std::uint64_t seed = cfg.run.master_seed;

  std::vector<PairEvent> pairs[2];
  {
    RandomStream rng_a(seed, "emission/a");
    pairs[0] = sample_pair_emissions(rate_a, cfg.run.duration, rng_a, 0);
    RandomStream rng_b(seed, "emission/b");
    pairs[1] = sample_pair_emissions(rate_b, cfg.run.duration, rng_b, 1);
  }

  // Passive losses. Detector efficiency is applied inside detect().
  {
    const SourceSpec* sources[2] = {&cfg.source_a, &cfg.source_b};
    const AnalyzerSpec* analyzers[2] = {&cfg.analyzer_a, &cfg.analyzer_b};
    RandomStream rng_loss(seed, "loss");
    for (int s : {0, 1}) {
      const LossChannel coupling{"coupling", sources[s]->coupling_efficiency};
      const LossChannel filter{"filter peak", sources[s]->filter_transmission};
      const LossChannel insertion{"insertion", analyzers[s]->insertion_transmission};
      apply_loss(pairs[s], coupling, PhotonRole::station, rng_loss);
      apply_loss(pairs[s], coupling, PhotonRole::analyzer, rng_loss);
      apply_loss(pairs[s], filter, PhotonRole::station, rng_loss);
      apply_loss(pairs[s], filter, PhotonRole::analyzer, rng_loss);
      apply_loss(pairs[s], insertion, PhotonRole::analyzer, rng_loss);
    }
  }

  std::vector<PairState> state[2] = {std::vector<PairState>(pairs[0].size()),
                                     std::vector<PairState>(pairs[1].size())};

  const OverlapModel overlap = cfg.overlap();
  const double sigma_c_ps = overlap.sigma_c.ps();

  // Splitter output ports of the surviving station photons. Adjacent photons
  // within the pairing radius draw their ports jointly: bunching enhances the
  // same-port share by mu * exp(-delta^2 / 2 sigma_c^2). Photons without a
  // close neighbour split 50/50.
  {
    struct StationRef {
      double t_ps;
      std::uint32_t index;
      std::int8_t source;
    };
    std::vector<StationRef> station;
    station.reserve(pairs[0].size() + pairs[1].size());
    for (int s : {0, 1}) {
      for (std::uint32_t i = 0; i < pairs[s].size(); ++i) {
        if (pairs[s][i].station_alive) {
          station.push_back({pairs[s][i].emission_time.ps(), i, static_cast<std::int8_t>(s)});
        }
      }
    }
    std::sort(station.begin(), station.end(),
              [](const StationRef& x, const StationRef& y) { return x.t_ps < y.t_ps; });

    const double pairing_radius_ps = 6.0 * sigma_c_ps;
    RandomStream rng_ports(seed, "station/ports");
    std::size_t i = 0;
    while (i < station.size()) {
      if (i + 1 < station.size() &&
          station[i + 1].t_ps - station[i].t_ps <= pairing_radius_ps) {
        const double delta = station[i + 1].t_ps - station[i].t_ps;
        const double mu =
            station[i].source == station[i + 1].source ? 1.0 : overlap.mu;
        const double bunch = mu * std::exp(-delta * delta / (2.0 * sigma_c_ps * sigma_c_ps));
        std::int8_t p0;
        std::int8_t p1;
        if (rng_ports.uniform() < 0.5 * (1.0 + bunch)) {
          p0 = p1 = rng_ports.bernoulli(0.5) ? 1 : 0;
        } else {
          p0 = rng_ports.bernoulli(0.5) ? 1 : 0;
          p1 = static_cast<std::int8_t>(1 - p0);
        }
        state[station[i].source][station[i].index].station_port = p0;
        state[station[i + 1].source][station[i + 1].index].station_port = p1;
        i += 2;
      } else {
        state[station[i].source][station[i].index].station_port =
            rng_ports.bernoulli(0.5) ? 1 : 0;
        i += 1;
      }
    }
  }

  const std::vector<Duration> station_jitters = cfg.station_jitters();
  const double v_temporal = dip_visibility(overlap, station_jitters);
  const Duration window = cfg.interference_window();
  const double pd_a_ps = cfg.analyzer_a.path_difference.ps();
  const double pd_b_ps = cfg.analyzer_b.path_difference.ps();

  // Cross-source pair-pairs heralded by cross-port station clicks with a
  // separation matching an analyzer imbalance carry the swapped correlations:
  // their analyzer photons are sampled jointly. All other analyzer photons
  // route independently, which reproduces the joint table's marginals.
  {
    const double band_lo = std::min(pd_a_ps, pd_b_ps) - window.ps();
    const double band_hi = std::max(pd_a_ps, pd_b_ps) + window.ps();
    RandomStream rng_joint(seed, "analyzer/joint");
    const auto eligible = [](const PairEvent& ev, const PairState& st) {
      return ev.analyzer_alive && st.station_port >= 0 && !st.joint_sampled;
    };
    std::size_t lo = 0;
    for (std::size_t ia = 0; ia < pairs[0].size(); ++ia) {
      if (!eligible(pairs[0][ia], state[0][ia])) continue;
      const double ta = pairs[0][ia].emission_time.ps();
      while (lo < pairs[1].size() && pairs[1][lo].emission_time.ps() < ta - band_hi) ++lo;
      for (std::size_t jb = lo;
           jb < pairs[1].size() && pairs[1][jb].emission_time.ps() <= ta + band_hi; ++jb) {
        if (!eligible(pairs[1][jb], state[1][jb])) continue;
        if (state[1][jb].station_port == state[0][ia].station_port) continue;
        const double tb = pairs[1][jb].emission_time.ps();
        if (std::abs(tb - ta) < band_lo) continue;
        const JointOutcomeTable table =
            swapped_pair_probabilities(Duration::picoseconds(tb - ta), cfg.analyzer_a,
                                       cfg.analyzer_b, v_temporal, window);
        const JointOutcomeTable::Outcome out = table.sample(rng_joint);
        const double t_early = std::min(ta, tb);
        const double t_late = std::max(ta, tb);
        PairState& sa = state[0][ia];
        PairState& sb = state[1][jb];
        sa.analyzer_port = out.port_a == PortSign::plus ? 0 : 1;
        sa.analyzer_arrival_ps = slot_arrival_ps(out.slot_a, t_early, t_late, pd_a_ps);
        sa.joint_sampled = true;
        sb.analyzer_port = out.port_b == PortSign::plus ? 0 : 1;
        sb.analyzer_arrival_ps = slot_arrival_ps(out.slot_b, t_early, t_late, pd_b_ps);
        sb.joint_sampled = true;
        break;
      }
    }
  }

  // Route the remaining analyzer photons independently and collect arrival
  // lists per physical detector.
  std::vector<Duration> arr_station[2];
  std::vector<Duration> arr_analyzer[2][2];  // [side][port]
  {
    RandomStream rng_paths(seed, "analyzer/paths");
    const double pd_ps[2] = {pd_a_ps, pd_b_ps};
    for (int s : {0, 1}) {
      for (std::size_t i = 0; i < pairs[s].size(); ++i) {
        const PairEvent& ev = pairs[s][i];
        PairState& st = state[s][i];
        if (st.station_port >= 0) arr_station[st.station_port].push_back(ev.emission_time);
        if (!ev.analyzer_alive) continue;
        if (!st.joint_sampled) {
          st.analyzer_port = rng_paths.bernoulli(0.5) ? 1 : 0;
          const bool long_path = rng_paths.bernoulli(0.5);
          st.analyzer_arrival_ps = ev.emission_time.ps() + (long_path ? pd_ps[s] : 0.0);
        }
        arr_analyzer[s][st.analyzer_port].push_back(
            Duration::picoseconds(st.analyzer_arrival_ps));
      }
    }
    for (auto* arr : {&arr_station[0], &arr_station[1], &arr_analyzer[0][0],
                      &arr_analyzer[0][1], &arr_analyzer[1][0], &arr_analyzer[1][1]}) {
      std::sort(arr->begin(), arr->end());
    }
  }
  pairs[0].clear();
  pairs[0].shrink_to_fit();
  pairs[1].clear();
  pairs[1].shrink_to_fit();

  // Detection. The trigger arm gates the station APD; station 2-folds gate the
  // analyzer detectors when those run gated.
  const double slack_ps = std::max(pd_a_ps, pd_b_ps) + cfg.station_apd.gate_width.ps() +
                          cfg.analysis.window_bsm.ps() + 5000.0;
  const TimeSpan live{Duration::picoseconds(0.0),
                      cfg.run.duration + Duration::picoseconds(slack_ps)};

  RandomStream rng_sc(seed, "detect/" + cfg.station_sc.id);
  const std::vector<DetectionRecord> sc_records =
      detect(arr_station[0], cfg.station_sc, live, nullptr, rng_sc);
  arr_station[0].clear();
  arr_station[0].shrink_to_fit();

  GateList apd_gates;
  const GateList* apd_gates_ptr = nullptr;
  if (cfg.station_apd.mode == DetectorMode::gated) {
    apd_gates = make_gates(sc_records, cfg.station_apd.gate_width, cfg.station_apd.gate_delay);
    apd_gates_ptr = &apd_gates;
  }
  RandomStream rng_apd(seed, "detect/" + cfg.station_apd.id);
  const std::vector<DetectionRecord> apd_records =
      detect(arr_station[1], cfg.station_apd, live, apd_gates_ptr, rng_apd);
  arr_station[1].clear();
  arr_station[1].shrink_to_fit();

  std::vector<DetectionRecord> twofold_triggers;
  if (cfg.analyzer_det_a.mode == DetectorMode::gated ||
      cfg.analyzer_det_b.mode == DetectorMode::gated) {
    twofold_triggers = match_station_pairs(sc_records, apd_records, cfg.analysis.window_bsm);
  }

  const DetectorRoles roles = cfg.roles();
  const std::string port_ids[2][2] = {{roles.analyzer_a_plus, roles.analyzer_a_minus},
                                      {roles.analyzer_b_plus, roles.analyzer_b_minus}};
  const DetectorModel* analyzer_models[2] = {&cfg.analyzer_det_a, &cfg.analyzer_det_b};

  std::vector<DetectorRecords> streams;
  streams.push_back({cfg.station_sc.id, sc_records});
  streams.push_back({cfg.station_apd.id, apd_records});
  for (int s : {0, 1}) {
    GateList gates;
    const GateList* gates_ptr = nullptr;
    if (analyzer_models[s]->mode == DetectorMode::gated) {
      gates = make_gates(twofold_triggers, analyzer_models[s]->gate_width,
                         analyzer_models[s]->gate_delay);
      gates_ptr = &gates;
    }
    for (int p : {0, 1}) {
      RandomStream rng_det(seed, "detect/" + port_ids[s][p]);
      DetectorModel model = *analyzer_models[s];
      model.id = port_ids[s][p];
      streams.push_back({port_ids[s][p],
                         detect(arr_analyzer[s][p], model, live, gates_ptr, rng_det)});
      arr_analyzer[s][p].clear();
      arr_analyzer[s][p].shrink_to_fit();
    }
  }

  return tdc_record(streams, cfg.analysis.tdc_resolution);
}

namespace {

// Record sink for the conditioned generators: one stream per detector, filled
// event by event, sorted once at the end.
struct ConditionedSink {
  const ScenarioConfig& cfg;
  DetectorRoles roles;
  std::vector<DetectionRecord> recs[6];  // sc, apd, a+, a-, b+, b-

  explicit ConditionedSink(const ScenarioConfig& c) : cfg(c), roles(c.roles()) {}

  void add(int stream, double true_ps, double sigma_ps, RandomStream& rng) {
    DetectionRecord r;
    r.true_time = Duration::picoseconds(true_ps);
    r.recorded_time = Duration::picoseconds(rng.gaussian(true_ps, sigma_ps));
    recs[stream].push_back(r);
  }

  TimestampTable finish() {
    const std::string ids[6] = {cfg.station_sc.id,      cfg.station_apd.id,
                                roles.analyzer_a_plus,  roles.analyzer_a_minus,
                                roles.analyzer_b_plus,  roles.analyzer_b_minus};
    std::vector<DetectorRecords> streams;
    for (int k = 0; k < 6; ++k) {
      std::sort(recs[k].begin(), recs[k].end(),
                [](const DetectionRecord& x, const DetectionRecord& y) {
                  return x.recorded_time < y.recorded_time;
                });
      streams.push_back({ids[k], std::move(recs[k])});
    }
    return tdc_record(streams, cfg.analysis.tdc_resolution);
  }
};

}  // namespace

TimestampTable conditioned_hom_table(const ScenarioConfig& cfg, long target_events,
                                     long* candidates_out) {
  cfg.validate();
  if (target_events < 1) throw std::domain_error("target_events must be >= 1");

  const OverlapModel overlap = cfg.overlap();
  const std::vector<Duration> jitters = cfg.station_jitters();
  const double sigma_j_ps = combined_jitter_sigma(jitters).ps();
  const double margin_ps =
      5.0 * sigma_j_ps + cfg.analysis.tdc_resolution.ps() + cfg.analysis.hom_bin_width.ps();
  const double tau_max_ps = cfg.analysis.hom_span.ps() + margin_ps;
  const double pd_ps[2] = {cfg.analyzer_a.path_difference.ps(),
                           cfg.analyzer_b.path_difference.ps()};
  const double p_click[2] = {
      cfg.analyzer_a.insertion_transmission.value() * cfg.analyzer_det_a.efficiency.value(),
      cfg.analyzer_b.insertion_transmission.value() * cfg.analyzer_det_b.efficiency.value()};
  const double sig_station[2] = {jitter_sigma_ps(cfg.station_sc), jitter_sigma_ps(cfg.station_apd)};
  const double sig_analyzer[2] = {jitter_sigma_ps(cfg.analyzer_det_a),
                                  jitter_sigma_ps(cfg.analyzer_det_b)};
  // Events are spaced far enough apart that coincidence windows never bridge
  // two of them.
  const double spacing_ps = 4.0 * (cfg.analysis.window_bsm.ps() +
                                   cfg.analysis.hom_window_outer.ps() + tau_max_ps) +
                            2.0 * std::max(pd_ps[0], pd_ps[1]);

  ConditionedSink sink(cfg);
  RandomStream rng(cfg.run.master_seed, "conditioned/hom");

  long accepted = 0;
  long proposals = 0;
  long placed = 0;
  while (accepted < target_events) {
    ++proposals;
    // A zero-acceptance configuration (an analyzer arm with zero transmission
    // or efficiency) must fail with a diagnostic instead of spinning. The
    // bound is generous: the reference acceptance rate is about 7e-3.
    if (proposals == 1000000 && accepted == 0)
      throw GuardError(
          "conditioned hom sampling accepted none of 1000000 proposals; check analyzer "
          "insertion transmissions and detector efficiencies");
    // Click separations are proposed beyond the histogram span by the jitter
    // margin so smearing across the edges stays unbiased.
    const double tau = rng.uniform(-tau_max_ps, tau_max_ps);
    if (!rng.bernoulli(2.0 * hom_cross_density(Duration::picoseconds(tau), overlap))) continue;

    ++placed;
    const double base = spacing_ps * static_cast<double>(placed);
    const double t_early = base;
    const double t_late = base + std::abs(tau);

    // Either station photon may take either splitter port; the coin carries
    // the sign of the recorded separation.
    const bool sc_early = rng.bernoulli(0.5);
    sink.add(0, sc_early ? t_early : t_late, sig_station[0], rng);
    sink.add(1, sc_early ? t_late : t_early, sig_station[1], rng);

    // The analyzer photons of a dip event need no joint correlations, only
    // presence: each follows its own pair with an independent path and port.
    const bool a_early = rng.bernoulli(0.5);
    bool fourfold = true;
    for (int side : {0, 1}) {
      if (!rng.bernoulli(p_click[side])) {
        fourfold = false;
        continue;
      }
      const double emit = (side == 0) == a_early ? t_early : t_late;
      const double arrival = emit + (rng.bernoulli(0.5) ? pd_ps[side] : 0.0);
      const int stream = 2 + 2 * side + (rng.bernoulli(0.5) ? 1 : 0);
      sink.add(stream, arrival, sig_analyzer[side], rng);
    }
    if (fourfold) ++accepted;
  }
  if (candidates_out) *candidates_out = proposals;
  return sink.finish();
}

TimestampTable conditioned_swap_table(const ScenarioConfig& cfg, double beta, long target_events,
                                      int setting_index) {
  cfg.validate();
  if (target_events < 1) throw std::domain_error("target_events must be >= 1");

  const OverlapModel overlap = cfg.overlap();
  const std::vector<Duration> jitters = cfg.station_jitters();
  const double sigma_j_ps = combined_jitter_sigma(jitters).ps();
  const double margin_ps = 5.0 * sigma_j_ps + cfg.analysis.tdc_resolution.ps();
  const double center_ps = cfg.tau_bin_center().ps();
  const double half_ps = cfg.tau_bin_half_width().ps();
  const Duration window = cfg.interference_window();

  AnalyzerSpec analyzer_b = cfg.analyzer_b;
  analyzer_b.phase = beta;

  const ConditionalVisibility vis = conditional_visibility(
      overlap, jitters, cfg.q_a(), cfg.q_b(), multipair_settings_of(cfg));

  const double pd_ps[2] = {cfg.analyzer_a.path_difference.ps(),
                           cfg.analyzer_b.path_difference.ps()};
  const double p_click[2] = {
      cfg.analyzer_a.insertion_transmission.value() * cfg.analyzer_det_a.efficiency.value(),
      cfg.analyzer_b.insertion_transmission.value() * cfg.analyzer_det_b.efficiency.value()};
  const double sig_station[2] = {jitter_sigma_ps(cfg.station_sc), jitter_sigma_ps(cfg.station_apd)};
  const double sig_analyzer[2] = {jitter_sigma_ps(cfg.analyzer_det_a),
                                  jitter_sigma_ps(cfg.analyzer_det_b)};
  const double spacing_ps = 4.0 * (cfg.analysis.window_bsm.ps() +
                                   cfg.analysis.window_outer.ps() + center_ps + half_ps) +
                            2.0 * std::max(pd_ps[0], pd_ps[1]);

  ConditionedSink sink(cfg);
  RandomStream rng(cfg.run.master_seed,
                   "conditioned/swap/" + std::to_string(setting_index));

  long accepted = 0;
  long placed = 0;
  while (accepted < target_events) {
    ++placed;
    if (placed == 1000000 && accepted == 0)
      throw GuardError(
          "conditioned swap sampling accepted none of 1000000 proposals; check analyzer "
          "insertion transmissions and detector efficiencies");
    // |tau| proposed over the analysis bin widened by the jitter margin; the
    // separation density is flat this far out on the dip. The outcome table
    // is even in tau, so the sign lives in the station assignment coin alone.
    const double mag =
        rng.uniform(center_ps - half_ps - margin_ps, center_ps + half_ps + margin_ps);
    const double base = spacing_ps * static_cast<double>(placed);
    const double t_early = base;
    const double t_late = base + mag;

    const bool sc_early = rng.bernoulli(0.5);
    sink.add(0, sc_early ? t_early : t_late, sig_station[0], rng);
    sink.add(1, sc_early ? t_late : t_early, sig_station[1], rng);

    const JointOutcomeTable table = swapped_pair_probabilities(
        Duration::picoseconds(mag), cfg.analyzer_a, analyzer_b, vis.value, window);
    const JointOutcomeTable::Outcome out = table.sample(rng);
    const PortSign ports[2] = {out.port_a, out.port_b};
    const Slot slots[2] = {out.slot_a, out.slot_b};

    bool fourfold = true;
    for (int side : {0, 1}) {
      if (!rng.bernoulli(p_click[side])) {
        fourfold = false;
        continue;
      }
      const double arrival = slot_arrival_ps(slots[side], t_early, t_late, pd_ps[side]);
      const int stream = 2 + 2 * side + (ports[side] == PortSign::plus ? 0 : 1);
      sink.add(stream, arrival, sig_analyzer[side], rng);
    }
    if (fourfold) ++accepted;
  }
  return sink.finish();
}

HomScanResult analyze_hom_table(const ScenarioConfig& cfg, const TimestampTable& table) {
  HomScanResult result;
  result.mode = cfg.run.mode;
  const std::vector<CoincidenceEvent> events = find_coincidences(
      table, cfg.roles(), cfg.analysis.window_bsm, cfg.analysis.hom_window_outer);
  result.histogram = hom_histogram(events, cfg.analysis.hom_bin_width, cfg.analysis.hom_span);
  double total = 0.0;
  for (double c : result.histogram.counts) total += c;
  result.histogram_events = static_cast<long>(total + 0.5);
  result.fit = fit_dip(result.histogram);
  const OverlapModel overlap = cfg.overlap();
  const std::vector<Duration> jitters = cfg.station_jitters();
  result.predicted_visibility = dip_visibility(overlap, jitters);
  result.predicted_fwhm_ps = dip_fwhm(overlap, jitters).ps();
  return result;
}

HomScanResult run_hom_scan(const ScenarioConfig& cfg) {
  cfg.validate();
  TimestampTable table;
  long candidates = 0;
  if (cfg.run.mode == RunMode::conditioned) {
    table = conditioned_hom_table(cfg, cfg.run.target_event_count, &candidates);
  } else {
    table = simulate_timestamps(cfg);
  }
  HomScanResult result = analyze_hom_table(cfg, table);
  result.candidates = candidates;
  return result;
}

namespace {

struct SettingCounts {
  std::int64_t n[2][2] = {{0, 0}, {0, 0}};  // [port_a][port_b], 0 = plus
  double threefold_a_plus = 0.0;
};

SettingCounts count_swap_events(const ScenarioConfig& cfg, const TimestampTable& table) {
  SettingCounts counts;
  const std::vector<CoincidenceEvent> events = find_coincidences(
      table, cfg.roles(), cfg.analysis.window_bsm, cfg.analysis.window_outer);
  const double center_ps = cfg.tau_bin_center().ps();
  const double half_ps = cfg.tau_bin_half_width().ps();
  for (const CoincidenceEvent& ev : events) {
    if (std::abs(std::abs(ev.tau.ps()) - center_ps) > half_ps) continue;
    if (ev.analyzer_a && ev.analyzer_a->port == PortSign::plus) counts.threefold_a_plus += 1.0;
    if (ev.fold == 4) {
      const int pa = ev.analyzer_a->port == PortSign::plus ? 0 : 1;
      const int pb = ev.analyzer_b->port == PortSign::plus ? 0 : 1;
      ++counts.n[pa][pb];
    }
  }
  return counts;
}

}  // namespace

SwapScanResult run_swap_scan(const ScenarioConfig& cfg) {
  cfg.validate();
  SwapScanResult result;
  result.mode = cfg.run.mode;

  ScenarioConfig base = cfg;
  base.analyzer_a.phase = cfg.analysis.fixed_alpha;

  const int n_settings = cfg.analysis.phase_settings;
  const double alpha = cfg.analysis.fixed_alpha;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n_settings - 1);
  const long per_setting =
      (cfg.run.target_event_count + n_settings - 1) / static_cast<long>(n_settings);

  for (int k = 0; k < n_settings; ++k) {
    const double beta = alpha - std::numbers::pi + step * static_cast<double>(k);
    TimestampTable table;
    if (cfg.run.mode == RunMode::conditioned) {
      table = conditioned_swap_table(base, beta, per_setting, k);
    } else {
      ScenarioConfig run_cfg = base;
      run_cfg.analyzer_b.phase = beta;
      run_cfg.run.master_seed = RandomStream::splitmix64(
          cfg.run.master_seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(k + 1)));
      table = simulate_timestamps(run_cfg);
    }
    const SettingCounts counts = count_swap_events(base, table);
    result.samples.push_back(FringeSample::from_counts(alpha, beta, counts.n[0][0],
                                                       counts.n[0][1], counts.n[1][0],
                                                       counts.n[1][1]));
    result.threefold_counts.push_back(counts.threefold_a_plus);
  }

  result.fit = fit_fringe(result.samples);
  result.werner = werner_entanglement_check(std::min(result.fit.visibility, 1.0));
  result.flatness = threefold_flatness(result.threefold_counts);
  result.predicted =
      conditional_visibility(cfg.overlap(), cfg.station_jitters(), cfg.q_a(), cfg.q_b(),
                             multipair_settings_of(cfg));
  return result;
}

RateBudget rate_budget(const ScenarioConfig& cfg) {
  cfg.validate();
  RateBudget budget;
  const double raw_a = raw_pair_rate(cfg.source_a).per_s();
  const double raw_b = raw_pair_rate(cfg.source_b).per_s();
  const double filtered_a = filtered_pair_rate(cfg.source_a).per_s();
  const double filtered_b = filtered_pair_rate(cfg.source_b).per_s();

  double rate = raw_a + raw_b;
  const auto push = [&](const std::string& label, double factor, bool assumed) {
    rate *= factor;
    budget.stages.push_back({label, factor, rate, assumed});
  };
  budget.stages.push_back({"pair generation, both sources", 1.0, rate, false});

  const auto mean2 = [](double x, double y) { return 0.5 * (x + y); };
  push("spectral filter bandwidth fraction", (filtered_a + filtered_b) / (raw_a + raw_b), false);
  push("fiber coupling, station photon",
       mean2(cfg.source_a.coupling_efficiency.value(), cfg.source_b.coupling_efficiency.value()),
       false);
  push("filter peak transmission, station photon",
       mean2(cfg.source_a.filter_transmission.value(), cfg.source_b.filter_transmission.value()),
       false);
  const double station_rate = rate;  // photons/s reaching the joint splitter
  push("splitter arm toward trigger detector", 0.5, true);
  push("trigger detector efficiency", cfg.station_sc.efficiency.value(), false);
  // Partner click probability inside the station pairing span. The span is
  // the trigger gate for a gated arm, the software window otherwise.
  const double span_s = cfg.station_apd.mode == DetectorMode::gated
                            ? cfg.station_apd.gate_width.s()
                            : 2.0 * cfg.analysis.window_bsm.s();
  push("partner click inside the station window",
       station_rate * span_s * 0.5 * cfg.station_apd.efficiency.value(), true);
  budget.twofold_rate_per_s = rate;

  push("opposite-source herald fraction", 0.5, false);
  push("click separation inside the analysis bin",
       2.0 * cfg.tau_bin_half_width().ps() / cfg.analysis.window_bsm.ps(), false);
  const char side_name[2] = {'a', 'b'};
  const SourceSpec* sources[2] = {&cfg.source_a, &cfg.source_b};
  const AnalyzerSpec* analyzers[2] = {&cfg.analyzer_a, &cfg.analyzer_b};
  const DetectorModel* analyzer_dets[2] = {&cfg.analyzer_det_a, &cfg.analyzer_det_b};
  for (int s : {0, 1}) {
    const std::string suffix = std::string(", analyzer photon ") + side_name[s];
    push("fiber coupling and filter peak" + suffix,
         sources[s]->coupling_efficiency.value() * sources[s]->filter_transmission.value(),
         false);
    push("interferometer insertion" + suffix, analyzers[s]->insertion_transmission.value(),
         false);
    push("detector efficiency" + suffix, analyzer_dets[s]->efficiency.value(), false);
    push("central-slot post-selection" + suffix, 0.5, false);
  }
  budget.fourfold_rate_per_s = rate;

  budget.unmodeled = {
      "duty cycle and long-term drift of the sources",
      "detector dead time and afterpulsing",
      "dark-count accidentals",
      "alignment and polarization drift beyond the static overlap factor",
  };
  return budget;
}

OracleCheckReport oracle_check(const OracleGrid& grid, const ScenarioConfig& cfg,
                               int sweep_points) {
  if (sweep_points < 2) throw std::domain_error("oracle sweep needs at least 2 points");
  OracleCheckReport report;

  const WavePacket packet = cfg.packet();
  OverlapModel unit{1.0, packet.sigma()};
  OverlapModel partial{0.5, packet.sigma()};
  const double sigma_c_ps = unit.sigma_c.ps();
  const std::vector<Duration> jitters = cfg.station_jitters();
  const double sigma_j_ps = combined_jitter_sigma(jitters).ps();

  // Simpson weights for the jitter convolution of the oracle curve.
  const int quad_intervals = 60;
  const double quad_half = 6.0 * sigma_j_ps;
  std::vector<double> quad_x(quad_intervals + 1);
  std::vector<double> quad_w(quad_intervals + 1);
  double quad_norm = 0.0;
  for (int k = 0; k <= quad_intervals; ++k) {
    const double x = -quad_half + 2.0 * quad_half * static_cast<double>(k) /
                                      static_cast<double>(quad_intervals);
    const double simpson = (k == 0 || k == quad_intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    quad_x[k] = x;
    quad_w[k] = simpson * std::exp(-x * x / (2.0 * sigma_j_ps * sigma_j_ps));
    quad_norm += quad_w[k];
  }

  const auto oracle_cross = [&](double delta_ps, const OverlapModel& model) {
    return oracle_joint_probabilities(grid, Duration::picoseconds(delta_ps), model).cross_port;
  };

  for (int i = 0; i < sweep_points; ++i) {
    const double delta_ps = -4.0 * sigma_c_ps + 8.0 * sigma_c_ps * static_cast<double>(i) /
                                                    static_cast<double>(sweep_points - 1);
    OracleCheckRow row;
    row.delta_ps = delta_ps;
    const OracleSplit split =
        oracle_joint_probabilities(grid, Duration::picoseconds(delta_ps), unit);
    row.oracle_cross = split.cross_port;
    row.oracle_same = split.same_port;
    row.closed_form_cross = hom_cross_density(Duration::picoseconds(delta_ps), unit);

    double conv = 0.0;
    if (sigma_j_ps > 0.0) {
      for (int k = 0; k <= quad_intervals; ++k) {
        conv += quad_w[k] * oracle_cross(delta_ps - quad_x[k], unit);
      }
      conv /= quad_norm;
    } else {
      conv = row.oracle_cross;
    }
    row.convolved_cross = conv;
    row.closed_form_dip = measured_dip(Duration::picoseconds(delta_ps), unit, jitters);

    const double partial_oracle = oracle_cross(delta_ps, partial);
    const double partial_closed = hom_cross_density(Duration::picoseconds(delta_ps), partial);

    report.max_deviation_cross = std::max(report.max_deviation_cross,
                                          std::abs(row.oracle_cross - row.closed_form_cross));
    report.max_deviation_dip =
        std::max(report.max_deviation_dip, std::abs(row.convolved_cross - row.closed_form_dip));
    report.max_deviation_partial =
        std::max(report.max_deviation_partial, std::abs(partial_oracle - partial_closed));
    report.rows.push_back(row);
  }

  report.pass = report.max_deviation_cross < report.tolerance &&
                report.max_deviation_dip < report.tolerance &&
                report.max_deviation_partial < report.tolerance;
  return report;
}

}  // namespace swapsim
