#include "swapsim/detection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "swapsim/errors.hpp"

namespace swapsim {

DetectorModel DetectorModel::superconducting(std::string id) {
  DetectorModel m;
  m.id = std::move(id);
  m.efficiency = Probability::of(0.045);
  m.jitter_fwhm = Duration::picoseconds(74.0);
  m.dark_count_rate = Rate::per_second(300.0);
  m.mode = DetectorMode::free_running;
  m.dead_time = Duration::nanoseconds(10.0);
  return m;
}

DetectorModel DetectorModel::station_apd(std::string id) {
  DetectorModel m;
  m.id = std::move(id);
  m.efficiency = Probability::of(0.30);
  m.jitter_fwhm = Duration::picoseconds(105.0);
  m.dark_prob_per_ns = 1e-4;
  m.mode = DetectorMode::gated;
  m.gate_width = Duration::nanoseconds(20.0);
  return m;
}

DetectorModel DetectorModel::analyzer_apd(std::string id) {
  DetectorModel m;
  m.id = std::move(id);
  m.efficiency = Probability::of(0.30);
  // Jitter of this device family is not pinned down; value is configurable and
  // flagged as assumed in report headers.
  m.jitter_fwhm = Duration::picoseconds(300.0);
  m.dark_prob_per_ns = 1e-4;
  m.mode = DetectorMode::gated;
  m.gate_width = Duration::nanoseconds(20.0);
  return m;
}

GateList make_gates(const std::vector<DetectionRecord>& triggers, Duration gate_width,
                    Duration gate_delay) {
  if (!(gate_width.ps() > 0.0)) throw std::domain_error("gate width must be positive");
  GateList gates;
  gates.reserve(triggers.size());
  for (std::size_t i = 0; i < triggers.size(); ++i) {
    if (i > 0 && triggers[i].recorded_time < triggers[i - 1].recorded_time)
      throw std::domain_error("trigger records must be sorted by recorded time");
    const Duration begin = triggers[i].recorded_time + gate_delay;
    const Duration end = begin + gate_width;
    if (!gates.empty() && begin <= gates.back().end) {
      gates.back().end = std::max(gates.back().end, end);
    } else {
      gates.push_back({begin, end});
    }
  }
  return gates;
}

namespace {

// Index of the gate containing t, or -1. Gates are sorted and disjoint.
long gate_containing(const GateList& gates, Duration t, std::size_t& hint) {
  while (hint < gates.size() && gates[hint].end < t) ++hint;
  if (hint < gates.size() && gates[hint].begin <= t && t <= gates[hint].end)
    return static_cast<long>(hint);
  return -1;
}

struct Candidate {
  DetectionRecord record;
  long gate = -1;
};

}  // namespace

std::vector<DetectionRecord> detect(const std::vector<Duration>& arrivals,
                                    const DetectorModel& model, TimeSpan live,
                                    const GateList* gates, RandomStream& rng) {
  const bool gated = model.mode == DetectorMode::gated;
  if (gated && gates == nullptr) throw std::domain_error("gated detector requires gate intervals");
  if (model.jitter_fwhm.ps() < 0.0) throw std::domain_error("jitter FWHM must be non-negative");

  const double sigma_ps = model.jitter_fwhm.ps() / constants::fwhm_per_sigma;
  std::vector<Candidate> candidates;
  candidates.reserve(arrivals.size() / 4 + 16);

  std::size_t gate_hint = 0;
  Duration prev = arrivals.empty() ? Duration{} : arrivals.front();
  for (Duration t : arrivals) {
    if (t < prev) throw std::domain_error("arrival times must be sorted");
    prev = t;
    long g = -1;
    if (gated) {
      g = gate_containing(*gates, t, gate_hint);
      if (g < 0) continue;
    }
    if (!rng.bernoulli(model.efficiency.value())) continue;
    const Duration rec =
        t + Duration::picoseconds(sigma_ps > 0.0 ? rng.gaussian(0.0, sigma_ps) : 0.0);
    candidates.push_back({{t, rec, ClickOrigin::photon}, g});
  }

  // Dark counts: Poisson over the live span, or per gate at the quoted
  // probability density. Darks are electronic events; true == recorded.
  if (!gated) {
    if (model.dark_count_rate.per_s() > 0.0 && live.end > live.begin) {
      const double mean_gap_ps = 1e12 / model.dark_count_rate.per_s();
      double t = live.begin.ps() + rng.exponential(mean_gap_ps);
      while (t < live.end.ps()) {
        const Duration d = Duration::picoseconds(t);
        candidates.push_back({{d, d, ClickOrigin::dark}, -1});
        t += rng.exponential(mean_gap_ps);
      }
    }
  } else if (model.dark_prob_per_ns > 0.0) {
    for (std::size_t g = 0; g < gates->size(); ++g) {
      const TimeSpan& span = (*gates)[g];
      const double mean = model.dark_prob_per_ns * (span.end - span.begin).ns();
      const long n = rng.poisson(mean);
      for (long k = 0; k < n; ++k) {
        const Duration d = Duration::picoseconds(rng.uniform(span.begin.ps(), span.end.ps()));
        candidates.push_back({{d, d, ClickOrigin::dark}, static_cast<long>(g)});
      }
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.record.recorded_time < b.record.recorded_time;
  });

  // Geiger-mode gating: one avalanche per gate. Dead time pruned on the
  // recorded stream so output spacing honors it exactly.
  std::vector<DetectionRecord> out;
  out.reserve(candidates.size());
  std::vector<char> gate_fired(gated ? gates->size() : 0, 0);
  bool have_last = false;
  Duration last_kept;
  for (const Candidate& c : candidates) {
    if (gated && c.gate >= 0) {
      if (gate_fired[static_cast<std::size_t>(c.gate)]) continue;
    }
    if (have_last && model.dead_time.ps() > 0.0 &&
        c.record.recorded_time - last_kept < model.dead_time)
      continue;
    if (gated && c.gate >= 0) gate_fired[static_cast<std::size_t>(c.gate)] = 1;
    out.push_back(c.record);
    last_kept = c.record.recorded_time;
    have_last = true;
  }
  return out;
}

TimestampTable tdc_record(const std::vector<DetectorRecords>& streams, Duration resolution) {
  if (!(resolution.ps() > 0.0)) throw std::domain_error("TDC resolution must be positive");
  TimestampTable table;
  std::size_t total = 0;
  for (const auto& s : streams) total += s.records.size();
  table.rows().reserve(total);
  for (const auto& s : streams) {
    for (const DetectionRecord& r : s.records) {
      const double q = std::floor(r.recorded_time.ps() / resolution.ps()) * resolution.ps();
      table.rows().push_back({s.detector_id, q, r.origin});
    }
  }
  std::sort(table.rows().begin(), table.rows().end(), [](const TimestampRow& a, const TimestampRow& b) {
    return a.time_ps != b.time_ps ? a.time_ps < b.time_ps : a.detector_id < b.detector_id;
  });
  return table;
}

void TimestampTable::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << "detector_id,time_ps,origin\n";
  char buf[40];
  for (const TimestampRow& r : rows_) {
    // %.17g round-trips doubles and prints grid-aligned values as integers.
    std::snprintf(buf, sizeof buf, "%.17g", r.time_ps);
    out << r.detector_id << ',' << buf << ','
        << (r.origin == ClickOrigin::photon ? "photon" : "dark") << '\n';
  }
}

TimestampTable TimestampTable::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "detector_id,time_ps,origin")
    throw ConfigError("bad timestamp CSV header in " + path.string());
  TimestampTable table;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw ConfigError("bad timestamp CSV row at line " + std::to_string(lineno));
    TimestampRow row;
    row.detector_id = line.substr(0, c1);
    try {
      std::size_t used = 0;
      const std::string field = line.substr(c1 + 1, c2 - c1 - 1);
      row.time_ps = std::stod(field, &used);
      if (used != field.size() || field.empty()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw ConfigError("bad time value at line " + std::to_string(lineno));
    }
    const std::string origin = line.substr(c2 + 1);
    if (origin == "photon") {
      row.origin = ClickOrigin::photon;
    } else if (origin == "dark") {
      row.origin = ClickOrigin::dark;
    } else {
      throw ConfigError("bad origin value at line " + std::to_string(lineno));
    }
    table.rows().push_back(row);
  }
  return table;
}

}  // namespace swapsim
