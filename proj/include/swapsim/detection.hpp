#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "swapsim/random.hpp"
#include "swapsim/units.hpp"

namespace swapsim {

enum class DetectorMode { free_running, gated };
enum class ClickOrigin { photon, dark };

// Single-photon detector plus its timing electronics. Dark noise is a rate for
// free-running devices and a per-gate probability density for gated ones.
struct DetectorModel {
  std::string id;
  Probability efficiency = Probability::of(1.0);
  Duration jitter_fwhm;
  Rate dark_count_rate;                // free_running mode
  double dark_prob_per_ns = 0.0;       // gated mode
  DetectorMode mode = DetectorMode::free_running;
  Duration gate_width = Duration::nanoseconds(20.0);  // gated only
  // Gate start relative to the trigger click. Negative values model the fiber
  // delay that lets the gate straddle the trigger time.
  Duration gate_delay = Duration::nanoseconds(-10.0);
  Duration dead_time;

  // Device presets used by the reference scenario.
  static DetectorModel superconducting(std::string id);   // station trigger arm
  static DetectorModel station_apd(std::string id);       // station gated arm
  static DetectorModel analyzer_apd(std::string id);      // analyzer arms
};

struct DetectionRecord {
  Duration true_time;
  Duration recorded_time;
  ClickOrigin origin = ClickOrigin::photon;
};

// Half-open-ish live interval [begin, end]; also used for detector gates.
struct TimeSpan {
  Duration begin;
  Duration end;
};

using GateList = std::vector<TimeSpan>;

// One gate per trigger record, [t + delay, t + delay + width], overlapping
// gates merged. Triggers must be sorted by recorded time.
GateList make_gates(const std::vector<DetectionRecord>& triggers, Duration gate_width,
                    Duration gate_delay);

// True arrivals -> recorded clicks for one detector: gate membership (gated
// mode), efficiency thinning, gaussian jitter, dark counts over the live span
// (free-running) or per gate (gated), one click per gate for gated devices,
// dead-time pruning. Output sorted by recorded_time.
std::vector<DetectionRecord> detect(const std::vector<Duration>& arrivals,
                                    const DetectorModel& model, TimeSpan live,
                                    const GateList* gates, RandomStream& rng);

struct DetectorRecords {
  std::string detector_id;
  std::vector<DetectionRecord> records;
};

// time_ps sits on the TDC grid; it is fractional when the resolution is
// sub-picosecond (time-rescaled scenarios) and integral otherwise.
struct TimestampRow {
  std::string detector_id;
  double time_ps = 0.0;
  ClickOrigin origin = ClickOrigin::photon;
};

// Multistop time-tagger output: every record of every detector quantized onto
// the TDC grid and merged into one time-sorted table.
class TimestampTable {
 public:
  const std::vector<TimestampRow>& rows() const { return rows_; }
  std::vector<TimestampRow>& rows() { return rows_; }

  void write_csv(const std::filesystem::path& path) const;
  static TimestampTable read_csv(const std::filesystem::path& path);

 private:
  std::vector<TimestampRow> rows_;
};

// Floor quantization to the TDC resolution; multistop, so no record is lost to
// pile-up. Stable time order with detector id as tie-break.
TimestampTable tdc_record(const std::vector<DetectorRecords>& streams, Duration resolution);

}  // namespace swapsim
