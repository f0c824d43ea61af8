#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swapsim/detection.hpp"
#include "swapsim/interference.hpp"
#include "swapsim/units.hpp"

namespace swapsim {

// Which timestamp-table detector ids play which role in the coincidence
// search. station_1 is the trigger arm, station_2 the gated arm.
struct DetectorRoles {
  std::string station_1 = "station_sc";
  std::string station_2 = "station_apd";
  std::string analyzer_a_plus = "analyzer_a_plus";
  std::string analyzer_a_minus = "analyzer_a_minus";
  std::string analyzer_b_plus = "analyzer_b_plus";
  std::string analyzer_b_minus = "analyzer_b_minus";
};

struct AnalyzerClick {
  PortSign port = PortSign::plus;
  Duration time;
};

// One heralded event: a cross-port station click pair, with analyzer clicks
// attached when present. fold counts the populated detectors (2, 3 or 4).
struct CoincidenceEvent {
  Duration station_time_1;
  Duration station_time_2;
  Duration tau;  // station_time_2 - station_time_1
  std::optional<AnalyzerClick> analyzer_a;
  std::optional<AnalyzerClick> analyzer_b;
  int fold = 2;
};

// Greedy linear-time coincidence search: station click pairs with
// |t2 - t1| <= window_bsm, each click used at most once, earliest candidate
// wins; analyzer clicks attach within window_outer of the later station click.
std::vector<CoincidenceEvent> find_coincidences(const TimestampTable& table,
                                                const DetectorRoles& roles, Duration window_bsm,
                                                Duration window_outer);

struct Histogram {
  double bin_width_ps = 0.0;
  double lo_ps = 0.0;  // left edge of bin 0
  std::vector<double> counts;
  std::vector<double> variances;

  std::size_t size() const { return counts.size(); }
  double center(std::size_t i) const {
    return lo_ps + (static_cast<double>(i) + 0.5) * bin_width_ps;
  }
};

// Histogram of the station click separation over 4-fold events, bins covering
// [-span, +span] symmetrically around zero.
Histogram hom_histogram(const std::vector<CoincidenceEvent>& events, Duration bin_width,
                        Duration span);

struct DipFit {
  double visibility = 0.0;
  double fwhm_ps = 0.0;
  double baseline = 0.0;
  double visibility_err = 0.0;
  double fwhm_err_ps = 0.0;
  double baseline_err = 0.0;
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Weighted fit of baseline * (1 - V exp(-tau^2 / 2 s^2)); Poisson weights.
// Requires >= 7 nonempty bins and populated wings.
DipFit fit_dip(const Histogram& histogram);

struct CorrelationResult {
  double e = 0.0;
  double sigma = 0.0;
};

// E = (Rpp - Rpm - Rmp + Rmm) / total with Poisson error propagation. Integer
// counts keep the ratio exact under uniform scaling.
CorrelationResult correlation_coefficient(std::int64_t r_pp, std::int64_t r_pm, std::int64_t r_mp,
                                          std::int64_t r_mm);

struct FringeSample {
  double alpha = 0.0;  // radians
  double beta = 0.0;
  std::int64_t r_pp = 0;
  std::int64_t r_pm = 0;
  std::int64_t r_mp = 0;
  std::int64_t r_mm = 0;
  double e = 0.0;
  double sigma_e = 0.0;

  static FringeSample from_counts(double alpha, double beta, std::int64_t pp, std::int64_t pm,
                                  std::int64_t mp, std::int64_t mm);
};

struct FringeFit {
  double visibility = 0.0;
  double phase_offset = 0.0;  // radians
  double visibility_err = 0.0;
  double phase_err = 0.0;
  double chi2 = 0.0;
  int dof = 0;
};

// Least squares of E = V cos(alpha - beta + phase_offset), V >= 0. Needs at
// least 5 distinct phase differences.
FringeFit fit_fringe(std::span<const FringeSample> samples);

enum class EntanglementVerdict { entangled, inconclusive };

struct WernerCheck {
  EntanglementVerdict verdict = EntanglementVerdict::inconclusive;
  // The > 1/3 bound assumes isotropic (Werner) noise; phase-error-dominated
  // noise admits a lower threshold that this check does not model.
  bool isotropic_noise_assumption = true;
};

WernerCheck werner_entanglement_check(double visibility);

struct FlatnessResult {
  double chi2 = 0.0;
  double p_value = 1.0;
  int dof = 0;
};

// Chi-square test of per-setting counts against a constant rate.
FlatnessResult threefold_flatness(std::span<const double> counts_per_setting);

// Report files; header_notes are emitted as leading '# key=value' lines.
void write_histogram_csv(const Histogram& histogram, const std::filesystem::path& path,
                         const std::vector<std::string>& header_notes);
void write_fringe_csv(std::span<const FringeSample> samples, const std::filesystem::path& path,
                      const std::vector<std::string>& header_notes);

}  // namespace swapsim
