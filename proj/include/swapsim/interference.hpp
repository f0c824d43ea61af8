#pragma once

#include <array>
#include <span>
#include <vector>

#include "swapsim/random.hpp"
#include "swapsim/units.hpp"

namespace swapsim {

// Indistinguishability of the two photons meeting at the joint beam splitter.
// mu is the overlap factor (1 = identical packets); sigma_c is the gaussian
// amplitude width, tied to the coherence time by tau_c = fwhm_per_sigma * sigma_c.
struct OverlapModel {
  double mu = 1.0;
  Duration sigma_c;

  static OverlapModel from_packet(const WavePacket& packet, double mu);
};

// Probability density (per ordered click pair, normalized so the far-wing
// value is 1/2) of cross-port clicks separated by delta:
//   1/2 * (1 - mu * exp(-delta^2 / (2 sigma_c^2)))
double hom_cross_density(Duration delta, const OverlapModel& model);

// Cross-port density after convolving both click times with gaussian detector
// jitter (FWHM per detector). Widths add in quadrature, visibility shrinks by
// sigma_c / sqrt(sigma_c^2 + sigma_j^2).
double measured_dip(Duration delta, const OverlapModel& model,
                    std::span<const Duration> jitter_fwhm);

// Visibility and FWHM of the jitter-broadened dip, closed form.
double dip_visibility(const OverlapModel& model, std::span<const Duration> jitter_fwhm);
Duration dip_fwhm(const OverlapModel& model, std::span<const Duration> jitter_fwhm);

// Outcome of the time-resolved joint measurement: cross-port clicks at two
// resolvable times herald the antisymmetric projection.
struct BSMOutcome {
  bool success = false;
  Duration tau;  // signed click separation, second port minus first
};

// Cross-port click times -> projection verdict. Clicks closer than the
// bunching threshold are unresolved and rejected.
BSMOutcome classify_bsm(Duration t_first_port, Duration t_second_port,
                        Duration bunching_threshold);

// One unbalanced analysis interferometer: path imbalance, relative phase
// between arms, and net insertion transmission.
struct AnalyzerSpec {
  Duration path_difference = Duration::nanoseconds(1.2);
  double phase = 0.0;  // radians
  Probability insertion_transmission = Probability::of(0.4);
};

enum class PortSign : int { plus = 0, minus = 1 };
enum class Slot : int { early = 0, middle = 1, late = 2 };

inline int sign_of(PortSign p) { return p == PortSign::plus ? +1 : -1; }

// Joint distribution over (output port, arrival slot) for the two analyzer
// photons: 2 ports x 3 slots per side, 36 outcomes, summing to 1.
class JointOutcomeTable {
 public:
  double& at(PortSign pa, Slot sa, PortSign pb, Slot sb) { return p_[index(pa, sa, pb, sb)]; }
  double at(PortSign pa, Slot sa, PortSign pb, Slot sb) const { return p_[index(pa, sa, pb, sb)]; }

  double total() const;
  // Correlation coefficient restricted to both photons in the middle slot.
  double middle_slot_correlation() const;
  // Marginal over one side (port, slot), other side summed out.
  double marginal_a(PortSign pa, Slot sa) const;
  double marginal_b(PortSign pb, Slot sb) const;

  struct Outcome {
    PortSign port_a;
    Slot slot_a;
    PortSign port_b;
    Slot slot_b;
  };
  Outcome sample(RandomStream& rng) const;

  static int index(PortSign pa, Slot sa, PortSign pb, Slot sb) {
    return ((static_cast<int>(pa) * 3 + static_cast<int>(sa)) * 2 + static_cast<int>(pb)) * 3 +
           static_cast<int>(sb);
  }

 private:
  std::array<double, 36> p_{};
};

// Joint outcome table for the swapped pair heralded by a click separation tau,
// with analyzers a and b. conditional_visibility in [0,1] interpolates between
// the ideal antisymmetric state and an uncorrelated (white-noise) pair.
// Interference requires |tau| to match each analyzer's path imbalance within
// interference_window; otherwise the middle-slot phase term is switched off.
JointOutcomeTable swapped_pair_probabilities(Duration tau, const AnalyzerSpec& analyzer_a,
                                             const AnalyzerSpec& analyzer_b,
                                             double conditional_visibility,
                                             Duration interference_window);

enum class MultipairMode { analytic, monte_carlo };

// Expected two-photon fringe visibility after the swap, split into the
// temporal-overlap factor (jitter at the joint station) and the multi-pair
// contamination factor from accidental heralds.
struct ConditionalVisibility {
  double value = 0.0;
  double temporal_factor = 0.0;
  double multipair_factor = 0.0;
  MultipairMode mode = MultipairMode::analytic;
};

struct MultipairSettings {
  MultipairMode mode = MultipairMode::analytic;
  // Monte Carlo knobs; ignored in analytic mode.
  long trials = 200000;
  std::uint64_t seed = 20260814;
};

ConditionalVisibility conditional_visibility(const OverlapModel& model,
                                             std::span<const Duration> station_jitter_fwhm,
                                             double pairs_per_coherence_a,
                                             double pairs_per_coherence_b,
                                             const MultipairSettings& settings = {});

// Quadrature combination of per-detector gaussian jitters, FWHM in, sigma out.
Duration combined_jitter_sigma(std::span<const Duration> jitter_fwhm);

}  // namespace swapsim
