#include "swapsim/interference.hpp"

#include <cmath>
#include <stdexcept>

namespace swapsim {

namespace {

void check_overlap(const OverlapModel& model) {
  if (!(model.mu >= 0.0 && model.mu <= 1.0))
    throw std::domain_error("overlap factor mu must be in [0,1]");
  if (!(model.sigma_c.ps() > 0.0))
    throw std::domain_error("packet width sigma_c must be positive");
}

}  // namespace

OverlapModel OverlapModel::from_packet(const WavePacket& packet, double mu) {
  OverlapModel m{mu, packet.sigma()};
  check_overlap(m);
  return m;
}

double hom_cross_density(Duration delta, const OverlapModel& model) {
  check_overlap(model);
  const double s = model.sigma_c.ps();
  const double d = delta.ps();
  return 0.5 * (1.0 - model.mu * std::exp(-d * d / (2.0 * s * s)));
}

Duration combined_jitter_sigma(std::span<const Duration> jitter_fwhm) {
  double sum_sq = 0.0;
  for (Duration f : jitter_fwhm) {
    if (f.ps() < 0.0) throw std::domain_error("jitter FWHM must be non-negative");
    const double sigma = f.ps() / constants::fwhm_per_sigma;
    sum_sq += sigma * sigma;
  }
  return Duration::picoseconds(std::sqrt(sum_sq));
}

double measured_dip(Duration delta, const OverlapModel& model,
                    std::span<const Duration> jitter_fwhm) {
  check_overlap(model);
  // Gaussian circle: convolving the exp(-d^2/2s^2) notch with jitter of total
  // variance sigma_j^2 widens s^2 by sigma_j^2 and scales the depth by s/s'.
  const double sc = model.sigma_c.ps();
  const double sj = combined_jitter_sigma(jitter_fwhm).ps();
  const double s2 = sc * sc + sj * sj;
  const double d = delta.ps();
  return 0.5 * (1.0 - model.mu * (sc / std::sqrt(s2)) * std::exp(-d * d / (2.0 * s2)));
}

double dip_visibility(const OverlapModel& model, std::span<const Duration> jitter_fwhm) {
  check_overlap(model);
  const double sc = model.sigma_c.ps();
  const double sj = combined_jitter_sigma(jitter_fwhm).ps();
  return model.mu * sc / std::sqrt(sc * sc + sj * sj);
}

Duration dip_fwhm(const OverlapModel& model, std::span<const Duration> jitter_fwhm) {
  check_overlap(model);
  const double sc = model.sigma_c.ps();
  const double sj = combined_jitter_sigma(jitter_fwhm).ps();
  return Duration::picoseconds(constants::fwhm_per_sigma * std::sqrt(sc * sc + sj * sj));
}

BSMOutcome classify_bsm(Duration t_first_port, Duration t_second_port,
                        Duration bunching_threshold) {
  if (bunching_threshold.ps() < 0.0)
    throw std::domain_error("bunching threshold must be non-negative");
  const Duration tau = t_second_port - t_first_port;
  // Resolvable cross-port clicks project onto the antisymmetric state; clicks
  // inside the threshold are dominated by unresolved bunching and rejected.
  return {abs(tau) > bunching_threshold, tau};
}

double JointOutcomeTable::total() const {
  double s = 0.0;
  for (double v : p_) s += v;
  return s;
}

double JointOutcomeTable::middle_slot_correlation() const {
  double num = 0.0;
  double den = 0.0;
  for (PortSign pa : {PortSign::plus, PortSign::minus}) {
    for (PortSign pb : {PortSign::plus, PortSign::minus}) {
      const double v = at(pa, Slot::middle, pb, Slot::middle);
      num += sign_of(pa) * sign_of(pb) * v;
      den += v;
    }
  }
  if (den <= 0.0) throw std::domain_error("no middle-slot probability mass");
  return num / den;
}

double JointOutcomeTable::marginal_a(PortSign pa, Slot sa) const {
  double s = 0.0;
  for (PortSign pb : {PortSign::plus, PortSign::minus})
    for (Slot sb : {Slot::early, Slot::middle, Slot::late}) s += at(pa, sa, pb, sb);
  return s;
}

double JointOutcomeTable::marginal_b(PortSign pb, Slot sb) const {
  double s = 0.0;
  for (PortSign pa : {PortSign::plus, PortSign::minus})
    for (Slot sa : {Slot::early, Slot::middle, Slot::late}) s += at(pa, sa, pb, sb);
  return s;
}

JointOutcomeTable::Outcome JointOutcomeTable::sample(RandomStream& rng) const {
  const double u = rng.uniform() * total();
  double acc = 0.0;
  Outcome last{};
  for (PortSign pa : {PortSign::plus, PortSign::minus})
    for (Slot sa : {Slot::early, Slot::middle, Slot::late})
      for (PortSign pb : {PortSign::plus, PortSign::minus})
        for (Slot sb : {Slot::early, Slot::middle, Slot::late}) {
          acc += at(pa, sa, pb, sb);
          last = {pa, sa, pb, sb};
          if (u < acc) return last;
        }
  return last;  // u == total() up to rounding
}

JointOutcomeTable swapped_pair_probabilities(Duration tau, const AnalyzerSpec& analyzer_a,
                                             const AnalyzerSpec& analyzer_b,
                                             double cond_visibility,
                                             Duration interference_window) {
  if (!(cond_visibility >= 0.0 && cond_visibility <= 1.0))
    throw std::domain_error("conditional visibility must be in [0,1]");
  if (interference_window.ps() < 0.0)
    throw std::domain_error("interference window must be non-negative");
  if (!(analyzer_a.path_difference.ps() > 0.0) || !(analyzer_b.path_difference.ps() > 0.0))
    throw std::domain_error("analyzer path difference must be positive");

  // The click separation must match each analyzer's imbalance for the
  // early/late amplitudes to overlap; otherwise the phase term vanishes.
  const double atau = abs(tau).ps();
  const bool matched =
      std::fabs(atau - analyzer_a.path_difference.ps()) <= interference_window.ps() &&
      std::fabs(atau - analyzer_b.path_difference.ps()) <= interference_window.ps();
  const double v = matched ? cond_visibility : 0.0;
  const double cos_term = std::cos(analyzer_a.phase - analyzer_b.phase);

  JointOutcomeTable table;
  // Weight of the slot marginal per side: early and late each 1, middle 2
  // (short-short / cross / long-long path combinations).
  const auto slot_weight = [](Slot s) { return s == Slot::middle ? 2.0 : 1.0; };

  for (PortSign pa : {PortSign::plus, PortSign::minus}) {
    for (Slot sa : {Slot::early, Slot::middle, Slot::late}) {
      for (PortSign pb : {PortSign::plus, PortSign::minus}) {
        for (Slot sb : {Slot::early, Slot::middle, Slot::late}) {
          // Antisymmetric-state part: the heralded pair occupies distinct time
          // bins, so matching extreme slots on both sides are forbidden, and
          // only the middle-middle outcome carries the phase.
          double coherent;
          if ((sa == Slot::early && sb == Slot::early) ||
              (sa == Slot::late && sb == Slot::late)) {
            coherent = 0.0;
          } else if (sa == Slot::middle && sb == Slot::middle) {
            coherent = (1.0 + sign_of(pa) * sign_of(pb) * cos_term) / 16.0;
          } else {
            coherent = 1.0 / 32.0;
          }
          // Uncorrelated part: independent photons, uniform ports, binomial
          // path slots.
          const double noise = slot_weight(sa) * slot_weight(sb) / 64.0;
          table.at(pa, sa, pb, sb) = v * coherent + (1.0 - v) * noise;
        }
      }
    }
  }
  return table;
}

namespace {

// Competition model for accidental heralds: each acceptance role (two station
// slots, two analyzer windows) admits extra-pair candidates over one coherence
// time; the recorded click is equally likely to be any candidate. An event
// stays coherent only if every role resolved to the swapped pair itself.
double mc_multipair_factor(double q_a, double q_b, long trials, std::uint64_t seed) {
  RandomStream rng(seed, "multipair/competition");
  const double station_mean = q_a + q_b;  // both sources feed the station
  long coherent = 0;
  for (long t = 0; t < trials; ++t) {
    const long n_early = rng.poisson(station_mean);
    const long n_late = rng.poisson(station_mean);
    const long n_ana_a = rng.poisson(2.0 * q_a);  // two slots feed each analyzer window
    const long n_ana_b = rng.poisson(2.0 * q_b);
    bool ok = true;
    for (long n : {n_early, n_late, n_ana_a, n_ana_b}) {
      if (n > 0 && rng.index(static_cast<std::size_t>(n) + 1) != 0) {
        ok = false;
        break;
      }
    }
    if (ok) ++coherent;
  }
  return static_cast<double>(coherent) / static_cast<double>(trials);
}

}  // namespace

ConditionalVisibility conditional_visibility(const OverlapModel& model,
                                             std::span<const Duration> station_jitter_fwhm,
                                             double pairs_per_coherence_a,
                                             double pairs_per_coherence_b,
                                             const MultipairSettings& settings) {
  if (!(pairs_per_coherence_a >= 0.0) || !(pairs_per_coherence_b >= 0.0))
    throw std::domain_error("pairs per coherence time must be non-negative");

  ConditionalVisibility out;
  out.mode = settings.mode;
  out.temporal_factor = dip_visibility(model, station_jitter_fwhm);
  if (settings.mode == MultipairMode::analytic) {
    out.multipair_factor = 1.0 / (1.0 + 2.0 * (pairs_per_coherence_a + pairs_per_coherence_b));
  } else {
    if (settings.trials <= 0) throw std::domain_error("trial count must be positive");
    out.multipair_factor =
        mc_multipair_factor(pairs_per_coherence_a, pairs_per_coherence_b, settings.trials,
                            settings.seed);
  }
  out.value = out.temporal_factor * out.multipair_factor;
  return out;
}

}  // namespace swapsim
