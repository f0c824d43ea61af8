#include "swapsim/units.hpp"

#include <numbers>

namespace swapsim {

namespace {
// Time-bandwidth products for transform-limited pulses, FWHM conventions.
constexpr double k_gaussian = 2.0 * std::numbers::ln2 / std::numbers::pi;   // 0.4413
constexpr double k_lorentzian = 1.0 / std::numbers::pi;                     // 0.3183
}  // namespace

Duration coherence_time(Wavelength center, Wavelength bandwidth_fwhm, Lineshape shape) {
  if (!(bandwidth_fwhm.nm() < center.nm()))
    throw std::domain_error("filter bandwidth must be narrow relative to the carrier");
  // c in nm/ps keeps the arithmetic in (nm, ps) without unit gymnastics.
  constexpr double c_nm_per_ps = constants::speed_of_light_m_per_s * 1e-3;
  const double delta_nu_per_ps = c_nm_per_ps * bandwidth_fwhm.nm() / (center.nm() * center.nm());
  const double k = (shape == Lineshape::gaussian) ? k_gaussian : k_lorentzian;
  return Duration::picoseconds(k / delta_nu_per_ps);
}

WavePacket::WavePacket(Wavelength center, Wavelength bandwidth_fwhm, Lineshape shape)
    : center_(center),
      bandwidth_(bandwidth_fwhm),
      shape_(shape),
      coherence_time_(swapsim::coherence_time(center, bandwidth_fwhm, shape)) {}

Rate pump_photon_flux(Power power, Wavelength pump_wavelength) {
  const double photon_energy_J =
      constants::planck_J_s * constants::speed_of_light_m_per_s / pump_wavelength.m();
  return Rate::per_second(power.W() / photon_energy_J);
}

Rate raw_pair_rate(const SourceSpec& source) {
  const Rate flux = pump_photon_flux(source.pump_power, source.pump_wavelength);
  return Rate::per_second(flux.per_s() * source.conversion_efficiency_per_nm *
                          source.phase_matched_bandwidth.nm());
}

Rate filtered_pair_rate(const SourceSpec& source) {
  if (!(source.filter_bandwidth_fwhm.nm() <= source.phase_matched_bandwidth.nm()))
    throw std::domain_error("filter bandwidth exceeds the phase-matched bandwidth");
  const Rate flux = pump_photon_flux(source.pump_power, source.pump_wavelength);
  return Rate::per_second(flux.per_s() * source.conversion_efficiency_per_nm *
                          source.filter_bandwidth_fwhm.nm());
}

double pairs_per_coherence_time(Rate pair_rate, Duration coherence) {
  if (!(coherence.ps() > 0.0)) throw std::domain_error("coherence time must be positive");
  return pair_rate.per_s() * coherence.s();
}

}  // namespace swapsim
