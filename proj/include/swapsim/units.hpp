#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace swapsim {

namespace constants {
inline constexpr double speed_of_light_m_per_s = 2.99792458e8;
inline constexpr double planck_J_s = 6.62607015e-34;
// FWHM = 2*sqrt(2*ln2) * sigma for a gaussian profile
inline constexpr double fwhm_per_sigma = 2.3548200450309493;
}  // namespace constants

// Signed time interval, picoseconds internally. Sign carries ordering
// information (e.g. detection time differences); call sites that need a
// positive quantity must check explicitly.
class Duration {
 public:
  constexpr Duration() = default;

  static constexpr Duration picoseconds(double v) { return Duration(v); }
  static constexpr Duration nanoseconds(double v) { return Duration(v * 1e3); }
  static constexpr Duration microseconds(double v) { return Duration(v * 1e6); }
  static constexpr Duration seconds(double v) { return Duration(v * 1e12); }

  constexpr double ps() const { return ps_; }
  constexpr double ns() const { return ps_ * 1e-3; }
  constexpr double s() const { return ps_ * 1e-12; }

  constexpr Duration operator+(Duration o) const { return Duration(ps_ + o.ps_); }
  constexpr Duration operator-(Duration o) const { return Duration(ps_ - o.ps_); }
  constexpr Duration operator-() const { return Duration(-ps_); }
  constexpr Duration operator*(double k) const { return Duration(ps_ * k); }
  constexpr Duration operator/(double k) const { return Duration(ps_ / k); }
  constexpr double operator/(Duration o) const { return ps_ / o.ps_; }
  constexpr auto operator<=>(const Duration&) const = default;

 private:
  explicit constexpr Duration(double ps) : ps_(ps) {}
  double ps_ = 0.0;
};

inline constexpr Duration operator*(double k, Duration d) { return d * k; }
inline Duration abs(Duration d) { return Duration::picoseconds(std::fabs(d.ps())); }

// Optical wavelength, nanometres internally. Strictly positive.
class Wavelength {
 public:
  static Wavelength nanometres(double v) {
    if (!(v > 0.0)) throw std::domain_error("wavelength must be positive");
    return Wavelength(v);
  }
  static Wavelength picometres(double v) { return nanometres(v * 1e-3); }
  static Wavelength micrometres(double v) { return nanometres(v * 1e3); }

  double nm() const { return nm_; }
  double pm() const { return nm_ * 1e3; }
  double m() const { return nm_ * 1e-9; }

  auto operator<=>(const Wavelength&) const = default;

 private:
  explicit Wavelength(double nm) : nm_(nm) {}
  double nm_;
};

// Event rate, s^-1 internally. Non-negative.
class Rate {
 public:
  constexpr Rate() = default;
  static Rate per_second(double v) {
    if (!(v >= 0.0)) throw std::domain_error("rate must be non-negative");
    return Rate(v);
  }
  double per_s() const { return per_s_; }
  auto operator<=>(const Rate&) const = default;

 private:
  explicit constexpr Rate(double v) : per_s_(v) {}
  double per_s_ = 0.0;
};

// Optical power, milliwatts internally. Non-negative.
class Power {
 public:
  static Power milliwatts(double v) {
    if (!(v >= 0.0)) throw std::domain_error("power must be non-negative");
    return Power(v);
  }
  static Power watts(double v) { return milliwatts(v * 1e3); }
  static Power microwatts(double v) { return milliwatts(v * 1e-3); }
  double mW() const { return mW_; }
  double W() const { return mW_ * 1e-3; }

 private:
  explicit Power(double mW) : mW_(mW) {}
  double mW_;
};

// Dimensionless probability or transmission, clamped to nothing: values
// outside [0,1] are rejected at construction.
class Probability {
 public:
  constexpr Probability() = default;
  static Probability of(double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("probability must be in [0,1]");
    return Probability(v);
  }
  constexpr double value() const { return v_; }

 private:
  explicit constexpr Probability(double v) : v_(v) {}
  double v_ = 0.0;
};

enum class Lineshape { gaussian, lorentzian };

// Single-photon wave packet after spectral filtering. The coherence time is
// derived from the filter profile at construction and cached.
class WavePacket {
 public:
  WavePacket(Wavelength center, Wavelength bandwidth_fwhm, Lineshape shape);

  Wavelength center() const { return center_; }
  Wavelength bandwidth_fwhm() const { return bandwidth_; }
  Lineshape lineshape() const { return shape_; }
  Duration coherence_time() const { return coherence_time_; }
  // Gaussian-equivalent amplitude width used by the interference engine.
  Duration sigma() const { return coherence_time_ / constants::fwhm_per_sigma; }

 private:
  Wavelength center_;
  Wavelength bandwidth_;
  Lineshape shape_;
  Duration coherence_time_;
};

// Pump + crystal + filter parameters of one SPDC source arm.
struct SourceSpec {
  Power pump_power = Power::milliwatts(2.0);
  Wavelength pump_wavelength = Wavelength::nanometres(780.027);
  // Pair emission probability per pump photon per nm of phase-matched bandwidth.
  double conversion_efficiency_per_nm = 5.0e-7;
  Wavelength phase_matched_bandwidth = Wavelength::nanometres(80.0);
  Wavelength filter_center = Wavelength::nanometres(1560.0);
  Wavelength filter_bandwidth_fwhm = Wavelength::picometres(10.0);
  Lineshape filter_lineshape = Lineshape::gaussian;
  Probability filter_transmission = Probability::of(0.5);
  Probability coupling_efficiency = Probability::of(0.25);

  WavePacket filtered_packet() const {
    return WavePacket(filter_center, filter_bandwidth_fwhm, filter_lineshape);
  }
};

// Transform-limited coherence time of a filtered packet:
// delta_nu = c * delta_lambda / lambda^2, tau_c = K / delta_nu with
// K = 2 ln2 / pi (gaussian) or 1 / pi (lorentzian).
Duration coherence_time(Wavelength center, Wavelength bandwidth_fwhm, Lineshape shape);

// Photon flux of a CW pump beam: P * lambda / (h c).
Rate pump_photon_flux(Power power, Wavelength pump_wavelength);

// Pair rate over the full phase-matched bandwidth, before filtering.
Rate raw_pair_rate(const SourceSpec& source);

// Pair rate surviving the spectral filter (bandwidth ratio only; the filter
// peak transmission is a separate loss channel applied downstream).
Rate filtered_pair_rate(const SourceSpec& source);

// Mean emitted pairs per coherence time: the multi-pair contamination scale.
double pairs_per_coherence_time(Rate pair_rate, Duration coherence);

}  // namespace swapsim
