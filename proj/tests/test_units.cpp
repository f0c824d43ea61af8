#include "doctest.h"

#include <stdexcept>

#include "swapsim/units.hpp"

using namespace swapsim;

namespace {

SourceSpec default_source() { return SourceSpec{}; }

}  // namespace

TEST_CASE("coherence time matches frozen transform-limited values") {
  const Wavelength carrier = Wavelength::nanometres(1560.0);
  // tau_c = K / dnu, dnu = c dlambda / lambda^2, K = 2 ln2 / pi (gaussian).
  CHECK(coherence_time(carrier, Wavelength::picometres(10.0), Lineshape::gaussian).ps() ==
        doctest::Approx(358.2070076836242).epsilon(1e-12));
  CHECK(coherence_time(carrier, Wavelength::picometres(5.0), Lineshape::gaussian).ps() ==
        doctest::Approx(716.4140153672485).epsilon(1e-12));
  // The unfiltered phase-matched band is femtosecond scale.
  CHECK(coherence_time(carrier, Wavelength::nanometres(80.0), Lineshape::gaussian).ps() ==
        doctest::Approx(0.04477587596045302).epsilon(1e-12));
  // K = 1 / pi for a lorentzian profile.
  CHECK(coherence_time(carrier, Wavelength::picometres(10.0), Lineshape::lorentzian).ps() ==
        doctest::Approx(258.39173679841974).epsilon(1e-12));
}

TEST_CASE("coherence time scales inversely with bandwidth") {
  const Wavelength carrier = Wavelength::nanometres(1560.0);
  const double t1 = coherence_time(carrier, Wavelength::picometres(10.0), Lineshape::gaussian).ps();
  const double t2 = coherence_time(carrier, Wavelength::picometres(20.0), Lineshape::gaussian).ps();
  CHECK(t1 == 2.0 * t2);  // power-of-two bandwidth ratio is exact in binary
  const double t3 = coherence_time(carrier, Wavelength::picometres(30.0), Lineshape::gaussian).ps();
  CHECK(t1 == doctest::Approx(3.0 * t3).epsilon(1e-12));
}

TEST_CASE("wave packet caches coherence time and gaussian width") {
  const WavePacket packet(Wavelength::nanometres(1560.0), Wavelength::picometres(10.0),
                          Lineshape::gaussian);
  CHECK(packet.coherence_time().ps() == doctest::Approx(358.2070076836242).epsilon(1e-12));
  CHECK(packet.sigma().ps() == doctest::Approx(152.11651032082).epsilon(1e-12));
  CHECK(packet.sigma().ps() * constants::fwhm_per_sigma == packet.coherence_time().ps());
}

TEST_CASE("pump flux and pair rates match frozen values") {
  const SourceSpec spec = default_source();
  CHECK(pump_photon_flux(spec.pump_power, spec.pump_wavelength).per_s() ==
        doctest::Approx(7853493687661273.0).epsilon(1e-12));
  CHECK(raw_pair_rate(spec).per_s() == doctest::Approx(314139747506.4509).epsilon(1e-12));
  // Filter keeps the 10 pm / 80 nm bandwidth fraction; peak transmission is a
  // separate loss stage.
  CHECK(filtered_pair_rate(spec).per_s() == doctest::Approx(39267468.43830637).epsilon(1e-12));
}

TEST_CASE("pairs per coherence time matches frozen value") {
  const SourceSpec spec = default_source();
  const double q = pairs_per_coherence_time(filtered_pair_rate(spec),
                                            spec.filtered_packet().coherence_time());
  CHECK(q == doctest::Approx(0.014065882368596882).epsilon(1e-12));
}

TEST_CASE("pairs per coherence time is invariant under bandwidth scaling") {
  // Rate grows with the filter bandwidth, coherence time shrinks by the same
  // ratio; q = rate * tau_c cancels. Power-of-two factors are bit-exact.
  SourceSpec spec = default_source();
  const double q0 = pairs_per_coherence_time(filtered_pair_rate(spec),
                                             spec.filtered_packet().coherence_time());
  for (double factor : {2.0, 1024.0}) {
    SourceSpec wide = spec;
    wide.filter_bandwidth_fwhm =
        Wavelength::picometres(spec.filter_bandwidth_fwhm.pm() * factor);
    const double q1 = pairs_per_coherence_time(filtered_pair_rate(wide),
                                               wide.filtered_packet().coherence_time());
    CHECK(q1 == q0);
  }
  SourceSpec odd = spec;
  odd.filter_bandwidth_fwhm = Wavelength::picometres(spec.filter_bandwidth_fwhm.pm() * 3.0);
  const double q3 = pairs_per_coherence_time(filtered_pair_rate(odd),
                                             odd.filtered_packet().coherence_time());
  CHECK(q3 == doctest::Approx(q0).epsilon(1e-12));
}

TEST_CASE("duration arithmetic keeps picosecond semantics") {
  const Duration a = Duration::nanoseconds(1.2);
  CHECK(a.ps() == 1200.0);
  CHECK(Duration::seconds(1.0).ps() == 1e12);
  CHECK((a - Duration::picoseconds(1500.0)).ps() == -300.0);
  CHECK(abs(a - Duration::picoseconds(1500.0)).ps() == 300.0);
  CHECK((a / Duration::picoseconds(600.0)) == 2.0);
  CHECK((0.5 * a).ps() == 600.0);
}

TEST_CASE("unit constructors reject unphysical values") {
  CHECK_THROWS_AS(Wavelength::nanometres(-1.0), std::domain_error);
  CHECK_THROWS_AS(Wavelength::nanometres(0.0), std::domain_error);
  CHECK_THROWS_AS(Rate::per_second(-1.0), std::domain_error);
  CHECK_THROWS_AS(Probability::of(1.5), std::domain_error);
  CHECK_THROWS_AS(Probability::of(-0.1), std::domain_error);
  CHECK_THROWS_AS(Power::milliwatts(-2.0), std::domain_error);
}

TEST_CASE("spectral guards reject inconsistent source parameters") {
  // Filter wider than the phase-matched band cannot pass more pairs than exist.
  SourceSpec spec = default_source();
  spec.filter_bandwidth_fwhm = Wavelength::nanometres(100.0);
  CHECK_THROWS_AS(filtered_pair_rate(spec), std::domain_error);
  // The narrowband coherence-time formula needs bandwidth below the carrier.
  CHECK_THROWS_AS(
      coherence_time(Wavelength::nanometres(1560.0), Wavelength::nanometres(2000.0),
                     Lineshape::gaussian),
      std::domain_error);
  CHECK_THROWS_AS(
      pairs_per_coherence_time(Rate::per_second(1.0), Duration::picoseconds(0.0)),
      std::domain_error);
}
