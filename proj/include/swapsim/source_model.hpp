#pragma once

#include <string>
#include <vector>

#include "swapsim/random.hpp"
#include "swapsim/units.hpp"

namespace swapsim {

// Which photon of a pair a loss or routing step acts on: one photon of each
// pair is sent to the joint measurement station, its partner to the local
// analysis interferometer.
enum class PhotonRole { station, analyzer };

// One emitted pair. Photons within a pair are degenerate in this model; the
// two roles differ only in the downstream path. Alive flags track survival
// through loss channels.
struct PairEvent {
  Duration emission_time;
  int source = 0;  // 0 = source a, 1 = source b
  bool station_alive = true;
  bool analyzer_alive = true;
};

// Homogeneous Poisson emission process over [0, duration), sorted in time.
// CW pumping has no clock: inter-arrival times are exponential.
std::vector<PairEvent> sample_pair_emissions(Rate pair_rate, Duration duration,
                                             RandomStream& rng, int source = 0);

// A named Bernoulli thinning stage (coupling, filter peak, interferometer
// insertion, ...). Transmission is a survival probability per photon.
struct LossChannel {
  std::string label;
  Probability transmission;
};

// Thin one photon role across all events; dead photons stay dead. Returns the
// number of photons still alive in that role.
long apply_loss(std::vector<PairEvent>& events, const LossChannel& channel, PhotonRole role,
                RandomStream& rng);

// Probability that at least one extra pair lands within one coherence time of
// a given pair, for Poissonian pair statistics: 1 - exp(-q).
double multipair_density(double pairs_per_coherence);

}  // namespace swapsim
