#include "swapsim/source_model.hpp"

#include <cmath>
#include <stdexcept>

namespace swapsim {

std::vector<PairEvent> sample_pair_emissions(Rate pair_rate, Duration duration,
                                             RandomStream& rng, int source) {
  if (!(duration.ps() >= 0.0)) throw std::domain_error("emission duration must be non-negative");
  std::vector<PairEvent> events;
  if (pair_rate.per_s() <= 0.0) return events;
  events.reserve(static_cast<std::size_t>(pair_rate.per_s() * duration.s() * 1.1) + 16);
  const double mean_gap_ps = 1e12 / pair_rate.per_s();
  double t = rng.exponential(mean_gap_ps);
  while (t < duration.ps()) {
    events.push_back({Duration::picoseconds(t), source, true, true});
    t += rng.exponential(mean_gap_ps);
  }
  return events;
}

long apply_loss(std::vector<PairEvent>& events, const LossChannel& channel, PhotonRole role,
                RandomStream& rng) {
  const double p = channel.transmission.value();
  long alive = 0;
  for (auto& ev : events) {
    bool& flag = (role == PhotonRole::station) ? ev.station_alive : ev.analyzer_alive;
    if (flag && !rng.bernoulli(p)) flag = false;
    if (flag) ++alive;
  }
  return alive;
}

double multipair_density(double pairs_per_coherence) {
  if (!(pairs_per_coherence >= 0.0))
    throw std::domain_error("pairs per coherence time must be non-negative");
  return -std::expm1(-pairs_per_coherence);
}

}  // namespace swapsim
