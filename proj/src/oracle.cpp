#include "swapsim/oracle.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "swapsim/errors.hpp"

namespace swapsim {

OracleSplit oracle_joint_probabilities(const OracleGrid& grid, Duration delta,
                                       const OverlapModel& model) {
  if (!(model.mu >= 0.0 && model.mu <= 1.0))
    throw std::domain_error("overlap factor mu must be in [0,1]");
  const double sc = model.sigma_c.ps();
  if (!(sc > 0.0)) throw std::domain_error("packet width sigma_c must be positive");
  const double h = grid.bin_width.ps();
  if (!(h > 0.0)) throw std::domain_error("grid bin width must be positive");
  if (h > sc / 20.0)
    throw GuardError("grid bin width " + std::to_string(h) + " ps is too coarse: need <= sigma_c/20 = " +
                     std::to_string(sc / 20.0) + " ps");
  if (grid.span.ps() < 8.0 * sc)
    throw GuardError("grid span " + std::to_string(grid.span.ps()) +
                     " ps too short: need >= 8*sigma_c = " + std::to_string(8.0 * sc) + " ps");

  // Grid centered between the packets, wide enough that each packet keeps its
  // full span of room on both sides.
  const double d = delta.ps();
  const double half = grid.span.ps() / 2.0 + std::fabs(d) / 2.0;
  const auto n = static_cast<std::size_t>(std::floor(2.0 * half / h)) + 1;

  // Gaussian amplitudes with parameter sigma_c, discretely normalized so
  // sum |phi|^2 h = 1; their overlap obeys |<phi1|phi2>|^2 = exp(-d^2/(2 sigma_c^2)).
  std::vector<double> phi1(n), phi2(n);
  double n1 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = -half + static_cast<double>(i) * h;
    phi1[i] = std::exp(-(t + d / 2.0) * (t + d / 2.0) / (2.0 * sc * sc));
    phi2[i] = std::exp(-(t - d / 2.0) * (t - d / 2.0) / (2.0 * sc * sc));
    n1 += phi1[i] * phi1[i] * h;
    n2 += phi2[i] * phi2[i] * h;
  }
  for (std::size_t i = 0; i < n; ++i) {
    phi1[i] /= std::sqrt(n1);
    phi2[i] /= std::sqrt(n2);
  }

  // Two clicks at grid times (ta, tb): cross-port amplitude is the exchange
  // difference, same-port the exchange sum. Quarter from the two balanced
  // splitter factors.
  double cross = 0.0, same = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const double direct = phi1[a] * phi2[b];
      const double exchanged = phi1[b] * phi2[a];
      const double anti = direct - exchanged;
      const double sym = direct + exchanged;
      cross += 0.25 * anti * anti;
      same += 0.25 * sym * sym;
    }
  }
  cross *= h * h;
  same *= h * h;

  // Distinguishable component: no exchange term, even split across the four
  // port combinations.
  const double mixed_cross = model.mu * cross + (1.0 - model.mu) * 0.5;
  const double mixed_same = model.mu * same + (1.0 - model.mu) * 0.5;
  const double total = mixed_cross + mixed_same;
  return {mixed_cross / total, mixed_same / total};
}

}  // namespace swapsim
