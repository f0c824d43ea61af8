#pragma once

#include "swapsim/interference.hpp"
#include "swapsim/units.hpp"

namespace swapsim {

// Time grid for the brute-force two-photon amplitude calculation. span is the
// full grid extent allotted to each packet around its own center; the grid is
// widened automatically to cover the packet separation.
struct OracleGrid {
  Duration bin_width = Duration::picoseconds(5.0);
  Duration span = Duration::picoseconds(3000.0);
};

// Output-port splitting of two single-photon packets entering a balanced beam
// splitter with center separation delta, summed over the discretized joint
// amplitude. Normalized so cross + same == 1.
struct OracleSplit {
  double cross_port = 0.0;
  double same_port = 0.0;
};

// Independent route to the cross-port probability: build the two-photon output
// amplitudes on a grid, antisymmetrize/symmetrize explicitly, and sum.
// Partial overlap mu < 1 enters as a mixture with a fully distinguishable
// component. Guards: bin width must resolve the packet (<= sigma_c / 20) and
// the span must cover its tails (>= 8 sigma_c), else GuardError.
OracleSplit oracle_joint_probabilities(const OracleGrid& grid, Duration delta,
                                       const OverlapModel& model);

}  // namespace swapsim
