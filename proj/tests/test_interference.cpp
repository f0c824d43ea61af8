#include "doctest.h"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "swapsim/interference.hpp"
#include "swapsim/random.hpp"
#include "swapsim/units.hpp"

using namespace swapsim;

namespace {

OverlapModel reference_overlap(double mu = 1.0) {
  const WavePacket packet(Wavelength::nanometres(1560.0), Wavelength::picometres(10.0),
                          Lineshape::gaussian);
  return OverlapModel::from_packet(packet, mu);
}

std::vector<Duration> station_jitters() {
  return {Duration::picoseconds(74.0), Duration::picoseconds(105.0)};
}

// Trapezoid-free reference: Simpson integration of the unjittered density
// against the combined two-detector gaussian kernel.
double convolved_density(double delta_ps, const OverlapModel& model, double sigma_j_ps) {
  const int intervals = 240;
  const double half = 6.0 * sigma_j_ps;
  const double h = 2.0 * half / intervals;
  double sum = 0.0;
  double norm = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double x = -half + i * h;
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double kernel = std::exp(-x * x / (2.0 * sigma_j_ps * sigma_j_ps));
    sum += w * kernel * hom_cross_density(Duration::picoseconds(delta_ps - x), model);
    norm += w * kernel;
  }
  return sum / norm;
}

}  // namespace

TEST_CASE("cross-port density closed-form anchors") {
  const OverlapModel ideal = reference_overlap(1.0);
  CHECK(hom_cross_density(Duration::picoseconds(0.0), ideal) == 0.0);
  CHECK(hom_cross_density(ideal.sigma_c, ideal) ==
        doctest::Approx(0.1967346701436833).epsilon(1e-12));
  CHECK(hom_cross_density(ideal.sigma_c * 30.0, ideal) == doctest::Approx(0.5).epsilon(1e-12));
  // Partial overlap floors the dip at (1 - mu)/2.
  const OverlapModel partial = reference_overlap(0.5);
  CHECK(hom_cross_density(Duration::picoseconds(0.0), partial) ==
        doctest::Approx(0.25).epsilon(1e-12));
  // Even in delta.
  CHECK(hom_cross_density(Duration::picoseconds(80.0), ideal) ==
        hom_cross_density(Duration::picoseconds(-80.0), ideal));
}

TEST_CASE("jitter-free measured dip equals the bare density") {
  const OverlapModel model = reference_overlap(0.82);
  const std::vector<Duration> none;
  for (double d : {0.0, 55.0, -140.0, 400.0}) {
    CHECK(measured_dip(Duration::picoseconds(d), model, none) ==
          doctest::Approx(hom_cross_density(Duration::picoseconds(d), model)).epsilon(1e-12));
  }
}

TEST_CASE("measured dip matches numeric convolution") {
  RandomStream rng(2024, "test/convolution");
  for (int trial = 0; trial < 20; ++trial) {
    const double sigma_c = rng.uniform(50.0, 500.0);
    const double mu = rng.uniform(0.0, 1.0);
    const double f1 = rng.uniform(20.0, 300.0);
    const double f2 = rng.uniform(20.0, 300.0);
    const OverlapModel model{mu, Duration::picoseconds(sigma_c)};
    const std::vector<Duration> jit = {Duration::picoseconds(f1), Duration::picoseconds(f2)};
    const double sigma_j = combined_jitter_sigma(jit).ps();
    const double delta = rng.uniform(-3.0 * sigma_c, 3.0 * sigma_c);
    const double direct = measured_dip(Duration::picoseconds(delta), model, jit);
    const double numeric = convolved_density(delta, model, sigma_j);
    CHECK(direct == doctest::Approx(numeric).epsilon(1e-4));
  }
}

TEST_CASE("dip visibility and width under jitter match frozen values") {
  const auto jit = station_jitters();
  CHECK(combined_jitter_sigma(jit).ps() == doctest::Approx(54.5503332594183).epsilon(1e-12));
  CHECK(dip_visibility(reference_overlap(1.0), jit) ==
        doctest::Approx(0.9413040170869547).epsilon(1e-12));
  CHECK(dip_visibility(reference_overlap(0.82), jit) ==
        doctest::Approx(0.7718692940113028).epsilon(1e-12));
  CHECK(dip_fwhm(reference_overlap(0.82), jit).ps() ==
        doctest::Approx(380.5433751277981).epsilon(1e-12));
  // No jitter: visibility is mu, width is the coherence time.
  const std::vector<Duration> none;
  CHECK(dip_visibility(reference_overlap(0.82), none) == doctest::Approx(0.82).epsilon(1e-12));
  CHECK(dip_fwhm(reference_overlap(1.0), none).ps() ==
        doctest::Approx(358.2070076836242).epsilon(1e-12));
}

TEST_CASE("dip visibility decreases as jitter grows") {
  const OverlapModel model = reference_overlap(0.9);
  double prev = 1.0;
  for (double f : {0.0, 50.0, 100.0, 200.0, 400.0}) {
    const std::vector<Duration> jit = {Duration::picoseconds(f), Duration::picoseconds(f)};
    const double v = dip_visibility(model, jit);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("time-resolved projection needs resolvable clicks") {
  const Duration threshold = Duration::picoseconds(358.0);
  const BSMOutcome far = classify_bsm(Duration::picoseconds(1000.0),
                                      Duration::picoseconds(2200.0), threshold);
  CHECK(far.success);
  CHECK(far.tau.ps() == 1200.0);
  const BSMOutcome reversed = classify_bsm(Duration::picoseconds(2200.0),
                                           Duration::picoseconds(1000.0), threshold);
  CHECK(reversed.success);
  CHECK(reversed.tau.ps() == -1200.0);
  const BSMOutcome close = classify_bsm(Duration::picoseconds(1000.0),
                                        Duration::picoseconds(1100.0), threshold);
  CHECK_FALSE(close.success);
}

namespace {

AnalyzerSpec analyzer_with_phase(double phase) {
  AnalyzerSpec a;
  a.path_difference = Duration::nanoseconds(1.2);
  a.phase = phase;
  return a;
}

JointOutcomeTable middle_bin_table(double alpha, double beta, double v) {
  return swapped_pair_probabilities(Duration::nanoseconds(1.2), analyzer_with_phase(alpha),
                                    analyzer_with_phase(beta), v,
                                    Duration::picoseconds(180.0));
}

}  // namespace

TEST_CASE("joint outcome table is normalized") {
  RandomStream rng(5, "test/normalization");
  for (int trial = 0; trial < 10; ++trial) {
    const double alpha = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double beta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double v = rng.uniform(0.0, 1.0);
    const double tau = rng.uniform(-2000.0, 2000.0);
    const JointOutcomeTable table = swapped_pair_probabilities(
        Duration::picoseconds(tau), analyzer_with_phase(alpha), analyzer_with_phase(beta), v,
        Duration::picoseconds(180.0));
    CHECK(table.total() == doctest::Approx(1.0).epsilon(1e-12));
    for (PortSign pa : {PortSign::plus, PortSign::minus})
      for (Slot sa : {Slot::early, Slot::middle, Slot::late})
        for (PortSign pb : {PortSign::plus, PortSign::minus})
          for (Slot sb : {Slot::early, Slot::middle, Slot::late})
            CHECK(table.at(pa, sa, pb, sb) >= 0.0);
  }
}

TEST_CASE("middle-slot correlation follows the phase difference") {
  for (double v : {1.0, 0.731, 0.63}) {
    CHECK(middle_bin_table(0.0, 0.0, v).middle_slot_correlation() ==
          doctest::Approx(v).epsilon(1e-12));
    CHECK(middle_bin_table(0.6, 0.6 + std::numbers::pi, v).middle_slot_correlation() ==
          doctest::Approx(-v).epsilon(1e-12));
    CHECK(middle_bin_table(0.0, std::numbers::pi / 2.0, v).middle_slot_correlation() ==
          doctest::Approx(0.0).epsilon(1e-12));
    const double delta = 0.9;
    CHECK(middle_bin_table(1.4, 1.4 - delta, v).middle_slot_correlation() ==
          doctest::Approx(v * std::cos(delta)).epsilon(1e-12));
  }
}

TEST_CASE("uncorrelated pair gives a flat table") {
  const JointOutcomeTable table = middle_bin_table(0.3, 1.1, 0.0);
  CHECK(table.middle_slot_correlation() == doctest::Approx(0.0).epsilon(1e-12));
  // All four middle-middle cells equal.
  const double ref = table.at(PortSign::plus, Slot::middle, PortSign::plus, Slot::middle);
  CHECK(table.at(PortSign::plus, Slot::middle, PortSign::minus, Slot::middle) ==
        doctest::Approx(ref).epsilon(1e-12));
  CHECK(table.at(PortSign::minus, Slot::middle, PortSign::plus, Slot::middle) ==
        doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("single-side marginals carry no phase information") {
  // Fringes must only appear in the coincidence basis; singles are flat in
  // the analyzer phases, slots weighted 1/4, 1/2, 1/4.
  const JointOutcomeTable t1 = middle_bin_table(0.0, 0.0, 0.9);
  const JointOutcomeTable t2 = middle_bin_table(2.1, 0.7, 0.9);
  for (const JointOutcomeTable* t : {&t1, &t2}) {
    for (PortSign p : {PortSign::plus, PortSign::minus}) {
      CHECK(t->marginal_a(p, Slot::early) == doctest::Approx(0.125).epsilon(1e-12));
      CHECK(t->marginal_a(p, Slot::middle) == doctest::Approx(0.25).epsilon(1e-12));
      CHECK(t->marginal_a(p, Slot::late) == doctest::Approx(0.125).epsilon(1e-12));
      CHECK(t->marginal_b(p, Slot::early) == doctest::Approx(0.125).epsilon(1e-12));
      CHECK(t->marginal_b(p, Slot::middle) == doctest::Approx(0.25).epsilon(1e-12));
      CHECK(t->marginal_b(p, Slot::late) == doctest::Approx(0.125).epsilon(1e-12));
    }
  }
}

TEST_CASE("herald separation outside the window switches interference off") {
  const double v = 0.8;
  const Duration window = Duration::picoseconds(180.0);
  // Inside: tau within the window of the 1.2 ns imbalance, either sign.
  for (double tau : {1200.0, -1200.0, 1200.0 + 179.0, 1200.0 - 179.0}) {
    const JointOutcomeTable t = swapped_pair_probabilities(
        Duration::picoseconds(tau), analyzer_with_phase(0.0), analyzer_with_phase(0.0), v,
        window);
    CHECK(t.middle_slot_correlation() == doctest::Approx(v).epsilon(1e-12));
  }
  // Outside: middle-slot statistics become flat.
  for (double tau : {1200.0 + 181.0, 1200.0 - 181.0, 600.0, 2400.0}) {
    const JointOutcomeTable t = swapped_pair_probabilities(
        Duration::picoseconds(tau), analyzer_with_phase(0.0), analyzer_with_phase(0.0), v,
        window);
    CHECK(t.middle_slot_correlation() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("joint table sampling reproduces its probabilities") {
  const JointOutcomeTable table = middle_bin_table(0.0, 0.4, 0.731);
  RandomStream rng(77, "analyzer/joint");
  const int draws = 200000;
  std::array<long, 36> counts{};
  long mm_total = 0;
  double mm_signed = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto o = table.sample(rng);
    ++counts[static_cast<std::size_t>(
        JointOutcomeTable::index(o.port_a, o.slot_a, o.port_b, o.slot_b))];
    if (o.slot_a == Slot::middle && o.slot_b == Slot::middle) {
      ++mm_total;
      mm_signed += sign_of(o.port_a) * sign_of(o.port_b);
    }
  }
  for (PortSign pa : {PortSign::plus, PortSign::minus})
    for (Slot sa : {Slot::early, Slot::middle, Slot::late})
      for (PortSign pb : {PortSign::plus, PortSign::minus})
        for (Slot sb : {Slot::early, Slot::middle, Slot::late}) {
          const double p = table.at(pa, sa, pb, sb);
          const double n =
              counts[static_cast<std::size_t>(JointOutcomeTable::index(pa, sa, pb, sb))];
          CHECK(std::fabs(n - p * draws) <= 4.0 * std::sqrt(draws * p * (1 - p)) + 4.0);
        }
  const double e_hat = mm_signed / static_cast<double>(mm_total);
  const double e_true = table.middle_slot_correlation();
  CHECK(std::fabs(e_hat - e_true) < 4.0 / std::sqrt(static_cast<double>(mm_total)));
}

TEST_CASE("conditional visibility matches frozen reference values") {
  const auto jit = station_jitters();
  const double q = 0.014065882368596882;
  const ConditionalVisibility v =
      conditional_visibility(reference_overlap(0.82), jit, q, q);
  CHECK(v.temporal_factor == doctest::Approx(0.7718692940113028).epsilon(1e-12));
  CHECK(v.multipair_factor == doctest::Approx(0.9467334354501615).epsilon(1e-12));
  CHECK(v.value == doctest::Approx(0.7307544684378116).epsilon(1e-12));
  CHECK(v.mode == MultipairMode::analytic);
}

TEST_CASE("conditional visibility is 1 only in the ideal limit") {
  const std::vector<Duration> none;
  const ConditionalVisibility ideal =
      conditional_visibility(reference_overlap(1.0), none, 0.0, 0.0);
  CHECK(ideal.value == doctest::Approx(1.0).epsilon(1e-12));
  // Monotone non-increasing in jitter and in either pair density.
  const auto jit = station_jitters();
  const double q = 0.014;
  const double base = conditional_visibility(reference_overlap(1.0), jit, q, q).value;
  const std::vector<Duration> worse = {Duration::picoseconds(150.0),
                                       Duration::picoseconds(150.0)};
  CHECK(conditional_visibility(reference_overlap(1.0), worse, q, q).value < base);
  CHECK(conditional_visibility(reference_overlap(1.0), jit, 3.0 * q, q).value < base);
  CHECK(conditional_visibility(reference_overlap(1.0), jit, q, 3.0 * q).value < base);
}

TEST_CASE("monte carlo multipair factor agrees with the analytic form when rare") {
  const std::vector<Duration> none;
  MultipairSettings mc;
  mc.mode = MultipairMode::monte_carlo;
  mc.trials = 400000;
  mc.seed = 99;
  const double q = 0.02;
  const double analytic = conditional_visibility(reference_overlap(1.0), none, q, q).value;
  const ConditionalVisibility sampled =
      conditional_visibility(reference_overlap(1.0), none, q, q, mc);
  CHECK(sampled.mode == MultipairMode::monte_carlo);
  CHECK(std::fabs(sampled.value - analytic) < 0.005);
  // At high pair density the first-order analytic form is no longer valid and
  // the two estimators must visibly separate.
  const double q_hot = 0.2;
  const double analytic_hot =
      conditional_visibility(reference_overlap(1.0), none, q_hot, q_hot).value;
  const ConditionalVisibility sampled_hot =
      conditional_visibility(reference_overlap(1.0), none, q_hot, q_hot, mc);
  CHECK(std::fabs(sampled_hot.value - analytic_hot) > 0.05);
}

TEST_CASE("interference inputs are guarded") {
  CHECK_THROWS_AS(reference_overlap(1.5), std::domain_error);
  CHECK_THROWS_AS(reference_overlap(-0.1), std::domain_error);
  const OverlapModel bad{0.5, Duration::picoseconds(0.0)};
  CHECK_THROWS_AS(hom_cross_density(Duration::picoseconds(0.0), bad), std::domain_error);
  CHECK_THROWS_AS(
      swapped_pair_probabilities(Duration::picoseconds(1200.0), analyzer_with_phase(0.0),
                                 analyzer_with_phase(0.0), 1.5, Duration::picoseconds(100.0)),
      std::domain_error);
  CHECK_THROWS_AS(
      swapped_pair_probabilities(Duration::picoseconds(1200.0), analyzer_with_phase(0.0),
                                 analyzer_with_phase(0.0), 0.5, Duration::picoseconds(-1.0)),
      std::domain_error);
  AnalyzerSpec flat = analyzer_with_phase(0.0);
  flat.path_difference = Duration::picoseconds(0.0);
  CHECK_THROWS_AS(
      swapped_pair_probabilities(Duration::picoseconds(1200.0), flat, analyzer_with_phase(0.0),
                                 0.5, Duration::picoseconds(100.0)),
      std::domain_error);
  const auto jit = station_jitters();
  CHECK_THROWS_AS(conditional_visibility(reference_overlap(1.0), jit, -0.1, 0.0),
                  std::domain_error);
  CHECK_THROWS_AS(classify_bsm(Duration::picoseconds(0.0), Duration::picoseconds(100.0),
                               Duration::picoseconds(-1.0)),
                  std::domain_error);
}
