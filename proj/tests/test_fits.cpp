#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "swapsim/fits.hpp"
#include "swapsim/random.hpp"

using namespace swapsim;

namespace {

// y = a * exp(-b * t) sampled on a fixed grid, optional per-point noise.
class DecayProblem : public LeastSquaresProblem {
 public:
  DecayProblem(double a, double b, std::size_t n, double noise_sigma, std::uint64_t seed)
      : weight_(noise_sigma > 0.0 ? 1.0 / (noise_sigma * noise_sigma) : 1.0) {
    RandomStream rng(seed, "test/decay");
    for (std::size_t i = 0; i < n; ++i) {
      const double t = 5.0 * static_cast<double>(i) / static_cast<double>(n - 1);
      double y = a * std::exp(-b * t);
      if (noise_sigma > 0.0) y += rng.gaussian(0.0, noise_sigma);
      ts_.push_back(t);
      ys_.push_back(y);
    }
  }

  std::size_t size() const override { return ts_.size(); }
  std::size_t dim() const override { return 2; }
  double target(std::size_t i) const override { return ys_[i]; }
  double weight(std::size_t) const override { return weight_; }
  double value(const double* p, std::size_t i, double* grad) const override {
    const double e = std::exp(-p[1] * ts_[i]);
    grad[0] = e;
    grad[1] = -p[0] * ts_[i] * e;
    return p[0] * e;
  }
  bool admissible(const double* p) const override { return p[1] > 0.0; }

 private:
  std::vector<double> ts_;
  std::vector<double> ys_;
  double weight_;
};

}  // namespace

TEST_CASE("fit recovers noiseless parameters to machine precision") {
  const DecayProblem problem(2.3, 0.7, 50, 0.0, 0);
  const FitResult res = levenberg_fit(problem, {1.0, 1.0});
  REQUIRE(res.converged);
  CHECK(res.params[0] == doctest::Approx(2.3).epsilon(1e-8));
  CHECK(res.params[1] == doctest::Approx(0.7).epsilon(1e-8));
  CHECK(res.chi2 < 1e-12);
}

TEST_CASE("fit recovers noisy parameters within quoted errors") {
  const double sigma = 0.01;
  const DecayProblem problem(2.3, 0.7, 200, sigma, 77);
  const FitResult res = levenberg_fit(problem, {1.0, 1.0});
  REQUIRE(res.converged);
  REQUIRE(res.errors.size() == 2);
  CHECK(res.errors[0] > 0.0);
  CHECK(res.errors[1] > 0.0);
  CHECK(std::fabs(res.params[0] - 2.3) < 4.0 * res.errors[0]);
  CHECK(std::fabs(res.params[1] - 0.7) < 4.0 * res.errors[1]);
  // Weighted chi2 with correct weights concentrates near dof.
  const double dof = 200.0 - 2.0;
  CHECK(std::fabs(res.chi2 - dof) < 5.0 * std::sqrt(2.0 * dof));
}

TEST_CASE("fit rejects bad setups") {
  const DecayProblem problem(2.3, 0.7, 50, 0.0, 0);
  CHECK_THROWS_AS(levenberg_fit(problem, {1.0}), std::domain_error);
  // Inadmissible starting point: decay constant must be positive.
  CHECK_THROWS_AS(levenberg_fit(problem, {1.0, -1.0}), std::domain_error);
}

TEST_CASE("fit steps never leave the admissible domain") {
  // Start near the domain edge; every accepted iterate must keep b > 0.
  const DecayProblem problem(2.3, 0.7, 50, 0.0, 0);
  const FitResult res = levenberg_fit(problem, {0.1, 1e-3});
  REQUIRE(res.converged);
  CHECK(res.params[1] > 0.0);
  CHECK(res.params[1] == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("upper incomplete gamma matches closed forms") {
  // Q(1/2, x) = erfc(sqrt(x)); Q(1, x) = exp(-x); Q(2, x) = exp(-x)(1 + x);
  // Q(3, x) = exp(-x)(1 + x + x^2/2).
  for (double x : {0.01, 0.3, 1.0, 2.0, 5.0, 20.0}) {
    CHECK(gamma_q(0.5, x) == doctest::Approx(std::erfc(std::sqrt(x))).epsilon(1e-10));
    CHECK(gamma_q(1.0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-10));
    CHECK(gamma_q(2.0, x) == doctest::Approx(std::exp(-x) * (1.0 + x)).epsilon(1e-10));
    CHECK(gamma_q(3.0, x) ==
          doctest::Approx(std::exp(-x) * (1.0 + x + 0.5 * x * x)).epsilon(1e-10));
  }
  CHECK(gamma_q(2.5, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  // Monotone decreasing in the statistic.
  CHECK(gamma_q(3.0, 1.0) > gamma_q(3.0, 2.0));
  CHECK_THROWS_AS(gamma_q(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(gamma_q(1.0, -1.0), std::domain_error);
}

TEST_CASE("chi-square p-values behave like a significance test") {
  // p = Q(dof/2, chi2/2): 0.5-ish at chi2 == dof, tiny for gross excess.
  const double p_mid = gamma_q(5.0, 5.0);
  CHECK(p_mid > 0.3);
  CHECK(p_mid < 0.7);
  CHECK(gamma_q(5.0, 50.0) < 1e-6);
  CHECK(gamma_q(5.0, 0.1) > 0.999);
}
