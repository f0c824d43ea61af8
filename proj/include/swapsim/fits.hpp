#pragma once

#include <cstddef>
#include <vector>

namespace swapsim {

// Weighted nonlinear least-squares problem: data indexed 0..size-1, model
// value and analytic gradient per point. Parameters capped at 4.
class LeastSquaresProblem {
 public:
  virtual ~LeastSquaresProblem() = default;
  virtual std::size_t size() const = 0;
  virtual std::size_t dim() const = 0;
  virtual double target(std::size_t i) const = 0;
  virtual double weight(std::size_t i) const = 0;
  // Model value at point i; writes dim() partials into grad.
  virtual double value(const double* p, std::size_t i, double* grad) const = 0;
  // Parameter-domain guard; steps leaving the domain are rejected.
  virtual bool admissible(const double* /*p*/) const { return true; }
};

struct FitResult {
  std::vector<double> params;
  std::vector<double> errors;  // sqrt of covariance diagonal
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Damped least squares with multiplicative lambda schedule. Relative parameter
// tolerance rel_tol; covariance from the undamped normal matrix at the optimum.
FitResult levenberg_fit(const LeastSquaresProblem& problem, std::vector<double> initial,
                        double rel_tol = 1e-9, int max_iterations = 200);

// Upper regularized incomplete gamma Q(a, x); p-value of a chi-square
// statistic is Q(dof/2, chi2/2).
double gamma_q(double a, double x);

}  // namespace swapsim
