#include "swapsim/fits.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace swapsim {

namespace {

constexpr std::size_t kMaxDim = 4;

// Solve A x = b for small symmetric systems, partial pivoting. Returns false
// when singular.
bool solve(std::array<double, kMaxDim * kMaxDim> a, std::array<double, kMaxDim> b,
           std::size_t n, std::array<double, kMaxDim>& x) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
    if (std::fabs(a[pivot * n + col]) < 1e-300) return false;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t ri = n; ri-- > 0;) {
    double s = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri * n + c] * x[c];
    x[ri] = s / a[ri * n + ri];
  }
  return true;
}

// Inverse via n solves against unit vectors; adequate at this size.
bool invert(const std::array<double, kMaxDim * kMaxDim>& a, std::size_t n,
            std::array<double, kMaxDim * kMaxDim>& inv) {
  for (std::size_t c = 0; c < n; ++c) {
    std::array<double, kMaxDim> e{};
    e[c] = 1.0;
    std::array<double, kMaxDim> x{};
    if (!solve(a, e, n, x)) return false;
    for (std::size_t r = 0; r < n; ++r) inv[r * n + c] = x[r];
  }
  return true;
}

struct NormalEquations {
  std::array<double, kMaxDim * kMaxDim> a{};
  std::array<double, kMaxDim> g{};
  double chi2 = 0.0;
};

NormalEquations accumulate(const LeastSquaresProblem& prob, const std::vector<double>& p) {
  NormalEquations ne;
  const std::size_t n = prob.dim();
  std::array<double, kMaxDim> grad{};
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double f = prob.value(p.data(), i, grad.data());
    const double w = prob.weight(i);
    const double r = prob.target(i) - f;
    ne.chi2 += w * r * r;
    for (std::size_t j = 0; j < n; ++j) {
      ne.g[j] += w * r * grad[j];
      for (std::size_t k = 0; k <= j; ++k) ne.a[j * n + k] += w * grad[j] * grad[k];
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k) ne.a[j * n + k] = ne.a[k * n + j];
  return ne;
}

}  // namespace

FitResult levenberg_fit(const LeastSquaresProblem& problem, std::vector<double> initial,
                        double rel_tol, int max_iterations) {
  const std::size_t n = problem.dim();
  if (n == 0 || n > kMaxDim) throw std::domain_error("unsupported parameter count");
  if (initial.size() != n) throw std::domain_error("initial guess dimension mismatch");
  if (!problem.admissible(initial.data()))
    throw std::domain_error("initial guess outside the admissible domain");

  FitResult res;
  res.params = std::move(initial);
  double lambda = 1e-3;
  NormalEquations ne = accumulate(problem, res.params);
  res.chi2 = ne.chi2;

  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    auto damped = ne.a;
    for (std::size_t j = 0; j < n; ++j) {
      // Keep the damping active even for vanishing curvature entries.
      const double d = ne.a[j * n + j];
      damped[j * n + j] = d + lambda * (d > 0.0 ? d : 1.0);
    }
    std::array<double, kMaxDim> step{};
    if (!solve(damped, ne.g, n, step)) {
      lambda *= 10.0;
      if (lambda > 1e12) break;
      continue;
    }
    std::vector<double> trial = res.params;
    for (std::size_t j = 0; j < n; ++j) trial[j] += step[j];

    bool accept = problem.admissible(trial.data());
    NormalEquations trial_ne;
    if (accept) {
      trial_ne = accumulate(problem, trial);
      accept = trial_ne.chi2 <= ne.chi2;
    }
    if (!accept) {
      lambda *= 10.0;
      if (lambda > 1e12) break;
      continue;
    }

    double max_rel = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      // mixed scale: parameters sitting at zero converge on absolute steps
      max_rel = std::max(max_rel, std::fabs(step[j]) / (std::fabs(trial[j]) + 1.0));
    res.params = std::move(trial);
    ne = trial_ne;
    res.chi2 = ne.chi2;
    lambda = std::max(lambda * 0.1, 1e-15);
    if (max_rel < rel_tol) {
      res.converged = true;
      break;
    }
  }

  std::array<double, kMaxDim * kMaxDim> cov{};
  res.errors.assign(n, 0.0);
  if (invert(ne.a, n, cov)) {
    for (std::size_t j = 0; j < n; ++j)
      res.errors[j] = cov[j * n + j] > 0.0 ? std::sqrt(cov[j * n + j]) : 0.0;
  }
  return res;
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_q requires a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    // Lower series: P(a,x) = x^a e^-x / Gamma(a) * sum x^n / (a)_{n+1}
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 500; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-15) break;
    }
    return 1.0 - std::exp(log_prefactor) * sum;
  }
  // Upper continued fraction (Lentz).
  double b = x + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(log_prefactor) * h;
}

}  // namespace swapsim
