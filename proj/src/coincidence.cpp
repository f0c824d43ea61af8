#include "swapsim/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "swapsim/errors.hpp"
#include "swapsim/fits.hpp"

namespace swapsim {

namespace {

struct SignedClick {
  double time_ps;
  PortSign port;
};

// Frontier over a sorted stream: clicks before the window are skipped for
// good, the first in-window click is consumed. Valid because the reference
// times are non-decreasing across queries.
class Frontier {
 public:
  explicit Frontier(std::vector<SignedClick> clicks) : clicks_(std::move(clicks)) {}

  std::optional<SignedClick> take(double lo, double hi) {
    while (next_ < clicks_.size() && clicks_[next_].time_ps < lo) ++next_;
    if (next_ < clicks_.size() && clicks_[next_].time_ps <= hi) return clicks_[next_++];
    return std::nullopt;
  }

 private:
  std::vector<SignedClick> clicks_;
  std::size_t next_ = 0;
};

}  // namespace

std::vector<CoincidenceEvent> find_coincidences(const TimestampTable& table,
                                                const DetectorRoles& roles, Duration window_bsm,
                                                Duration window_outer) {
  if (!(window_bsm.ps() > 0.0) || !(window_outer.ps() > 0.0))
    throw std::domain_error("coincidence windows must be positive");

  std::vector<double> station1, station2;
  std::vector<SignedClick> side_a, side_b;
  double prev = -std::numeric_limits<double>::infinity();
  for (const TimestampRow& row : table.rows()) {
    if (row.time_ps < prev) throw std::domain_error("timestamp table must be sorted by time");
    prev = row.time_ps;
    const double t = row.time_ps;
    if (row.detector_id == roles.station_1) {
      station1.push_back(t);
    } else if (row.detector_id == roles.station_2) {
      station2.push_back(t);
    } else if (row.detector_id == roles.analyzer_a_plus) {
      side_a.push_back({t, PortSign::plus});
    } else if (row.detector_id == roles.analyzer_a_minus) {
      side_a.push_back({t, PortSign::minus});
    } else if (row.detector_id == roles.analyzer_b_plus) {
      side_b.push_back({t, PortSign::plus});
    } else if (row.detector_id == roles.analyzer_b_minus) {
      side_b.push_back({t, PortSign::minus});
    }
    // Unrecognized ids are ignored: external tables may carry extra channels.
  }

  Frontier frontier_a(std::move(side_a));
  Frontier frontier_b(std::move(side_b));

  std::vector<CoincidenceEvent> events;
  const double wb = window_bsm.ps();
  const double wo = window_outer.ps();
  std::size_t j = 0;
  for (const double t1 : station1) {
    while (j < station2.size() && station2[j] < t1 - wb) ++j;
    if (j == station2.size()) break;
    const double t2 = station2[j];
    if (t2 > t1 + wb) continue;  // next station-1 click may still reach it
    ++j;

    CoincidenceEvent ev;
    ev.station_time_1 = Duration::picoseconds(t1);
    ev.station_time_2 = Duration::picoseconds(t2);
    ev.tau = ev.station_time_2 - ev.station_time_1;
    // Analyzer photons of a heralded pair arrive near the later station click
    // (short path from the later emission, long path from the earlier one).
    const double t_ref = std::max(t1, t2);
    if (auto a = frontier_a.take(t_ref - wo, t_ref + wo))
      ev.analyzer_a = AnalyzerClick{a->port, Duration::picoseconds(a->time_ps)};
    if (auto b = frontier_b.take(t_ref - wo, t_ref + wo))
      ev.analyzer_b = AnalyzerClick{b->port, Duration::picoseconds(b->time_ps)};
    ev.fold = 2 + (ev.analyzer_a ? 1 : 0) + (ev.analyzer_b ? 1 : 0);
    events.push_back(ev);
  }
  return events;
}

Histogram hom_histogram(const std::vector<CoincidenceEvent>& events, Duration bin_width,
                        Duration span) {
  if (!(bin_width.ps() > 0.0)) throw std::domain_error("bin width must be positive");
  if (!(span.ps() > 0.0)) throw std::domain_error("span must be positive");

  Histogram h;
  h.bin_width_ps = bin_width.ps();
  // Odd bin count keeps one bin centered on tau = 0.
  const auto half = static_cast<std::size_t>(std::ceil(span.ps() / bin_width.ps() - 0.5));
  const std::size_t n = 2 * half + 1;
  h.lo_ps = -(static_cast<double>(half) + 0.5) * h.bin_width_ps;
  h.counts.assign(n, 0.0);
  h.variances.assign(n, 0.0);
  for (const CoincidenceEvent& ev : events) {
    if (ev.fold != 4) continue;
    const double x = (ev.tau.ps() - h.lo_ps) / h.bin_width_ps;
    if (x < 0.0) continue;
    const auto i = static_cast<std::size_t>(x);
    if (i >= n) continue;
    h.counts[i] += 1.0;
    h.variances[i] += 1.0;
  }
  return h;
}

namespace {

// baseline * (1 - V exp(-tau^2 / 2 s^2)); params p = {baseline, V, s}.
class DipProblem final : public LeastSquaresProblem {
 public:
  explicit DipProblem(const Histogram& h) : h_(h) {}
  std::size_t size() const override { return h_.size(); }
  std::size_t dim() const override { return 3; }
  double target(std::size_t i) const override { return h_.counts[i]; }
  double weight(std::size_t i) const override {
    // Poisson variance; empty bins get unit variance to stay in the fit.
    return 1.0 / std::max(h_.variances[i], 1.0);
  }
  double value(const double* p, std::size_t i, double* grad) const override {
    const double tau = h_.center(i);
    const double e = std::exp(-tau * tau / (2.0 * p[2] * p[2]));
    grad[0] = 1.0 - p[1] * e;
    grad[1] = -p[0] * e;
    grad[2] = -p[0] * p[1] * e * tau * tau / (p[2] * p[2] * p[2]);
    return p[0] * (1.0 - p[1] * e);
  }
  bool admissible(const double* p) const override {
    return p[0] > 0.0 && p[1] >= 0.0 && p[1] <= 1.0 && p[2] > 0.0;
  }

 private:
  const Histogram& h_;
};

}  // namespace

DipFit fit_dip(const Histogram& histogram) {
  const std::size_t n = histogram.size();
  std::size_t nonempty = 0;
  for (double c : histogram.counts) nonempty += c > 0.0 ? 1 : 0;
  if (nonempty < 7) throw std::domain_error("dip fit needs at least 7 nonempty bins");

  // Wings: the outer quarter on each side must carry counts, otherwise the
  // baseline is unconstrained.
  const std::size_t quarter = std::max<std::size_t>(1, n / 4);
  double left_wing = 0.0, right_wing = 0.0;
  for (std::size_t i = 0; i < quarter; ++i) {
    left_wing += histogram.counts[i];
    right_wing += histogram.counts[n - 1 - i];
  }
  if (left_wing <= 0.0 || right_wing <= 0.0)
    throw std::domain_error("dip fit needs populated wings on both sides");

  const double baseline0 = (left_wing + right_wing) / static_cast<double>(2 * quarter);
  double min_count = histogram.counts[0];
  for (double c : histogram.counts) min_count = std::min(min_count, c);
  const double v0 = std::clamp(1.0 - min_count / baseline0, 0.05, 0.95);
  const double span = -histogram.lo_ps;
  const double s0 = span / 4.0;

  DipProblem problem(histogram);
  const FitResult res = levenberg_fit(problem, {baseline0, v0, s0});
  if (!res.converged) throw std::domain_error("dip fit did not converge");

  DipFit fit;
  fit.baseline = res.params[0];
  fit.visibility = res.params[1];
  fit.fwhm_ps = constants::fwhm_per_sigma * res.params[2];
  fit.baseline_err = res.errors[0];
  fit.visibility_err = res.errors[1];
  fit.fwhm_err_ps = constants::fwhm_per_sigma * res.errors[2];
  fit.chi2 = res.chi2;
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  return fit;
}

CorrelationResult correlation_coefficient(std::int64_t r_pp, std::int64_t r_pm, std::int64_t r_mp,
                                          std::int64_t r_mm) {
  if (r_pp < 0 || r_pm < 0 || r_mp < 0 || r_mm < 0)
    throw std::domain_error("counts must be non-negative");
  const std::int64_t total = r_pp + r_pm + r_mp + r_mm;
  if (total == 0) throw std::domain_error("correlation coefficient undefined for zero counts");
  const std::int64_t diff = r_pp - r_pm - r_mp + r_mm;
  // Integer numerator/denominator: correctly rounded division makes E exactly
  // scale-invariant.
  CorrelationResult res;
  res.e = static_cast<double>(diff) / static_cast<double>(total);
  const double same = static_cast<double>(r_pp + r_mm);
  const double cross = static_cast<double>(r_pm + r_mp);
  res.sigma = std::sqrt((1.0 - res.e) * (1.0 - res.e) * same +
                        (1.0 + res.e) * (1.0 + res.e) * cross) /
              static_cast<double>(total);
  return res;
}

FringeSample FringeSample::from_counts(double alpha, double beta, std::int64_t pp, std::int64_t pm,
                                       std::int64_t mp, std::int64_t mm) {
  const CorrelationResult c = correlation_coefficient(pp, pm, mp, mm);
  return {alpha, beta, pp, pm, mp, mm, c.e, c.sigma};
}

namespace {

// E = V cos(delta + phi0); params p = {V, phi0}.
class FringeProblem final : public LeastSquaresProblem {
 public:
  FringeProblem(std::span<const FringeSample> samples, bool weighted)
      : samples_(samples), weighted_(weighted) {}
  std::size_t size() const override { return samples_.size(); }
  std::size_t dim() const override { return 2; }
  double target(std::size_t i) const override { return samples_[i].e; }
  double weight(std::size_t i) const override {
    if (!weighted_) return 1.0;
    const double s = samples_[i].sigma_e;
    return 1.0 / (s * s);
  }
  double value(const double* p, std::size_t i, double* grad) const override {
    const double d = samples_[i].alpha - samples_[i].beta + p[1];
    grad[0] = std::cos(d);
    grad[1] = -p[0] * std::sin(d);
    return p[0] * std::cos(d);
  }
  bool admissible(const double* p) const override { return p[0] >= 0.0; }

 private:
  std::span<const FringeSample> samples_;
  bool weighted_;
};

}  // namespace

FringeFit fit_fringe(std::span<const FringeSample> samples) {
  std::vector<double> deltas;
  for (const FringeSample& s : samples) {
    const double d = s.alpha - s.beta;
    bool seen = false;
    for (double u : deltas) seen = seen || std::fabs(u - d) < 1e-9;
    if (!seen) deltas.push_back(d);
  }
  if (deltas.size() < 5) throw std::domain_error("fringe fit needs at least 5 distinct settings");

  // Exact samples have sigma_e = 0; fall back to unweighted least squares.
  bool weighted = true;
  for (const FringeSample& s : samples) weighted = weighted && s.sigma_e > 0.0;

  // Linear bootstrap in (a, b) = (V cos phi0, -V sin phi0).
  double scc = 0.0, scs = 0.0, sss = 0.0, sce = 0.0, sse = 0.0;
  for (const FringeSample& s : samples) {
    const double w = weighted ? 1.0 / (s.sigma_e * s.sigma_e) : 1.0;
    const double c = std::cos(s.alpha - s.beta);
    const double sn = std::sin(s.alpha - s.beta);
    scc += w * c * c;
    scs += w * c * sn;
    sss += w * sn * sn;
    sce += w * c * s.e;
    sse += w * sn * s.e;
  }
  const double det = scc * sss - scs * scs;
  if (std::fabs(det) < 1e-12 * std::max(1.0, scc * sss))
    throw std::domain_error("phase settings do not span the fringe");
  const double a = (sss * sce - scs * sse) / det;
  const double b = (scc * sse - scs * sce) / det;

  FringeFit fit;
  const double v0 = std::hypot(a, b);
  fit.dof = static_cast<int>(samples.size()) - 2;
  if (v0 < 1e-12) {
    // Pure noise floor: amplitude zero, phase unidentified.
    fit.visibility = 0.0;
    fit.phase_offset = 0.0;
    const double caa = sss / det;
    const double cbb = scc / det;
    fit.visibility_err = std::sqrt(0.5 * (caa + cbb));
    fit.phase_err = std::numbers::pi;
    double chi2 = 0.0;
    for (const FringeSample& s : samples) {
      const double w = weighted ? 1.0 / (s.sigma_e * s.sigma_e) : 1.0;
      chi2 += w * s.e * s.e;
    }
    fit.chi2 = chi2;
    return fit;
  }

  FringeProblem problem(samples, weighted);
  const FitResult res =
      levenberg_fit(problem, {v0, std::atan2(-b, a)});
  if (!res.converged) throw std::domain_error("fringe fit did not converge");
  fit.visibility = res.params[0];
  fit.phase_offset = std::remainder(res.params[1], 2.0 * std::numbers::pi);
  fit.visibility_err = res.errors[0];
  fit.phase_err = res.errors[1];
  fit.chi2 = res.chi2;
  return fit;
}

WernerCheck werner_entanglement_check(double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0))
    throw std::domain_error("visibility must be in [0,1]");
  WernerCheck check;
  check.verdict = visibility > 1.0 / 3.0 ? EntanglementVerdict::entangled
                                         : EntanglementVerdict::inconclusive;
  return check;
}

FlatnessResult threefold_flatness(std::span<const double> counts_per_setting) {
  if (counts_per_setting.size() < 5)
    throw std::domain_error("flatness test needs at least 5 settings");
  double mean = 0.0;
  for (double c : counts_per_setting) {
    if (c < 0.0) throw std::domain_error("counts must be non-negative");
    mean += c;
  }
  mean /= static_cast<double>(counts_per_setting.size());

  FlatnessResult res;
  res.dof = static_cast<int>(counts_per_setting.size()) - 1;
  if (mean <= 0.0) return res;  // no counts anywhere: trivially flat
  for (double c : counts_per_setting) res.chi2 += (c - mean) * (c - mean) / mean;
  res.p_value = gamma_q(res.dof / 2.0, res.chi2 / 2.0);
  return res;
}

void write_histogram_csv(const Histogram& histogram, const std::filesystem::path& path,
                         const std::vector<std::string>& header_notes) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  for (const std::string& note : header_notes) out << "# " << note << '\n';
  out << "tau_bin_ps,count\n";
  for (std::size_t i = 0; i < histogram.size(); ++i)
    out << histogram.center(i) << ',' << histogram.counts[i] << '\n';
}

void write_fringe_csv(std::span<const FringeSample> samples, const std::filesystem::path& path,
                      const std::vector<std::string>& header_notes) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  for (const std::string& note : header_notes) out << "# " << note << '\n';
  out << "alpha,beta,Rpp,Rpm,Rmp,Rmm,E,sigma_E\n";
  for (const FringeSample& s : samples) {
    out << s.alpha << ',' << s.beta << ',' << s.r_pp << ',' << s.r_pm << ',' << s.r_mp << ','
        << s.r_mm << ',' << s.e << ',' << s.sigma_e << '\n';
  }
}

}  // namespace swapsim
