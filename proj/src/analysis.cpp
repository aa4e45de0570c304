#include "sdosc/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "sdosc/error.hpp"
#include "sdosc/kernels.hpp"

namespace sdosc {
namespace {

// Time derivative of the flux at a sample, using the caller's parameters so
// that trajectories loaded from disk can be audited.
double flux_rate_with(const Params& p, const Trajectory& traj, const Sample& s) {
  if (traj.regularization) {
    const RegularizedRates r = vector_field_regularized(p, *traj.regularization, s.u, s.du);
    return (p.l + 1.0) * abs_pow(s.du, p.l) * r.ddu;
  }
  return vector_field(p, {s.t, s.u, s.p}).dp;
}

std::vector<double> column(const Trajectory& traj, double Sample::*field) {
  std::vector<double> out(traj.samples.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = traj.samples[k].*field;
  return out;
}

std::vector<double> cumulative_dissipation(const Params& p, const Trajectory& traj) {
  const std::size_t n = traj.samples.size();
  std::vector<double> q(n, 0.0);
  if (n < 2) return q;
  // Three-point Gauss-Legendre on each step, applied to the cubic Hermite
  // interpolant of the flux; |u'|^(alpha+2) = |p|^((alpha+2)/(l+1)).
  constexpr double g = 0.77459666924148337704;  // sqrt(3/5)
  constexpr std::array<double, 3> nodes = {0.5 * (1.0 - g), 0.5, 0.5 * (1.0 + g)};
  constexpr std::array<double, 3> weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  std::vector<double> dp(n);
  for (std::size_t k = 0; k < n; ++k) dp[k] = flux_rate_with(p, traj, traj.samples[k]);
  std::vector<double> pg(3 * (n - 1));
  for (std::size_t k = 1; k < n; ++k) {
    const Sample& a = traj.samples[k - 1];
    const Sample& b = traj.samples[k];
    const double h = b.t - a.t;
    for (std::size_t j = 0; j < 3; ++j) {
      const double s = nodes[j];
      const double s2 = s * s, s3 = s2 * s;
      pg[3 * (k - 1) + j] = (2 * s3 - 3 * s2 + 1) * a.p + (s3 - 2 * s2 + s) * h * dp[k - 1] +
                            (-2 * s3 + 3 * s2) * b.p + (s3 - s2) * h * dp[k];
    }
  }
  std::vector<double> f(pg.size());
  kernels::abs_pow(pg, (p.alpha + 2.0) / (p.l + 1.0), f);
  for (std::size_t k = 1; k < n; ++k) {
    const double h = traj.samples[k].t - traj.samples[k - 1].t;
    const double* fk = &f[3 * (k - 1)];
    q[k] = q[k - 1] + h * (weights[0] * fk[0] + weights[1] * fk[1] + weights[2] * fk[2]);
  }
  return q;
}

std::size_t count_in(const std::vector<double>& times, double lo, double hi) {
  const auto a = std::lower_bound(times.begin(), times.end(), lo);
  const auto b = std::upper_bound(times.begin(), times.end(), hi);
  return static_cast<std::size_t>(b - a);
}

}  // namespace

std::vector<double> dissipation_integral(const Trajectory& traj) {
  return cumulative_dissipation(traj.params, traj);
}

double tail_liminf_statistic(const Params& p, const Trajectory& traj, double tail_fraction) {
  if (!p.strict_gap()) throw DomainError("tail statistic needs l < alpha");
  if (traj.empty()) throw ValidationError("empty trajectory");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw ValidationError("tail_fraction must lie in (0, 1]");
  const double k = (p.l + 2.0) / (p.alpha - p.l);
  const double t_from = traj.t_end() - tail_fraction * (traj.t_end() - traj.t_begin());
  double best = std::numeric_limits<double>::infinity();
  for (const Sample& s : traj.samples) {
    if (s.t < t_from || s.t <= 0.0) continue;
    best = std::min(best, std::pow(s.t, k) * s.energy);
  }
  if (!std::isfinite(best)) throw InsufficientDataError("no tail samples with t > 0");
  return best;
}

AuditReport energy_audit(const Params& p, const Trajectory& traj, double tail_fraction) {
  if (traj.empty()) throw ValidationError("empty trajectory");
  AuditReport rep;
  const std::vector<double> e = column(traj, &Sample::energy);
  rep.max_energy_increase = kernels::max_increase(e);

  const std::vector<double> q = cumulative_dissipation(p, traj);
  const double eps_half = traj.regularization ? 0.5 * *traj.regularization : 0.0;
  const double du0 = traj.samples.front().du;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double du = traj.samples[k].du;
    const double r = e[k] - e[0] + p.c * q[k] + eps_half * (du * du - du0 * du0);
    rep.dissipation_residual = std::max(rep.dissipation_residual, std::fabs(r));
  }

  const double t_from = traj.t_end() - tail_fraction * (traj.t_end() - traj.t_begin());
  for (const Sample& s : traj.samples)
    if (s.t >= t_from && s.t > 0.0) ++rep.samples_used;
  if (p.strict_gap() && rep.samples_used > 0)
    rep.tail_liminf_statistic = tail_liminf_statistic(p, traj, tail_fraction);
  return rep;
}

RateEstimate fit_decay_exponent(std::span<const double> t, std::span<const double> value,
                                double t_lo, double t_hi) {
  if (t.size() != value.size()) throw ValidationError("series length mismatch");
  if (!(t_lo > 0.0 && t_lo < t_hi)) throw ValidationError("fit window must satisfy 0 < lo < hi");
  std::vector<double> wt, wv;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_lo || t[k] > t_hi) continue;
    if (!(value[k] > 0.0)) throw ValidationError("fit values must be > 0 inside the window");
    wt.push_back(t[k]);
    wv.push_back(value[k]);
  }
  if (wt.size() < kMinFitPoints)
    throw InsufficientDataError("fit needs at least " + std::to_string(kMinFitPoints) +
                                " points in the window, got " + std::to_string(wt.size()));
  const kernels::LogLogMoments m = kernels::loglog_moments(wt, wv);
  const double n = static_cast<double>(m.n);
  const double sxx = m.sxx - m.sx * m.sx / n;
  const double sxy = m.sxy - m.sx * m.sy / n;
  const double syy = m.syy - m.sy * m.sy / n;
  if (!(sxx > 0.0)) throw InsufficientDataError("fit window has no spread in t");
  RateEstimate est;
  est.exponent = sxy / sxx;
  est.amplitude = std::exp((m.sy - est.exponent * m.sx) / n);
  est.goodness = syy > 0.0 ? std::min(1.0, sxy * sxy / (sxx * syy)) : 1.0;
  est.t_lo = t_lo;
  est.t_hi = t_hi;
  est.points = m.n;
  return est;
}

std::string_view to_string(Series s) {
  switch (s) {
    case Series::E:
      return "E";
    case Series::U:
      return "u";
    case Series::DU:
      return "du";
  }
  return "?";
}

std::optional<Series> parse_series(std::string_view s) {
  if (s == "E") return Series::E;
  if (s == "u") return Series::U;
  if (s == "du") return Series::DU;
  return std::nullopt;
}

SeriesPoints series_points(const Trajectory& traj, Series s, double t_lo, double t_hi) {
  SeriesPoints out;
  std::vector<const Sample*> win;
  for (const Sample& smp : traj.samples)
    if (smp.t >= t_lo && smp.t <= t_hi) win.push_back(&smp);

  if (s == Series::E) {
    for (const Sample* smp : win) {
      out.t.push_back(smp->t);
      out.value.push_back(smp->energy);
    }
    return out;
  }

  auto val = [s](const Sample* smp) { return s == Series::U ? smp->u : smp->du; };
  std::vector<std::size_t> changes;  // index of the first sample after each sign change
  double last_sign = 0.0;
  for (std::size_t k = 0; k < win.size(); ++k) {
    const double sg = sign(val(win[k]));
    if (sg == 0.0) continue;
    if (last_sign != 0.0 && sg != last_sign) changes.push_back(k);
    last_sign = sg;
  }
  if (changes.empty()) {
    for (const Sample* smp : win) {
      out.t.push_back(smp->t);
      out.value.push_back(std::fabs(val(smp)));
    }
    return out;
  }
  for (std::size_t j = 0; j + 1 < changes.size(); ++j) {
    std::size_t best = changes[j];
    for (std::size_t k = changes[j]; k < changes[j + 1]; ++k)
      if (std::fabs(val(win[k])) > std::fabs(val(win[best]))) best = k;
    out.t.push_back(win[best]->t);
    out.value.push_back(std::fabs(val(win[best])));
  }
  return out;
}

RateEstimate fit_trajectory(const Trajectory& traj, Series s, double t_lo, double t_hi) {
  const SeriesPoints pts = series_points(traj, s, t_lo, t_hi);
  return fit_decay_exponent(pts.t, pts.value, t_lo, t_hi);
}

std::vector<std::pair<double, double>> dyadic_windows(double t_end, double t_window_min) {
  std::vector<std::pair<double, double>> out;
  if (!(t_window_min > 0.0)) throw ValidationError("t_window_min must be > 0");
  for (double lo = 0.5 * t_end; lo >= t_window_min; lo *= 0.5) out.emplace_back(lo, 2.0 * lo);
  return out;
}

Regime classify_empirical(const Params& p, const Trajectory& traj, const ClassifyOptions& opts) {
  (void)p;
  if (traj.empty()) throw ValidationError("empty trajectory");
  if (traj.samples.front().energy == 0.0) return Regime::OutsideTheory;
  const auto windows = dyadic_windows(traj.t_end(), opts.t_window_min);
  if (windows.empty())
    throw InsufficientDataError("trajectory span too short for dyadic windows (need t_end >= " +
                                std::to_string(2.0 * opts.t_window_min) + ")");

  const bool oscillatory = std::all_of(windows.begin(), windows.end(), [&](const auto& w) {
    return count_in(traj.u_zeros, w.first, w.second) >= opts.min_window_zeros;
  });
  if (oscillatory) return Regime::Oscillatory;

  const double half = 0.5 * (traj.t_begin() + traj.t_end());
  bool settled = count_in(traj.u_zeros, half, traj.t_end()) == 0 &&
                 count_in(traj.du_zeros, half, traj.t_end()) == 0;
  for (const Sample& s : traj.samples) {
    if (!settled) break;
    if (s.t >= half && sign(s.u) * sign(s.du) != -1.0) settled = false;
  }
  if (settled) return Regime::NonOscillatoryFiniteZeros;

  if (traj.u_zeros.size() <= 1 && traj.t_end() - traj.t_begin() >= opts.t_min)
    return Regime::CriticalAtMostOneZero;
  return Regime::OutsideTheory;
}

double interlacing_fraction(const Trajectory& traj) {
  const auto& dz = traj.du_zeros;
  if (dz.size() < 2) return 1.0;
  std::size_t good = 0;
  for (std::size_t k = 1; k < dz.size(); ++k) {
    const auto a = std::upper_bound(traj.u_zeros.begin(), traj.u_zeros.end(), dz[k - 1]);
    const auto b = std::lower_bound(traj.u_zeros.begin(), traj.u_zeros.end(), dz[k]);
    if (b - a == 1) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(dz.size() - 1);
}

PolarState to_polar(const Params& p, double u, double du) {
  const double z = phase_scale(p) * signed_pow(u, 0.5 * p.beta + 1.0);
  const double w = signed_pow(du, 0.5 * p.l + 1.0);
  PolarState ps;
  ps.r = std::hypot(z, w);
  if (ps.r == 0.0) return ps;
  ps.theta = std::atan2(w, z);
  if (ps.theta <= -std::numbers::pi) ps.theta = std::numbers::pi;
  return ps;
}

PolarState to_polar(const Params& p, const State& s) {
  return to_polar(p, s.u, signed_pow(s.p, 1.0 / (p.l + 1.0)));
}

double theta_rate(const Params& p, const PolarState& ps) {
  const double s = std::sin(ps.theta);
  const double c = std::cos(ps.theta);
  if (std::fabs(s) <= 4.0 * std::numeric_limits<double>::epsilon())
    throw DomainError("theta_rate is singular at sin(theta) = 0");
  const double e1 = 2.0 * (p.alpha - p.l) / (p.l + 2.0);
  const double e2 = 2.0 / (p.l + 2.0) - 2.0 / (p.beta + 2.0);
  const double damping = -phase_damping(p) * abs_pow(ps.r, e1) * s * c * abs_pow(s, e1);
  const double restoring = -phase_coupling(p) * abs_pow(ps.r, e2) *
                           abs_pow(c, p.beta / (p.beta + 2.0)) * abs_pow(s, -p.l / (p.l + 2.0));
  return damping + restoring;
}

std::vector<double> unwrapped_theta(const Params& p, const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.samples.size());
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (const Sample& s : traj.samples) {
    double th = to_polar(p, s.u, s.du).theta;
    if (!out.empty()) th += two_pi * std::round((out.back() - th) / two_pi);
    out.push_back(th);
  }
  return out;
}

}  // namespace sdosc
