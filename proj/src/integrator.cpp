#include "sdosc/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdosc/dopri.hpp"
#include "sdosc/error.hpp"

namespace sdosc {
namespace {

using Vec2 = dopri::Vec<2>;

struct Hermite {
  double t0, t1, y0, y1, m0, m1;

  [[nodiscard]] double operator()(double t) const {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * y1 +
           (s3 - s2) * h * m1;
  }
};

double bisect_root(const Hermite& f, double time_tol) {
  double a = f.t0, b = f.t1;
  double fa = f.y0;
  while (b - a > time_tol) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Amplitudes |u| and |p| can reach at energy E; used as error scales so that
// the tolerance stays relative as the solution decays.
double position_amplitude(const Params& p, double e) {
  return std::pow((p.beta + 2.0) * e / p.d, 1.0 / (p.beta + 2.0));
}
double velocity_amplitude(const Params& p, double e) {
  return std::pow((p.l + 2.0) * e / (p.l + 1.0), 1.0 / (p.l + 2.0));
}

class FluxSystem {
 public:
  explicit FluxSystem(const Params& p) : p_(p) {}

  [[nodiscard]] Vec2 initial(double u0, double du0) const {
    return {u0, signed_pow(du0, p_.l + 1.0)};
  }
  Vec2 operator()(double t, const Vec2& y) const {
    const FluxRates r = vector_field(p_, {t, y[0], y[1]});
    return {r.du, r.dp};
  }
  [[nodiscard]] Sample sample(double t, const Vec2& y) const {
    const double du = signed_pow(y[1], 1.0 / (p_.l + 1.0));
    return {t, y[0], du, y[1], energy(p_, y[0], du)};
  }
  [[nodiscard]] Vec2 scales(double e) const {
    return {position_amplitude(p_, e), std::pow(velocity_amplitude(p_, e), p_.l + 1.0)};
  }
  [[nodiscard]] double flux(const Vec2& y) const { return y[1]; }

  // u' = sign(p)|p|^(1/(l+1)) has a Hoelder kink where p vanishes. A step that
  // contains the kink has a u-error of order k^(1/(l+1)) h^((l+2)/(l+1)), with
  // k = |p'| there, which the embedded estimate does not see. Returns the
  // largest step that keeps this below tol * u_scale (infinite if no kink).
  [[nodiscard]] double kink_step(const Vec2& y0, const Vec2& y1, double tol,
                                 double u_scale) const {
    if (p_.l == 0.0) return HUGE_VAL;
    if (y0[1] != 0.0 && sign(y0[1]) == sign(y1[1])) return HUGE_VAL;
    const double k = std::fabs(p_.d * signed_pow(y0[0], p_.beta + 1.0));
    if (k == 0.0) return HUGE_VAL;
    const double q = 1.0 / (p_.l + 1.0);
    return std::pow(tol * u_scale / std::pow(k, q), 1.0 / (1.0 + q));
  }

 private:
  Params p_;
};

class RegularizedSystem {
 public:
  RegularizedSystem(const Params& p, double eps) : p_(p), eps_(eps) {}

  [[nodiscard]] Vec2 initial(double u0, double du0) const { return {u0, du0}; }
  Vec2 operator()(double, const Vec2& y) const {
    const RegularizedRates r = vector_field_regularized(p_, eps_, y[0], y[1]);
    return {r.du, r.ddu};
  }
  [[nodiscard]] Sample sample(double t, const Vec2& y) const {
    return {t, y[0], y[1], signed_pow(y[1], p_.l + 1.0), energy(p_, y[0], y[1])};
  }
  [[nodiscard]] Vec2 scales(double e) const {
    return {position_amplitude(p_, e), velocity_amplitude(p_, e)};
  }
  [[nodiscard]] double flux(const Vec2& y) const { return signed_pow(y[1], p_.l + 1.0); }
  [[nodiscard]] double kink_step(const Vec2&, const Vec2&, double, double) const {
    return HUGE_VAL;
  }

 private:
  Params p_;
  double eps_;
};

double scaled_error(const Vec2& err, const Vec2& y0, const Vec2& y1, const Vec2& amp, double tol) {
  double worst = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const double sc = tol * std::max({std::fabs(y0[i]), std::fabs(y1[i]), amp[i]});
    if (err[i] == 0.0) continue;
    if (!(sc > 0.0)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::fabs(err[i]) / sc);
  }
  return std::isfinite(worst) ? worst : std::numeric_limits<double>::infinity();
}

void check_inputs(const Params& p, double u0, double du0, double t_end, double tol) {
  p.validate();
  if (!p.well_posed()) throw ValidationError("integration needs l <= min(alpha, beta)");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be > 0");
  if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
  if (!std::isfinite(u0) || !std::isfinite(du0))
    throw ValidationError("initial conditions must be finite");
}

template <class System>
Trajectory drive(const System& sys, const Params& p, double u0, double du0, double t_end,
                 const IntegratorOptions& opts) {
  Trajectory traj;
  traj.params = p;
  traj.tol = opts.tol;

  const double h_min = opts.min_step_ratio * t_end;
  const double h_max = opts.max_step_ratio * t_end;
  const double h_singular = opts.singular_step_ratio * t_end;

  double t = 0.0;
  Vec2 y = sys.initial(u0, du0);
  Vec2 f = sys(t, y);
  traj.samples.push_back(sys.sample(t, y));
  const double e0 = traj.samples.back().energy;
  const double e_floor = opts.energy_floor_ratio * e0;
  const double p_small = opts.singular_flux_ratio * std::max(1.0, std::fabs(sys.flux(y)));

  // Initial step from the local time scale of the solution.
  double h;
  {
    const Vec2 amp = sys.scales(e0);
    double dy = 0.0, dd = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      const double sc = std::max(std::fabs(y[i]), amp[i]);
      if (sc > 0.0) {
        dy = std::max(dy, std::fabs(y[i]) / sc);
        dd = std::max(dd, std::fabs(f[i]) / sc);
      }
    }
    h = (dd > 0.0 && dy > 1e-5) ? 0.01 * dy / dd : 1e-6 * t_end;
    h = std::clamp(h, std::max(h_min, 1e-10 * t_end), h_max);
  }

  dopri::PiController ctrl;
  std::size_t steps = 0;
  double e_current = e0;
  while (t < t_end) {
    if (++steps > opts.max_steps) {
      traj.status = TrajectoryStatus::StepFailure;
      break;
    }
    double cap = h_max;
    if (std::fabs(sys.flux(y)) < p_small) cap = std::min(cap, h_singular);
    h = std::min(h, cap);
    bool last = false;
    if (t + 1.01 * h >= t_end) {
      h = t_end - t;
      last = true;
    }
    if (h < h_min && !last) {
      traj.status = TrajectoryStatus::StepFailure;
      break;
    }

    const auto trial = dopri::trial_step<2>(sys, t, y, f, h);
    const Vec2 amp = sys.scales(e_current);
    const double h_kink =
        std::max(10.0 * h_min, sys.kink_step(y, trial.y, opts.tol, std::max(std::fabs(y[0]), amp[0])));
    if (h > h_kink) {
      // Approach the kink geometrically, then cross it with a step of h_kink.
      const double dp = std::fabs(y[1] - trial.y[1]);
      const double reach = dp > 0.0 ? h * std::fabs(y[1]) / dp : 0.0;
      h = std::max(h_kink, 0.9 * reach);
      continue;
    }
    const double err = scaled_error(trial.error, y, trial.y, amp, opts.tol);
    if (err <= 1.0) {
      t = last ? t_end : t + h;
      y = trial.y;
      f = trial.dydt;
      traj.samples.push_back(sys.sample(t, y));
      e_current = traj.samples.back().energy;
      h = ctrl.propose(h, err);
      if (e_current < e_floor) {
        traj.status = TrajectoryStatus::EnergyFloorReached;
        break;
      }
    } else {
      h = ctrl.propose(h, err);
      if (!std::isfinite(h) || h < h_min) {
        traj.status = TrajectoryStatus::StepFailure;
        break;
      }
    }
  }

  traj.u_zeros = locate_zeros(traj, Component::U, opts.tol);
  traj.du_zeros = locate_zeros(traj, Component::DU, opts.tol);
  return traj;
}

}  // namespace

std::string_view to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::Completed:
      return "Completed";
    case TrajectoryStatus::EnergyFloorReached:
      return "EnergyFloorReached";
    case TrajectoryStatus::StepFailure:
      return "StepFailure";
  }
  return "Unknown";
}

FluxRates vector_field(const Params& p, const State& s) {
  return {signed_pow(s.p, 1.0 / (p.l + 1.0)),
          -p.c * signed_pow(s.p, (p.alpha + 1.0) / (p.l + 1.0)) -
              p.d * signed_pow(s.u, p.beta + 1.0)};
}

RegularizedRates vector_field_regularized(const Params& p, double eps, double u, double du) {
  const double num = p.c * signed_pow(du, p.alpha + 1.0) + p.d * signed_pow(u, p.beta + 1.0);
  const double den = eps + (p.l + 1.0) * abs_pow(du, p.l);
  return {du, -num / den};
}

Trajectory integrate(const Params& p, double u0, double du0, double t_end,
                     const IntegratorOptions& opts) {
  check_inputs(p, u0, du0, t_end, opts.tol);
  return drive(FluxSystem(p), p, u0, du0, t_end, opts);
}

Trajectory integrate(const Params& p, double u0, double du0, double t_end, double tol) {
  IntegratorOptions opts;
  opts.tol = tol;
  return integrate(p, u0, du0, t_end, opts);
}

Trajectory integrate_regularized(const Params& p, double eps, double u0, double du0,
                                 double t_end, const IntegratorOptions& opts) {
  if (!(eps > 0.0)) throw ValidationError("regularisation eps must be > 0");
  check_inputs(p, u0, du0, t_end, opts.tol);
  Trajectory traj = drive(RegularizedSystem(p, eps), p, u0, du0, t_end, opts);
  traj.regularization = eps;
  // Event lists depend on flux_rate, which reads the regularisation tag.
  traj.u_zeros = locate_zeros(traj, Component::U, opts.tol);
  traj.du_zeros = locate_zeros(traj, Component::DU, opts.tol);
  return traj;
}

double flux_rate(const Trajectory& traj, const Sample& s) {
  const Params& p = traj.params;
  if (traj.regularization) {
    const RegularizedRates r = vector_field_regularized(p, *traj.regularization, s.u, s.du);
    return (p.l + 1.0) * abs_pow(s.du, p.l) * r.ddu;
  }
  return vector_field(p, {s.t, s.u, s.p}).dp;
}

std::vector<double> locate_zeros(const Trajectory& traj, Component which, double time_tol) {
  std::vector<double> zeros;
  if (traj.samples.size() < 2) return zeros;
  if (!(time_tol > 0.0)) time_tol = traj.tol > 0.0 ? traj.tol : 1e-9;

  auto value = [which](const Sample& s) { return which == Component::U ? s.u : s.p; };
  auto slope = [&](const Sample& s) { return which == Component::U ? s.du : flux_rate(traj, s); };

  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const Sample& a = traj.samples[k - 1];
    const Sample& b = traj.samples[k];
    const double sa = sign(value(a));
    const double sb = sign(value(b));
    if (sa == 0.0 || sa == sb) continue;
    if (sb == 0.0) {
      zeros.push_back(b.t);
      continue;
    }
    const Hermite h{a.t, b.t, value(a), value(b), slope(a), slope(b)};
    const double root = bisect_root(h, time_tol);
    if (zeros.empty() || root > zeros.back()) zeros.push_back(root);
  }
  return zeros;
}

DenseValue evaluate(const Trajectory& traj, double t) {
  const auto& s = traj.samples;
  if (s.empty()) throw ValidationError("cannot evaluate an empty trajectory");
  if (t <= s.front().t) return {s.front().u, s.front().du, s.front().p};
  if (t >= s.back().t) return {s.back().u, s.back().du, s.back().p};
  const auto it = std::upper_bound(s.begin(), s.end(), t,
                                   [](double x, const Sample& smp) { return x < smp.t; });
  const Sample& b = *it;
  const Sample& a = *(it - 1);
  const Hermite hu{a.t, b.t, a.u, b.u, a.du, b.du};
  const Hermite hp{a.t, b.t, a.p, b.p, flux_rate(traj, a), flux_rate(traj, b)};
  const double p = hp(t);
  return {hu(t), signed_pow(p, 1.0 / (traj.params.l + 1.0)), p};
}

void finalize_loaded(Trajectory& traj) {
  traj.u_zeros = locate_zeros(traj, Component::U);
  traj.du_zeros = locate_zeros(traj, Component::DU);
}

}  // namespace sdosc
