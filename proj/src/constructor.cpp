#include "sdosc/constructor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdosc/dopri.hpp"
#include "sdosc/error.hpp"
#include "sdosc/kernels.hpp"

namespace sdosc {
namespace {

void require_fast_regime(const Params& p) {
  p.validate();
  if (!p.strict_gap()) throw DomainError("fast-solution construction needs l < alpha");
  if (!(p.alpha < alpha_star(p)))
    throw DomainError("fast-solution construction needs alpha < alpha* = " +
                      std::to_string(alpha_star(p)));
  if (!(p.alpha - p.l < 1.0)) throw DomainError("fast-solution construction needs alpha - l < 1");
}

void require_grid(const GridFunction& g) {
  if (g.nodes.size() != g.values.size()) throw ValidationError("grid function size mismatch");
  if (g.nodes.size() < 2) throw ValidationError("grid function needs at least 2 nodes");
  for (std::size_t i = 1; i < g.nodes.size(); ++i)
    if (!(g.nodes[i] > g.nodes[i - 1])) throw ValidationError("grid nodes must increase");
}

void require_nonnegative(const GridFunction& g, const char* what) {
  for (double x : g.values)
    if (!(x >= 0.0)) throw ValidationError(std::string(what) + " must be nonnegative");
}

// Largest admissible Y-norm of the source: the comparison bound solves the
// forced equation with exactly this source.
double source_cap(const Params& p) { return comparison_cap(p) / (p.alpha - p.l); }

}  // namespace

std::vector<double> geometric_grid(double t_max, std::size_t n) {
  if (!(t_max > 1.0)) throw ValidationError("t_max must be > 1");
  if (n < 5) throw ValidationError("grid needs at least 5 nodes");
  std::vector<double> t(n);
  const double ds = std::log(t_max) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(ds * static_cast<double>(i));
  t.front() = 1.0;
  t.back() = t_max;
  return t;
}

std::vector<double> tail_integral(const Params& p, const GridFunction& v, TailMode mode) {
  require_fast_regime(p);
  require_grid(v);
  require_nonnegative(v, "operator input");
  const std::size_t n = v.size();
  std::vector<double> g(n);
  kernels::abs_pow(v.values, 1.0 / (p.l + 1.0), g);
  std::vector<double> out(n, 0.0);
  if (mode == TailMode::BoundTail) {
    const double m = 1.0 / (p.alpha - p.l);
    out[n - 1] = std::pow(comparison_cap(p), 1.0 / (p.l + 1.0)) *
                 std::pow(v.nodes[n - 1], 1.0 - m) / (m - 1.0);
  }
  for (std::size_t i = n - 1; i-- > 0;)
    out[i] = out[i + 1] + 0.5 * (v.nodes[i + 1] - v.nodes[i]) * (g[i] + g[i + 1]);
  return out;
}

GridFunction operator_K(const Params& p, const GridFunction& v, TailMode mode) {
  GridFunction out{v.nodes, tail_integral(p, v, mode)};
  kernels::abs_pow(out.values, p.beta + 1.0, out.values);
  return out;
}

double y_norm(const Params& p, const GridFunction& f) {
  const double k = (p.alpha + 1.0) / (p.alpha - p.l);
  double best = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    best = std::max(best, std::pow(f.nodes[i], k) * std::fabs(f.values[i]));
  return best;
}

double x_norm(const Params& p, const GridFunction& v) {
  const double k = (p.l + 1.0) / (p.alpha - p.l);
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    best = std::max(best, std::pow(v.nodes[i], k) * std::fabs(v.values[i]));
  return best;
}

GridFunction solve_forced_ode(const Params& p, const GridFunction& source, double phi,
                              const ForcedOdeOptions& opts) {
  require_fast_regime(p);
  require_grid(source);
  require_nonnegative(source, "source");
  if (source.nodes.front() != 1.0) throw ValidationError("source grid must start at t = 1");
  const double cap = comparison_cap(p);
  if (!(phi >= 0.0 && phi <= cap * (1.0 + opts.bound_slack)))
    throw ValidationError("phi must lie in [0, " + std::to_string(cap) + "]");
  if (y_norm(p, source) > source_cap(p) * (1.0 + opts.bound_slack))
    throw ValidationError("source exceeds the admissible bound (Y-norm " +
                          std::to_string(y_norm(p, source)) + " > " +
                          std::to_string(source_cap(p)) + ")");

  const double gamma = (p.alpha + 1.0) / (p.l + 1.0);
  const std::size_t n = source.size();
  GridFunction out{source.nodes, std::vector<double>(n, 0.0)};
  out.values[0] = phi;

  dopri::PiController ctrl;
  double y = phi;
  double h = 1e-3;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double t0 = source.nodes[i], t1 = source.nodes[i + 1];
    const double f0 = source.values[i], f1 = source.values[i + 1];
    const auto rhs = [&](double t, const dopri::Vec<1>& v) -> dopri::Vec<1> {
      const double f = f0 + (f1 - f0) * (t - t0) / (t1 - t0);
      return {f - signed_pow(v[0], gamma)};
    };
    const double h_min = 1e-14 * t1;
    double t = t0;
    dopri::Vec<1> v{y};
    dopri::Vec<1> dv = rhs(t, v);
    while (t < t1) {
      const bool last = t + h >= t1;
      const double step = last ? t1 - t : h;
      const auto trial = dopri::trial_step<1>(rhs, t, v, dv, step);
      const double sc = opts.rtol * std::max(std::fabs(v[0]), std::fabs(trial.y[0]));
      const double err = trial.error[0] == 0.0 ? 0.0
                         : sc > 0.0            ? std::fabs(trial.error[0]) / sc
                                               : HUGE_VAL;
      if (err <= 1.0) {
        t = last ? t1 : t + step;
        v = trial.y;
        dv = trial.dydt;
        h = ctrl.propose(step, err);
      } else {
        h = ctrl.propose(step, err);
        if (!(h >= h_min)) throw NumericalError("forced ODE step underflow near t = " +
                                                std::to_string(t));
      }
    }
    y = std::max(v[0], 0.0);
    out.values[i + 1] = y;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double bound = comparison_bound(p, out.nodes[i]);
    if (out.values[i] > bound * (1.0 + opts.bound_slack))
      throw NumericalError("forced ODE solution exceeds the comparison bound at t = " +
                           std::to_string(out.nodes[i]));
  }
  return out;
}

double integro_residual(const Params& p, const GridFunction& v, double eps_fp, TailMode mode) {
  require_grid(v);
  const std::size_t n = v.size();
  if (n < 5) throw ValidationError("residual needs at least 5 nodes");
  const double ds = std::log(v.nodes[1] / v.nodes[0]);
  for (std::size_t i = 1; i < n; ++i)
    if (std::fabs(std::log(v.nodes[i] / v.nodes[i - 1]) - ds) > 1e-9 * ds)
      throw ValidationError("residual needs a geometric grid");

  const GridFunction k = operator_K(p, v, mode);
  const double gamma = (p.alpha + 1.0) / (p.l + 1.0);
  const double t_limit = 0.5 * v.nodes.back();
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < n && v.nodes[i] <= t_limit; ++i) {
    const double dv_ds = (-v.values[i + 2] + 8.0 * v.values[i + 1] - 8.0 * v.values[i - 1] +
                          v.values[i - 2]) / (12.0 * ds);
    const double dv = dv_ds / v.nodes[i];
    const double damp = abs_pow(v.values[i], gamma);
    const double src = eps_fp * k.values[i];
    const double scale = std::fabs(dv) + damp + src;
    if (scale > 0.0) worst = std::max(worst, std::fabs(dv + damp - src) / scale);
  }
  return worst;
}

FastSolution build_fast_solution(const Params& p, const FastSolutionOptions& opts) {
  require_fast_regime(p);
  if (p.c != 1.0 || p.d != 1.0)
    throw DomainError("fast-solution construction is normalised to c = d = 1");
  if (!(opts.fp_tol > 0.0)) throw ValidationError("fp_tol must be > 0");
  if (opts.max_iter == 0) throw ValidationError("max_iter must be >= 1");

  FastSolution sol;
  const double cap = comparison_cap(p);
  sol.phi = opts.phi < 0.0 ? cap : opts.phi;

  const std::vector<double> nodes = geometric_grid(opts.t_max, opts.nodes);
  GridFunction bound{nodes, std::vector<double>(nodes.size())};
  for (std::size_t i = 0; i < nodes.size(); ++i) bound.values[i] = comparison_bound(p, nodes[i]);

  const double k_bound = y_norm(p, operator_K(p, bound, opts.tail));
  sol.c_est = k_bound / std::pow(cap, (p.beta + 1.0) / (p.l + 1.0));
  sol.eps_max = source_cap(p) / k_bound;
  sol.eps_fp = opts.eps_fp.value_or(0.5 * sol.eps_max);
  if (!(sol.eps_fp >= 0.0) || sol.eps_fp > sol.eps_max)
    throw ValidationError("eps_fp must lie in [0, " + std::to_string(sol.eps_max) + "]");

  constexpr double slack = 1e-9;
  GridFunction v{nodes, std::vector<double>(nodes.size(), 0.0)};
  bool converged = false;
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    GridFunction src = operator_K(p, v, opts.tail);
    for (double& x : src.values) x *= sol.eps_fp;
    GridFunction next = solve_forced_ode(p, src, sol.phi);

    GridFunction diff{nodes, std::vector<double>(nodes.size())};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      diff.values[i] = next.values[i] - v.values[i];
      if (diff.values[i] < -slack * bound.values[i]) sol.iterates_monotone = false;
      if (next.values[i] > bound.values[i] * (1.0 + slack)) sol.iterates_bounded = false;
    }
    sol.last_change = x_norm(p, diff) / cap;
    sol.iterations = it;
    v = std::move(next);
    if (sol.last_change <= opts.fp_tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericalError("fixed-point iteration did not converge after " +
                         std::to_string(opts.max_iter) + " iterations (last change " +
                         std::to_string(sol.last_change) + ")");

  // Beyond t_max, u uses the power law through the last node, w(s) v(T)/w(T).
  // It stays below the comparison tail and vanishes with v.
  std::vector<double> tail = tail_integral(p, v, TailMode::Truncate);
  const std::size_t n = nodes.size();
  if (opts.tail == TailMode::BoundTail) {
    const double m = 1.0 / (p.alpha - p.l);
    const double extra = std::pow(v.values.back(), 1.0 / (p.l + 1.0)) * nodes.back() / (m - 1.0);
    for (double& x : tail) x += extra;
  }
  sol.u.nodes.resize(n);
  sol.u.values = tail;
  sol.du.values.resize(n);
  kernels::abs_pow(v.values, 1.0 / (p.l + 1.0), sol.du.values);
  for (std::size_t i = 0; i < n; ++i) {
    sol.u.nodes[i] = nodes[i] - 1.0;
    sol.du.values[i] = -sol.du.values[i];
  }
  sol.du.nodes = sol.u.nodes;
  sol.residual = integro_residual(p, v, sol.eps_fp, opts.tail);
  sol.v = std::move(v);
  return sol;
}

FastSolutionCheck check_fast_solution(const Params& p, const FastSolution& sol) {
  FastSolutionCheck chk;
  const double t_max = sol.v.nodes.back();
  const double lo = 0.25 * t_max, hi = 0.5 * t_max;
  std::vector<double> abs_du(sol.du.size());
  for (std::size_t i = 0; i < abs_du.size(); ++i) abs_du[i] = std::fabs(sol.du.values[i]);
  chk.du_rate = fit_decay_exponent(sol.du.nodes, abs_du, lo, hi);
  chk.u_rate = fit_decay_exponent(sol.u.nodes, sol.u.values, lo, hi);
  chk.expected_du_exponent = -1.0 / (p.alpha - p.l);
  chk.expected_u_exponent = -(1.0 - p.alpha + p.l) / (p.alpha - p.l);

  const double k_du = asymptotic_constants(p).k_du;
  chk.du_constant_ratio_min = HUGE_VAL;
  chk.du_constant_ratio_max = 0.0;
  for (std::size_t i = 0; i < abs_du.size(); ++i) {
    const double t = sol.du.nodes[i];
    if (t < lo || t > hi) continue;
    const double r = std::pow(t, 1.0 / (p.alpha - p.l)) * abs_du[i] / k_du;
    chk.du_constant_ratio_min = std::min(chk.du_constant_ratio_min, r);
    chk.du_constant_ratio_max = std::max(chk.du_constant_ratio_max, r);
  }
  return chk;
}

}  // namespace sdosc
