#pragma once

// Time integration of the oscillator through its singular points.
//
// The state is (u, p) with the flux p = |u'|^l u'. Along solutions p is C^1
// even where u'' blows up (u' = 0, u != 0), so the rewritten system
//
//     u' = sign(p) |p|^(1/(l+1))
//     p' = -c sign(p) |p|^((alpha+1)/(l+1)) - d |u|^beta u
//
// has a continuous right-hand side and can be stepped with an explicit pair.
// The epsilon-regularised second-order form is kept as an independent path
// for validation.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "sdosc/model.hpp"

namespace sdosc {

struct State {
  double t = 0.0;
  double u = 0.0;
  double p = 0.0;  // flux |u'|^l u'
};

struct Sample {
  double t;
  double u;
  double du;
  double p;
  double energy;
};

enum class TrajectoryStatus { Completed, EnergyFloorReached, StepFailure };

std::string_view to_string(TrajectoryStatus s);

struct Trajectory {
  Params params;
  double tol = 0.0;
  /// Regularisation parameter; nullopt for the direct flux formulation.
  std::optional<double> regularization;
  std::vector<Sample> samples;
  std::vector<double> u_zeros;
  std::vector<double> du_zeros;
  TrajectoryStatus status = TrajectoryStatus::Completed;

  [[nodiscard]] double t_begin() const { return samples.front().t; }
  [[nodiscard]] double t_end() const { return samples.back().t; }
  [[nodiscard]] bool empty() const { return samples.empty(); }
};

struct IntegratorOptions {
  double tol = 1e-9;
  /// Early exit once E < energy_floor_ratio * E(0).
  double energy_floor_ratio = 1e-24;
  /// Minimum step as a fraction of t_end; smaller steps are a StepFailure.
  double min_step_ratio = 1e-14;
  /// Largest step as a fraction of t_end.
  double max_step_ratio = 1e-2;
  /// Step cap (fraction of t_end) applied while |p| < singular_flux_ratio * max(1, |p0|).
  double singular_step_ratio = 1e-3;
  double singular_flux_ratio = 1e-8;
  std::size_t max_steps = 20'000'000;
};

struct FluxRates {
  double du;
  double dp;
};

FluxRates vector_field(const Params& p, const State& s);

struct RegularizedRates {
  double du;
  double ddu;
};

/// (eps + (l+1)|du|^l) u'' + c|du|^alpha du + d|u|^beta u = 0 as a first-order system.
RegularizedRates vector_field_regularized(const Params& p, double eps, double u, double du);

/// Adaptive integration on [0, t_end] from u(0) = u0, u'(0) = du0.
/// Throws ValidationError unless the parameters are valid and well posed,
/// t_end > 0 and tol > 0. Step underflow is reported through the status.
Trajectory integrate(const Params& p, double u0, double du0, double t_end,
                     const IntegratorOptions& opts = {});
Trajectory integrate(const Params& p, double u0, double du0, double t_end, double tol);

/// Same contract for the regularised system; samples store p = |du|^l du.
Trajectory integrate_regularized(const Params& p, double eps, double u0, double du0,
                                 double t_end, const IntegratorOptions& opts = {});

enum class Component { U, DU };

/// Sign changes of u (or u') between stored samples, refined by bisection on
/// the cubic Hermite interpolant of the adjacent samples to |dt| <= time_tol.
/// A non-positive time_tol uses the trajectory tolerance (1e-9 if unset).
std::vector<double> locate_zeros(const Trajectory& traj, Component which, double time_tol = 0.0);

struct DenseValue {
  double u;
  double du;
  double p;
};

/// Cubic Hermite evaluation between stored samples; t must lie in the span.
DenseValue evaluate(const Trajectory& traj, double t);

/// Time derivative of the flux at a stored sample (uses the trajectory's own system).
double flux_rate(const Trajectory& traj, const Sample& s);

/// Recompute the event lists after samples were set externally.
void finalize_loaded(Trajectory& traj);

}  // namespace sdosc
