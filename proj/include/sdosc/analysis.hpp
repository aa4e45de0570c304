#pragma once

// Post-processing of trajectories: energy audit, power-law rate fits,
// empirical regime classification and the polar angle representation.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sdosc/error.hpp"
#include "sdosc/integrator.hpp"
#include "sdosc/model.hpp"

namespace sdosc {

/// Not enough usable samples for a requested statistic.
class InsufficientDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct AuditReport {
  double max_energy_increase = 0.0;
  /// max_k |E(t_k) - E(0) + c Q_k|, Q_k the quadrature of |u'|^(alpha+2) on [0, t_k].
  double dissipation_residual = 0.0;
  /// min over tail samples of t^((l+2)/(alpha-l)) E(t); absent when alpha <= l.
  std::optional<double> tail_liminf_statistic;
  std::size_t samples_used = 0;
};

/// Tail = samples with t >= t_end - tail_fraction * (t_end - t_begin), t > 0.
/// For regularised trajectories the dissipation identity includes the
/// (eps/2)(du^2 - du0^2) term.
AuditReport energy_audit(const Params& p, const Trajectory& traj, double tail_fraction = 0.5);

/// The tail statistic alone. Throws DomainError if alpha <= l.
double tail_liminf_statistic(const Params& p, const Trajectory& traj, double tail_fraction);

/// Cumulative integral of |u'|^(alpha+2) at every sample (first entry 0).
/// Three-point Gauss-Legendre per step on the cubic Hermite interpolant of the flux.
std::vector<double> dissipation_integral(const Trajectory& traj);

struct RateEstimate {
  double exponent = 0.0;
  double amplitude = 0.0;
  double goodness = 0.0;  // R^2 of the log-log fit
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t points = 0;
};

/// R^2 above which a fit is reported as conclusive (not enforced).
inline constexpr double kConclusiveGoodness = 0.995;
inline constexpr std::size_t kMinFitPoints = 8;

/// Least-squares fit of log(value) against log(t) over points with t in [t_lo, t_hi].
/// Throws InsufficientDataError with fewer than kMinFitPoints points and
/// ValidationError if a value in the window is <= 0 or the window is not 0 < t_lo < t_hi.
RateEstimate fit_decay_exponent(std::span<const double> t, std::span<const double> value,
                                double t_lo, double t_hi);

enum class Series { E, U, DU };
std::string_view to_string(Series s);
std::optional<Series> parse_series(std::string_view s);

/// Points of a trajectory used to fit the decay of E, |u| or |u'| on a window.
/// E uses every sample. For |u| and |u'|: if the component does not change sign
/// in the window, every sample is used; otherwise the largest |value| between
/// consecutive sign changes (one point per half oscillation, placed at its time).
struct SeriesPoints {
  std::vector<double> t;
  std::vector<double> value;
};
SeriesPoints series_points(const Trajectory& traj, Series s, double t_lo, double t_hi);

RateEstimate fit_trajectory(const Trajectory& traj, Series s, double t_lo, double t_hi);

struct ClassifyOptions {
  std::size_t min_window_zeros = 1;
  /// Minimum span for the at-most-one-zero verdict.
  double t_min = 100.0;
  /// Lower end of the smallest dyadic window considered.
  double t_window_min = 10.0;
};

/// Oscillation evidence from dyadic windows [T, 2T] anchored at the final time
/// ([t_end/2, t_end], [t_end/4, t_end/2], ... while T >= t_window_min).
/// Throws InsufficientDataError if no such window fits in the trajectory.
Regime classify_empirical(const Params& p, const Trajectory& traj, const ClassifyOptions& opts = {});

/// Dyadic windows used by classify_empirical, latest first.
std::vector<std::pair<double, double>> dyadic_windows(double t_end, double t_window_min);

/// Fraction of consecutive du-zero pairs with exactly one u-zero strictly between them
/// (1 when there are fewer than two du-zeros).
double interlacing_fraction(const Trajectory& traj);

struct PolarState {
  double r = 0.0;
  double theta = 0.0;  // in (-pi, pi]
};

PolarState to_polar(const Params& p, double u, double du);
PolarState to_polar(const Params& p, const State& s);

/// Angular velocity of the polar angle. Throws DomainError when sin(theta) = 0.
double theta_rate(const Params& p, const PolarState& ps);

/// Continuous lift of theta along the stored samples.
std::vector<double> unwrapped_theta(const Params& p, const Trajectory& traj);

}  // namespace sdosc
