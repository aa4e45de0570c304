#pragma once

// Closed-form side of the singular oscillator
//
//     (|u'|^l u')' + c |u'|^alpha u' + d |u|^beta u = 0,
//
// parameter validation, regime thresholds, energy and the asymptotic
// constants of fast solutions. Everything here is a pure function.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

namespace sdosc {

struct Params {
  double l = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  double c = 1.0;
  double d = 1.0;

  /// Throws ValidationError unless l >= 0 and alpha, beta, c, d > 0 (all finite).
  void validate() const;

  /// Uniqueness regime: l <= min(alpha, beta).
  [[nodiscard]] bool well_posed() const { return l <= alpha && l <= beta; }
  /// Decay-theory regime: l < alpha.
  [[nodiscard]] bool strict_gap() const { return l < alpha; }
};

enum class Regime { Oscillatory, NonOscillatoryFiniteZeros, CriticalAtMostOneZero, OutsideTheory };

std::string_view to_string(Regime r);
std::optional<Regime> parse_regime(std::string_view s);

/// Relative tolerance used when comparing alpha with alpha* and c with c0.
inline constexpr double kThresholdRelTol = 1e-12;

// sign(0) = 0 everywhere; this keeps the origin an exact fixed point.
inline double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

/// |x|^q through exp/log of |x|. |0|^q is 0 for q > 0 and 1 for q == 0.
inline double abs_pow(double x, double q) {
  const double ax = std::fabs(x);
  if (ax == 0.0) return q > 0.0 ? 0.0 : (q == 0.0 ? 1.0 : HUGE_VAL);
  return std::exp(q * std::log(ax));
}

/// sign(x) |x|^q.
inline double signed_pow(double x, double q) { return sign(x) * abs_pow(x, q); }

double alpha_star(const Params& p);
double critical_c0(const Params& p);
Regime classify_theoretical(const Params& p);

/// E = (l+1)/(l+2) |du|^(l+2) + d/(beta+2) |u|^(beta+2).
double energy(const Params& p, double u, double du);

struct AsymptoticConstants {
  double k_u;   // lim t^((1-alpha+l)/(alpha-l)) |u(t)|
  double k_du;  // lim t^(1/(alpha-l)) |u'(t)|
};

/// Requires l < alpha < alpha*; throws DomainError otherwise.
AsymptoticConstants asymptotic_constants(const Params& p);

/// Super-solution ((l+2)/(alpha-l))^((l+1)/(alpha-l)) t^(-(l+1)/(alpha-l)) used
/// to bound every fast-solution iterate. Requires l < alpha and t >= 1.
double comparison_bound(const Params& p, double t);
/// Value of comparison_bound at t = 1, which is also the admissible cap on v(1).
double comparison_cap(const Params& p);

/// Energy decay exponents: fast -(l+2)/(alpha-l), slow -(alpha+1)(beta+2)/(beta-alpha).
double fast_energy_exponent(const Params& p);
double slow_energy_exponent(const Params& p);

/// sqrt(d(l+2)/((beta+2)(l+1))): scale of the position coordinate in the
/// polar and (z, w) phase variables.
double phase_scale(const Params& p);

/// a = d(l+2)/(2(l+1)) * ((beta+2)(l+1)/(d(l+2)))^((beta+1)/(beta+2)).
/// This is the coupling constant of the (z, w) field and also the restoring
/// coefficient of the polar angle equation.
double phase_coupling(const Params& p);

/// Damping coefficient c(l+2)/(2(l+1)) shared by the polar and (z, w) fields.
double phase_damping(const Params& p);

}  // namespace sdosc
