#pragma once

// Dormand-Prince 5(4) trial step and the PI step-size controller shared by
// the oscillator integrators and the scalar forced-ODE solver.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace sdosc::dopri {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct Trial {
  Vec<N> y;      // fifth-order solution at t + h
  Vec<N> dydt;   // f(t + h, y), reused as the first stage of the next step
  Vec<N> error;  // difference between the embedded 5th and 4th order solutions
};

/// One trial step from (t, y) with f(t, y) = dydt already known.
template <std::size_t N, class Rhs>
Trial<N> trial_step(const Rhs& rhs, double t, const Vec<N>& y, const Vec<N>& dydt, double h) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const Vec<N>& k1 = dydt;
  Vec<N> tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
  const Vec<N> k2 = rhs(t + c2 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  const Vec<N> k3 = rhs(t + c3 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  const Vec<N> k4 = rhs(t + c4 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  const Vec<N> k5 = rhs(t + c5 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
  const Vec<N> k6 = rhs(t + h, tmp);

  Trial<N> out;
  for (std::size_t i = 0; i < N; ++i)
    out.y[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
  out.dydt = rhs(t + h, out.y);
  for (std::size_t i = 0; i < N; ++i)
    out.error[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                        e7 * out.dydt[i]);
  return out;
}

/// PI controller (Hairer-Norsett-Wanner, DOPRI5 constants).
class PiController {
 public:
  /// Proposed next step after a trial with scaled error `err` (accepted iff err <= 1).
  double propose(double h, double err) {
    constexpr double beta = 0.04;
    constexpr double expo = 0.2 - 0.75 * beta;
    constexpr double safe = 0.9;
    constexpr double shrink_limit = 5.0;   // at most 5x smaller
    constexpr double grow_limit = 0.1;     // at most 10x larger
    const double fac11 = std::pow(std::max(err, 1e-300), expo);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(err_old_, beta);
      fac = std::clamp(fac / safe, grow_limit, shrink_limit);
      err_old_ = std::max(err, 1e-4);
      return h / fac;
    }
    return h / std::min(shrink_limit, fac11 / safe);
  }

 private:
  double err_old_ = 1e-4;
};

}  // namespace sdosc::dopri
