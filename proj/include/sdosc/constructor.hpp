#pragma once

// Fast solutions built as the fixed point of an integro-differential map.
//
// With c = d = 1 and u(t) = (integral from t+1 to infinity of v^(1/(l+1))),
// the equation becomes
//
//     v' + v^((alpha+1)/(l+1)) = eps * K(v),   v(1) = phi,
//     K(v)(t) = (integral from t to infinity of v^(1/(l+1)) ds)^(beta+1),
//
// which is solved by iterating v_{n+1} = S(eps K(v_n)) from v_0 = 0, where S
// solves the forced scalar ODE. Every iterate stays below the explicit
// super-solution comparison_bound.

#include <cstddef>
#include <optional>
#include <vector>

#include "sdosc/analysis.hpp"
#include "sdosc/model.hpp"

namespace sdosc {

/// Values sampled on strictly increasing nodes.
struct GridFunction {
  std::vector<double> nodes;
  std::vector<double> values;

  [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

/// n nodes t_i = q^i spanning [1, t_max] (last node exactly t_max).
std::vector<double> geometric_grid(double t_max, std::size_t n);

enum class TailMode { Truncate, BoundTail };

/// Integral of v^(1/(l+1)) from each node to t_max (trapezoid) plus, for
/// BoundTail, the closed-form integral of comparison_bound^(1/(l+1)) beyond t_max.
std::vector<double> tail_integral(const Params& p, const GridFunction& v, TailMode mode);

/// K(v) at every node. Requires l < alpha < alpha* and alpha - l < 1;
/// throws DomainError otherwise and ValidationError on negative values.
GridFunction operator_K(const Params& p, const GridFunction& v, TailMode mode = TailMode::BoundTail);

/// sup over nodes of t^((alpha+1)/(alpha-l)) f(t).
double y_norm(const Params& p, const GridFunction& f);
/// sup over nodes of t^((l+1)/(alpha-l)) v(t).
double x_norm(const Params& p, const GridFunction& v);

struct ForcedOdeOptions {
  double rtol = 1e-12;
  /// Relative slack when checking the Lemma-type bounds on source and output.
  double bound_slack = 1e-9;
};

/// Solves v' = f - v^((alpha+1)/(l+1)), v(1) = phi on the source nodes with
/// adaptive steps between nodes and linear interpolation of f. Throws
/// ValidationError if phi is outside [0, comparison_cap] or the source
/// exceeds the admissible Y-norm, NumericalError if the result leaves the
/// comparison bound or a step underflows.
GridFunction solve_forced_ode(const Params& p, const GridFunction& source, double phi,
                              const ForcedOdeOptions& opts = {});

struct FastSolutionOptions {
  double phi = -1.0;  // negative: use comparison_cap
  std::optional<double> eps_fp;  // unset: half the admissible maximum
  double t_max = 1e4;
  std::size_t nodes = 2000;
  std::size_t max_iter = 200;
  double fp_tol = 1e-10;
  TailMode tail = TailMode::BoundTail;
};

struct FastSolution {
  GridFunction v;   // on [1, t_max]
  GridFunction u;   // on [0, t_max - 1]
  GridFunction du;  // on [0, t_max - 1]
  double phi = 0.0;
  double eps_fp = 0.0;
  double eps_max = 0.0;
  double c_est = 0.0;
  std::size_t iterations = 0;
  /// Normalized X-norm of the last change: x_norm(v_n - v_{n-1}) / comparison_cap.
  double last_change = 0.0;
  /// Max relative violation of v' + v^((alpha+1)/(l+1)) = eps K(v) over interior nodes with t <= t_max/2.
  double residual = 0.0;
  bool iterates_bounded = true;
  bool iterates_monotone = true;
};

/// Requires c = d = 1 and l < alpha < alpha*. Throws NumericalError if the
/// iteration has not converged after max_iter steps.
FastSolution build_fast_solution(const Params& p, const FastSolutionOptions& opts = {});

/// Relative residual of the integro-ODE at the nodes of v (see FastSolution::residual).
double integro_residual(const Params& p, const GridFunction& v, double eps_fp, TailMode mode);

struct FastSolutionCheck {
  RateEstimate du_rate;        // |u'| on [t_max/4, t_max/2]
  RateEstimate u_rate;         // u on [t_max/4, t_max/2]
  double expected_du_exponent; // -1/(alpha-l)
  double expected_u_exponent;  // -(1-alpha+l)/(alpha-l)
  double du_constant_ratio_min;  // t^(1/(alpha-l))|u'| / K_du over the window
  double du_constant_ratio_max;
};

FastSolutionCheck check_fast_solution(const Params& p, const FastSolution& sol);

}  // namespace sdosc
