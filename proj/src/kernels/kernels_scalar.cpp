// Scalar reference kernels. These define the expected results for the
// vectorised variants.

#include <algorithm>
#include <cmath>

#include "kernels_impl.hpp"

namespace sdosc::kernels::detail {
namespace {

inline double pow_abs(double ax, double q) {
  if (ax == 0.0) return q > 0.0 ? 0.0 : (q == 0.0 ? 1.0 : HUGE_VAL);
  return std::exp(q * std::log(ax));
}

inline double sgn(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

void abs_pow(const double* x, std::size_t n, double q, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = pow_abs(std::fabs(x[i]), q);
}

void signed_pow(const double* x, std::size_t n, double q, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = sgn(x[i]) * pow_abs(std::fabs(x[i]), q);
}

void energy(const double* u, const double* du, std::size_t n, const EnergyCoeffs& k,
            double* out) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = k.kinetic_coef * pow_abs(std::fabs(du[i]), k.kinetic_exp) +
             k.potential_coef * pow_abs(std::fabs(u[i]), k.potential_exp);
}

void phase_field(const double* z, const double* w, std::size_t n, const FieldCoeffs& k,
                 double* dz, double* dw) {
  for (std::size_t i = 0; i < n; ++i) {
    const double az = std::fabs(z[i]);
    const double aw = std::fabs(w[i]);
    const double sw = sgn(w[i]);
    const double zpow = pow_abs(az, k.ez);
    dz[i] = k.a * zpow * pow_abs(aw, k.ewz) * sw;
    dw[i] = -k.a * pow_abs(aw, k.eww) * zpow * z[i] - k.damping * pow_abs(aw, k.ewd) * sw;
  }
}

LogLogMoments loglog_moments(const double* t, const double* v, std::size_t n) {
  LogLogMoments m;
  m.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(t[i]);
    const double y = std::log(v[i]);
    m.sx += x;
    m.sy += y;
    m.sxx += x * x;
    m.sxy += x * y;
    m.syy += y * y;
  }
  return m;
}

double max_increase(const double* x, std::size_t n) {
  double worst = 0.0;
  for (std::size_t i = 1; i < n; ++i) worst = std::max(worst, x[i] - x[i - 1]);
  return worst;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{Isa::Scalar, abs_pow,        signed_pow,  energy,
                             phase_field, loglog_moments, max_increase};
  return t;
}

}  // namespace sdosc::kernels::detail
