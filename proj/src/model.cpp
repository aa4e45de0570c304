#include "sdosc/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "sdosc/error.hpp"

namespace sdosc {
namespace {

bool approx_equal(double a, double b) {
  return std::fabs(a - b) <= kThresholdRelTol * std::max(std::fabs(a), std::fabs(b));
}

constexpr std::array<std::string_view, 4> kRegimeNames = {
    "Oscillatory", "NonOscillatoryFiniteZeros", "CriticalAtMostOneZero", "OutsideTheory"};

}  // namespace

void Params::validate() const {
  auto fail = [this](const char* why) {
    std::ostringstream os;
    os.precision(17);
    os << why << " (l=" << l << ", alpha=" << alpha << ", beta=" << beta << ", c=" << c
       << ", d=" << d << ")";
    throw ValidationError(os.str());
  };
  if (!std::isfinite(l) || !std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(c) ||
      !std::isfinite(d))
    fail("parameters must be finite");
  if (l < 0.0) fail("l must be >= 0");
  if (alpha <= 0.0) fail("alpha must be > 0");
  if (beta <= 0.0) fail("beta must be > 0");
  if (c <= 0.0) fail("c must be > 0");
  if (d <= 0.0) fail("d must be > 0");
}

std::string_view to_string(Regime r) { return kRegimeNames[static_cast<std::size_t>(r)]; }

std::optional<Regime> parse_regime(std::string_view s) {
  for (std::size_t i = 0; i < kRegimeNames.size(); ++i)
    if (kRegimeNames[i] == s) return static_cast<Regime>(i);
  return std::nullopt;
}

double alpha_star(const Params& p) { return (p.beta * (p.l + 1.0) + p.l) / (p.beta + 2.0); }

double critical_c0(const Params& p) {
  const double q = (p.beta + 1.0) / (p.beta + 2.0);
  const double base = (p.beta + 2.0) * (p.l + 1.0) / ((p.beta + 1.0) * (p.l + 2.0));
  return (p.beta + 2.0) * std::pow(base, q) * std::pow(p.d, 1.0 / (p.beta + 2.0));
}

Regime classify_theoretical(const Params& p) {
  if (!(p.l < p.alpha) || p.l > p.beta) return Regime::OutsideTheory;
  const double as = alpha_star(p);
  if (approx_equal(p.alpha, as)) {
    const double c0 = critical_c0(p);
    if (p.c < c0 && !approx_equal(p.c, c0)) return Regime::Oscillatory;
    return Regime::CriticalAtMostOneZero;
  }
  return p.alpha > as ? Regime::Oscillatory : Regime::NonOscillatoryFiniteZeros;
}

double energy(const Params& p, double u, double du) {
  return (p.l + 1.0) / (p.l + 2.0) * abs_pow(du, p.l + 2.0) +
         p.d / (p.beta + 2.0) * abs_pow(u, p.beta + 2.0);
}

AsymptoticConstants asymptotic_constants(const Params& p) {
  const double gap = p.alpha - p.l;
  if (!(gap > 0.0) || !(p.alpha < alpha_star(p)))
    throw DomainError("asymptotic constants need l < alpha < alpha*");
  const double k_du = std::pow((p.l + 1.0) / (p.c * gap), 1.0 / gap);
  return {gap / (1.0 - gap) * k_du, k_du};
}

double comparison_cap(const Params& p) {
  const double gap = p.alpha - p.l;
  if (!(gap > 0.0)) throw DomainError("comparison bound needs alpha > l");
  return std::pow((p.l + 2.0) / gap, (p.l + 1.0) / gap);
}

double comparison_bound(const Params& p, double t) {
  const double cap = comparison_cap(p);
  if (!(t >= 1.0)) throw DomainError("comparison bound is defined for t >= 1");
  return cap * std::pow(t, -(p.l + 1.0) / (p.alpha - p.l));
}

double fast_energy_exponent(const Params& p) {
  if (!(p.alpha > p.l)) throw DomainError("fast decay exponent needs alpha > l");
  return -(p.l + 2.0) / (p.alpha - p.l);
}

double slow_energy_exponent(const Params& p) {
  if (!(p.beta > p.alpha)) throw DomainError("slow decay exponent needs beta > alpha");
  return -(p.alpha + 1.0) * (p.beta + 2.0) / (p.beta - p.alpha);
}

double phase_scale(const Params& p) {
  return std::sqrt(p.d * (p.l + 2.0) / ((p.beta + 2.0) * (p.l + 1.0)));
}

double phase_coupling(const Params& p) {
  const double ratio = (p.beta + 2.0) * (p.l + 1.0) / (p.d * (p.l + 2.0));
  return p.d * (p.l + 2.0) / (2.0 * (p.l + 1.0)) * std::pow(ratio, (p.beta + 1.0) / (p.beta + 2.0));
}

double phase_damping(const Params& p) { return p.c * (p.l + 2.0) / (2.0 * (p.l + 1.0)); }

}  // namespace sdosc
