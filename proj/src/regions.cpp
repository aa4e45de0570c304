#include "sdosc/regions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "sdosc/error.hpp"
#include "sdosc/kernels.hpp"

namespace sdosc {
namespace {

kernels::FieldCoeffs field_coeffs(const Params& p) {
  return {phase_coupling(p),
          phase_damping(p),
          p.beta / (p.beta + 2.0),
          2.0 / (p.l + 2.0),
          -p.l / (p.l + 2.0),
          (2.0 * p.alpha - p.l + 2.0) / (p.l + 2.0)};
}

void require_slow_regime(const Params& p, const RegionSpec& spec) {
  p.validate();
  if (!p.strict_gap() || !(p.alpha < alpha_star(p)))
    throw DomainError("region S needs l < alpha < alpha*");
  if (!(spec.eps_r > 0.0) || !std::isfinite(spec.eps_r))
    throw ValidationError("eps_r must be > 0");
  if (!(spec.M > 0.0) || !std::isfinite(spec.M)) throw ValidationError("M must be > 0");
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

PieceReport evaluate_piece(const Params& p, std::string name, const std::vector<double>& z,
                           const std::vector<double>& w, auto margin) {
  std::vector<double> dz(z.size()), dw(z.size());
  kernels::phase_field(z, w, field_coeffs(p), dz, dw);
  PieceReport rep;
  rep.name = std::move(name);
  rep.samples = z.size();
  rep.worst_margin = HUGE_VAL;
  for (std::size_t i = 0; i < z.size(); ++i)
    rep.worst_margin = std::min(rep.worst_margin, margin(z[i], w[i], dz[i], dw[i]));
  rep.pass = rep.worst_margin > 0.0;
  return rep;
}

}  // namespace

PhasePoint to_phase(const Params& p, double u, double du) {
  return {phase_scale(p) * signed_pow(u, 0.5 * p.beta + 1.0), signed_pow(du, 0.5 * p.l + 1.0)};
}

std::pair<double, double> from_phase(const Params& p, const PhasePoint& pt) {
  return {signed_pow(pt.z / phase_scale(p), 1.0 / (0.5 * p.beta + 1.0)),
          signed_pow(pt.w, 1.0 / (0.5 * p.l + 1.0))};
}

PhaseRates field_zw(const Params& p, const PhasePoint& pt) {
  if (pt.w == 0.0 && p.l > 0.0) throw DomainError("the w-equation is singular at w = 0");
  const kernels::FieldCoeffs k = field_coeffs(p);
  const double zpow = abs_pow(pt.z, k.ez);
  const double sw = sign(pt.w);
  return {k.a * zpow * abs_pow(pt.w, k.ewz) * sw,
          -k.a * abs_pow(pt.w, k.eww) * zpow * pt.z - k.damping * abs_pow(pt.w, k.ewd) * sw};
}

double radial_identity_defect(const Params& p, const PhasePoint& pt) {
  const PhaseRates f = field_zw(p, pt);
  const double zz = pt.z * f.dz;
  const double ww = pt.w * f.dw;
  const double rhs = phase_damping(p) * abs_pow(pt.w, 2.0 * (p.alpha + 2.0) / (p.l + 2.0));
  const double scale = std::fabs(zz) + std::fabs(ww) + rhs;
  return scale > 0.0 ? std::fabs(zz + ww + rhs) / scale : 0.0;
}

double region_excess(const RegionSpec& spec, const PhasePoint& pt) {
  const double line = (pt.w + spec.M * pt.z) / std::sqrt(1.0 + spec.M * spec.M);
  return std::max({0.0, pt.z, -pt.w, std::hypot(pt.z, pt.w) - spec.eps_r, line});
}

CertificateReport region_certificate(const Params& p, const RegionSpec& spec,
                                     std::size_t n_samples) {
  require_slow_regime(p, spec);
  if (n_samples < 2) throw ValidationError("n_samples must be >= 2");
  CertificateReport rep;
  rep.exponent_lhs = (2.0 * p.alpha - p.l) / (p.l + 2.0);
  rep.exponent_rhs = p.beta / (p.beta + 2.0);

  const double eps = spec.eps_r;
  const double M = spec.M;
  const double n = static_cast<double>(n_samples);
  std::vector<double> z(n_samples), w(n_samples);

  // Arc of the disc inside the sector (open ends excluded): radial component <= 0.
  const double phi_lo = std::numbers::pi - std::atan(M);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double phi = phi_lo + (std::numbers::pi - phi_lo) * (static_cast<double>(i) + 0.5) / n;
    z[i] = eps * std::cos(phi);
    w[i] = eps * std::sin(phi);
  }
  // Margin -(z dz + w dw); equals the damping term, so it is > 0 for w > 0.
  rep.pieces.push_back(evaluate_piece(p, "arc", z, w, [](double zz, double ww, double dz, double dw) {
    return -(zz * dz + ww * dw);
  }));

  // Ray w = M|z|: the field must point into the sector, -(M dz + dw) > 0.
  const std::vector<double> lam = log_grid(1e-6 * eps, eps / std::sqrt(1.0 + M * M), n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    z[i] = -lam[i];
    w[i] = M * lam[i];
  }
  rep.pieces.push_back(evaluate_piece(p, "ray", z, w, [M](double, double, double dz, double dw) {
    return -(M * dz + dw);
  }));

  // Approach to the axis w = 0 from above at fixed z < 0: dw > 0.
  const std::vector<double> zs = log_grid(1e-6 * eps, eps * (1.0 - 1e-9), n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    z[i] = -zs[i];
    w[i] = 1e-6 * std::min(1.0, M) * zs[i];
  }
  rep.pieces.push_back(evaluate_piece(p, "axis", z, w, [](double, double, double, double dw) {
    return dw;
  }));

  rep.pass = rep.exponent_lhs < rep.exponent_rhs &&
             std::all_of(rep.pieces.begin(), rep.pieces.end(),
                         [](const PieceReport& r) { return r.pass; });
  return rep;
}

std::optional<double> largest_certified_radius(const Params& p, double M, std::size_t n_samples,
                                               int max_decades) {
  for (int k = 0; k <= max_decades; ++k) {
    const double eps = std::pow(10.0, -k);
    if (region_certificate(p, {eps, M}, n_samples).pass) return eps;
  }
  return std::nullopt;
}

InvarianceReport region_invariance_test(const Params& p, const RegionSpec& spec, std::size_t n_ics,
                                        double T, double tol, std::uint64_t seed) {
  require_slow_regime(p, spec);
  if (!(T > 0.0)) throw ValidationError("T must be > 0");
  InvarianceReport rep;
  rep.slow_exponent = slow_energy_exponent(p);
  rep.fast_exponent = fast_energy_exponent(p);
  rep.fraction = 1.0;
  if (n_ics == 0) return rep;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  const double phi_lo = std::numbers::pi - std::atan(spec.M);
  IntegratorOptions opts;
  opts.tol = tol;
  const double slack = tol * spec.eps_r;

  for (std::size_t k = 0; k < n_ics; ++k) {
    const double rho = spec.eps_r * std::sqrt(unit(rng));
    const double phi = phi_lo + (std::numbers::pi - phi_lo) * unit(rng);
    IcReport ic;
    ic.start = {rho * std::cos(phi), rho * std::sin(phi)};
    std::tie(ic.u0, ic.du0) = from_phase(p, ic.start);

    const Trajectory traj = integrate(p, ic.u0, ic.du0, T, opts);
    ic.status = traj.status;
    for (const Sample& s : traj.samples)
      ic.worst_excess = std::max(ic.worst_excess, region_excess(spec, to_phase(p, s.u, s.du)));
    ic.contained = ic.worst_excess <= slack;
    try {
      ic.energy_rate = fit_trajectory(traj, Series::E, 0.25 * T, T);
    } catch (const ValidationError&) {
      ic.energy_rate.reset();
    }
    if (ic.contained) ++rep.contained;
    if (ic.energy_rate && std::fabs(ic.energy_rate->exponent - rep.slow_exponent) <
                              std::fabs(ic.energy_rate->exponent - rep.fast_exponent))
      ++rep.closer_to_slow;
    rep.ics.push_back(ic);
  }
  rep.fraction = static_cast<double>(rep.contained) / static_cast<double>(n_ics);
  return rep;
}

}  // namespace sdosc
