#pragma once

// The sector S = {z < 0, z^2 + w^2 < eps_r^2, 0 < w/|z| < M} of the
// half-power phase plane z = K|u|^(beta/2) u, w = |u'|^(l/2) u', which traps
// slow solutions. Certification samples the field on the boundary; the
// invariance test simulates trajectories from inside S.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdosc/analysis.hpp"
#include "sdosc/integrator.hpp"
#include "sdosc/model.hpp"

namespace sdosc {

struct PhasePoint {
  double z = 0.0;
  double w = 0.0;
};

struct RegionSpec {
  double eps_r = 1e-3;
  double M = 1.0;
};

PhasePoint to_phase(const Params& p, double u, double du);
/// Inverse of to_phase: (u, u').
std::pair<double, double> from_phase(const Params& p, const PhasePoint& pt);

struct PhaseRates {
  double dz;
  double dw;
};

/// Throws DomainError at w = 0 when l > 0.
PhaseRates field_zw(const Params& p, const PhasePoint& pt);

/// |z dz + w dw + D |w|^(2(alpha+2)/(l+2))| relative to the size of its terms,
/// D = c(l+2)/(2(l+1)).
double radial_identity_defect(const Params& p, const PhasePoint& pt);

/// Distance by which pt lies outside the closure of S (0 inside), measured as
/// the largest violation of the four defining inequalities.
double region_excess(const RegionSpec& spec, const PhasePoint& pt);

struct PieceReport {
  std::string name;
  std::size_t samples = 0;
  double worst_margin = 0.0;  // smallest margin; > 0 means the check holds
  bool pass = false;
};

struct CertificateReport {
  double exponent_lhs = 0.0;  // (2 alpha - l)/(l + 2)
  double exponent_rhs = 0.0;  // beta/(beta + 2)
  std::vector<PieceReport> pieces;
  bool pass = false;
};

/// Requires l < alpha < alpha*, eps_r > 0, M > 0 and n_samples >= 2; throws
/// DomainError / ValidationError otherwise.
CertificateReport region_certificate(const Params& p, const RegionSpec& spec, std::size_t n_samples);

/// Largest radius among eps_r = 10^0, 10^-1, ..., 10^-max_decades whose
/// certificate passes at slope M; nullopt if none does.
std::optional<double> largest_certified_radius(const Params& p, double M, std::size_t n_samples,
                                               int max_decades = 9);

struct IcReport {
  PhasePoint start;
  double u0 = 0.0;
  double du0 = 0.0;
  bool contained = false;
  double worst_excess = 0.0;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  std::optional<RateEstimate> energy_rate;  // E on [T/4, T]
};

struct InvarianceReport {
  std::vector<IcReport> ics;
  std::size_t contained = 0;
  double fraction = 0.0;  // contained / ics (1 when empty)
  double slow_exponent = 0.0;
  double fast_exponent = 0.0;
  std::size_t closer_to_slow = 0;
};

/// Starts n_ics trajectories at deterministic pseudo-random points strictly
/// inside S (seeded), integrates each to time T and checks that every sample
/// stays within tol * eps_r of the closure of S.
InvarianceReport region_invariance_test(const Params& p, const RegionSpec& spec, std::size_t n_ics,
                                        double T, double tol, std::uint64_t seed = 1);

}  // namespace sdosc
