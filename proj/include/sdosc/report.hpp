#pragma once

// Run reports, parameter sweeps and their CSV/JSON serialization.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sdosc/analysis.hpp"
#include "sdosc/integrator.hpp"
#include "sdosc/model.hpp"

namespace sdosc {

/// Defaults printed into every report.
inline constexpr double kDefaultTol = 1e-9;
inline constexpr double kDefaultTEnd = 200.0;
inline constexpr double kDefaultTMax = 1e4;

nlohmann::ordered_json defaults_json();

struct InitialCondition {
  double u0 = 0.0;
  double du0 = 0.0;
};

struct RunConfig {
  Params params;
  InitialCondition ic;
  double t_end = kDefaultTEnd;
  double tol = kDefaultTol;
};

/// Value lists per coefficient plus initial conditions; the Cartesian product
/// is enumerated with l varying slowest and the initial condition fastest.
struct SweepGrid {
  std::vector<double> l, alpha, beta, c, d;
  std::vector<InitialCondition> ics;
  double t_end = kDefaultTEnd;
  double tol = kDefaultTol;

  [[nodiscard]] std::vector<RunConfig> enumerate() const;
};

/// Expected keys: "l", "alpha", "beta", "c", "d" (arrays of numbers), "ics"
/// (array of [u0, du0] pairs) and optional "t_end", "tol". Throws ValidationError.
SweepGrid parse_sweep_grid(const nlohmann::ordered_json& j);
/// Throws IoError if the file cannot be read, ValidationError if it is malformed.
SweepGrid load_sweep_grid(const std::string& path);

struct RunReport {
  std::size_t index = 0;
  RunConfig config;
  Regime regime_theoretical = Regime::OutsideTheory;
  /// OutsideTheory when the parameters are not well posed (no integration is run).
  Regime regime_empirical = Regime::OutsideTheory;
  /// Completed, EnergyFloorReached, StepFailure or NotWellPosed.
  std::string status;
  std::size_t u_zeros = 0;
  std::size_t du_zeros = 0;
  /// Fits on [t_end/4, t_end]; absent when the fit precondition fails.
  std::optional<RateEstimate> rate_E, rate_u, rate_du;
  std::optional<AuditReport> audit;
};

/// Integrates, audits, fits and classifies one configuration. Throws
/// ValidationError for invalid parameters, t_end < 20 or tol <= 0.
RunReport run_single(const RunConfig& cfg, std::size_t index = 0);

/// Runs every configuration on up to `jobs` threads; results are in input order
/// and do not depend on jobs. The first failure (in input order) is rethrown.
std::vector<RunReport> run_sweep(const std::vector<RunConfig>& configs, unsigned jobs);

std::string csv_header();
std::string csv_row(const RunReport& r);
void write_reports_csv(std::ostream& os, const std::vector<RunReport>& reports);

nlohmann::ordered_json to_json(const RateEstimate& r);
nlohmann::ordered_json to_json(const AuditReport& a);
nlohmann::ordered_json to_json(const Params& p);
nlohmann::ordered_json to_json(const RunReport& r);

/// Serializes with every floating-point number written to 17 significant digits.
std::string dump_json(const nlohmann::ordered_json& j);

}  // namespace sdosc
