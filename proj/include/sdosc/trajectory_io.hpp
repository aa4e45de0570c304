#pragma once

// CSV serialization of trajectories (header `t,u,du,p,E`) and of sampled
// grid functions (header `t,value`).

#include <iosfwd>
#include <string>
#include <vector>

#include "sdosc/integrator.hpp"

namespace sdosc {

/// Number of significant digits used for every floating-point value written.
inline constexpr int kFloatDigits = 17;

/// Format a double with kFloatDigits significant digits.
std::string format_double(double x);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// Throws IoError if the file cannot be written.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

/// Reads samples only; params, tol and event lists are left for the caller
/// (see finalize_loaded). Throws ValidationError on a malformed file.
Trajectory read_trajectory_csv(std::istream& is);
/// Throws IoError if the file cannot be opened.
Trajectory read_trajectory_csv(const std::string& path);

void write_grid_csv(std::ostream& os, const std::vector<double>& t,
                    const std::vector<double>& values);

}  // namespace sdosc
