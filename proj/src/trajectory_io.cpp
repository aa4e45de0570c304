#include "sdosc/trajectory_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "sdosc/error.hpp"

namespace sdosc {
namespace {

constexpr std::string_view kHeader = "t,u,du,p,E";

double parse_field(std::string_view s, std::size_t line) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ValidationError("trajectory csv line " + std::to_string(line) + ": bad number '" +
                          std::string(s) + "'");
  return x;
}

}  // namespace

std::string format_double(double x) {
  std::array<char, 40> buf{};
  const auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general,
                    kFloatDigits);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << kHeader << '\n';
  for (const Sample& s : traj.samples) {
    os << format_double(s.t) << ',' << format_double(s.u) << ',' << format_double(s.du) << ','
       << format_double(s.p) << ',' << format_double(s.energy) << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_trajectory_csv(os, traj);
  if (!os) throw IoError("write failed for '" + path + "'");
}

Trajectory read_trajectory_csv(std::istream& is) {
  Trajectory traj;
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("trajectory csv is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw ValidationError("trajectory csv header must be '" +
                                             std::string(kHeader) + "'");
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 5> v{};
    std::string_view rest(line);
    for (std::size_t k = 0; k < v.size(); ++k) {
      const auto comma = rest.find(',');
      if ((comma == std::string_view::npos) != (k + 1 == v.size()))
        throw ValidationError("trajectory csv line " + std::to_string(lineno) +
                              ": expected 5 fields");
      v[k] = parse_field(rest.substr(0, comma), lineno);
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
    if (!traj.samples.empty() && !(v[0] > traj.samples.back().t))
      throw ValidationError("trajectory csv line " + std::to_string(lineno) +
                            ": times must be strictly increasing");
    traj.samples.push_back({v[0], v[1], v[2], v[3], v[4]});
  }
  if (traj.samples.empty()) throw ValidationError("trajectory csv has no samples");
  return traj;
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_trajectory_csv(is);
}

void write_grid_csv(std::ostream& os, const std::vector<double>& t,
                    const std::vector<double>& values) {
  os << "t,value\n";
  for (std::size_t i = 0; i < t.size() && i < values.size(); ++i)
    os << format_double(t[i]) << ',' << format_double(values[i]) << '\n';
}

}  // namespace sdosc
