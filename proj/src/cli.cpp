#include "sdosc/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "sdosc/analysis.hpp"
#include "sdosc/constructor.hpp"
#include "sdosc/error.hpp"
#include "sdosc/kernels.hpp"
#include "sdosc/regions.hpp"
#include "sdosc/report.hpp"
#include "sdosc/trajectory_io.hpp"

namespace sdosc::cli {
namespace {

using Json = nlohmann::ordered_json;

void add_params(CLI::App* app, Params& p, bool with_cd) {
  app->add_option("--l", p.l, "exponent l >= 0")->required();
  app->add_option("--alpha", p.alpha, "damping exponent alpha > 0")->required();
  app->add_option("--beta", p.beta, "stiffness exponent beta > 0")->required();
  if (with_cd) {
    app->add_option("--c", p.c, "damping coefficient c > 0")->capture_default_str();
    app->add_option("--d", p.d, "stiffness coefficient d > 0")->capture_default_str();
  }
}

// Writes text to path, or to out when path is empty.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw IoError("write failed for '" + path + "'");
}

Json zeros_json(const std::vector<double>& z) {
  Json a = Json::array();
  for (double t : z) a.push_back(t);
  return a;
}

Json rate_or_null(const std::optional<RateEstimate>& r) { return r ? to_json(*r) : Json(nullptr); }

struct SimulateArgs {
  Params p;
  double u0 = 0.0, du0 = 0.0, t_end = kDefaultTEnd, tol = kDefaultTol;
  std::optional<double> eps;
  std::string out;
};

int do_simulate(const SimulateArgs& a, std::ostream& out) {
  IntegratorOptions opts;
  opts.tol = a.tol;
  const Trajectory traj = a.eps ? integrate_regularized(a.p, *a.eps, a.u0, a.du0, a.t_end, opts)
                                : integrate(a.p, a.u0, a.du0, a.t_end, opts);
  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  if (a.out.empty()) {
    out << csv.str();
    return kExitOk;
  }
  emit(a.out, csv.str(), out);
  Json j;
  j["params"] = to_json(a.p);
  j["initial_condition"] = Json::array({a.u0, a.du0});
  j["t_end"] = a.t_end;
  j["tol"] = a.tol;
  j["regularization"] = a.eps ? Json(*a.eps) : Json(nullptr);
  j["status"] = std::string(to_string(traj.status));
  j["samples"] = traj.samples.size();
  j["final_time"] = traj.t_end();
  j["final_energy"] = traj.samples.back().energy;
  j["u_zeros"] = zeros_json(traj.u_zeros);
  j["du_zeros"] = zeros_json(traj.du_zeros);
  j["trajectory_csv"] = a.out;
  j["defaults"] = defaults_json();
  out << dump_json(j);
  return kExitOk;
}

struct ClassifyArgs {
  Params p;
  bool empirical = false;
  double u0 = 1.0, du0 = 0.0, t_end = kDefaultTEnd, tol = kDefaultTol;
  std::string json, csv;
};

int do_classify(const ClassifyArgs& a, std::ostream& out) {
  a.p.validate();
  if (!a.empirical) {
    if (!a.csv.empty()) throw ValidationError("--csv requires --empirical");
    Json j;
    j["params"] = to_json(a.p);
    j["regime_theoretical"] = std::string(to_string(classify_theoretical(a.p)));
    j["alpha_star"] = alpha_star(a.p);
    j["critical_c0"] = critical_c0(a.p);
    j["well_posed"] = a.p.well_posed();
    j["defaults"] = defaults_json();
    emit(a.json, dump_json(j), out);
    return kExitOk;
  }
  const RunReport r = run_single({a.p, {a.u0, a.du0}, a.t_end, a.tol}, 0);
  if (!a.csv.empty()) emit(a.csv, csv_header() + "\n" + csv_row(r) + "\n", out);
  emit(a.json, dump_json(to_json(r)), out);
  return kExitOk;
}

struct RateArgs {
  std::string traj, series, window, json;
};

std::pair<double, double> parse_window(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ValidationError("--window must be LO,HI");
  try {
    std::size_t used_lo = 0, used_hi = 0;
    const std::string lo_s = s.substr(0, comma), hi_s = s.substr(comma + 1);
    const double lo = std::stod(lo_s, &used_lo);
    const double hi = std::stod(hi_s, &used_hi);
    if (used_lo != lo_s.size() || used_hi != hi_s.size()) throw std::invalid_argument(s);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw ValidationError("--window must be LO,HI with numeric bounds, got '" + s + "'");
  }
}

int do_rate(const RateArgs& a, std::ostream& out) {
  const auto [lo, hi] = parse_window(a.window);
  const Trajectory traj = read_trajectory_csv(a.traj);
  const Series series = *parse_series(a.series);
  const RateEstimate r = fit_trajectory(traj, series, lo, hi);
  Json j;
  j["trajectory"] = a.traj;
  j["series"] = a.series;
  j["rate"] = to_json(r);
  j["defaults"] = defaults_json();
  emit(a.json, dump_json(j), out);
  return kExitOk;
}

struct ConstructArgs {
  Params p;
  std::optional<double> phi;
  double t_max = kDefaultTMax;
  std::string eps_fp = "AUTO";
  std::size_t nodes = 2000;
  std::size_t max_iter = 200;
  double fp_tol = 1e-10;
  std::string out_prefix;
};

int do_construct(const ConstructArgs& a, std::ostream& out) {
  FastSolutionOptions opts;
  opts.t_max = a.t_max;
  opts.nodes = a.nodes;
  opts.max_iter = a.max_iter;
  opts.fp_tol = a.fp_tol;
  if (a.phi) {
    if (*a.phi < 0.0) throw ValidationError("--phi must be >= 0");
    opts.phi = *a.phi;
  }
  if (a.eps_fp != "AUTO" && a.eps_fp != "auto") {
    try {
      std::size_t used = 0;
      opts.eps_fp = std::stod(a.eps_fp, &used);
      if (used != a.eps_fp.size()) throw std::invalid_argument(a.eps_fp);
    } catch (const std::logic_error&) {
      throw ValidationError("--eps-fp must be AUTO or a number, got '" + a.eps_fp + "'");
    }
  }
  const FastSolution sol = build_fast_solution(a.p, opts);
  const FastSolutionCheck chk = check_fast_solution(a.p, sol);
  const AsymptoticConstants k = asymptotic_constants(a.p);

  Json j;
  j["params"] = to_json(a.p);
  j["phi"] = sol.phi;
  j["phi_cap"] = comparison_cap(a.p);
  j["t_max"] = a.t_max;
  j["nodes"] = a.nodes;
  j["eps_fp"] = sol.eps_fp;
  j["eps_max"] = sol.eps_max;
  j["c_est"] = sol.c_est;
  j["iterations"] = sol.iterations;
  j["last_change"] = sol.last_change;
  j["fp_tol"] = a.fp_tol;
  j["residual"] = sol.residual;
  j["iterates_bounded"] = sol.iterates_bounded;
  j["iterates_monotone"] = sol.iterates_monotone;
  j["du_rate"] = to_json(chk.du_rate);
  j["du_expected_exponent"] = chk.expected_du_exponent;
  j["u_rate"] = to_json(chk.u_rate);
  j["u_expected_exponent"] = chk.expected_u_exponent;
  j["k_du"] = k.k_du;
  j["k_u"] = k.k_u;
  j["du_constant_ratio"] = Json::array({chk.du_constant_ratio_min, chk.du_constant_ratio_max});
  j["defaults"] = defaults_json();

  if (!a.out_prefix.empty()) {
    auto write_grid = [&](const std::string& name, const GridFunction& g) {
      std::ostringstream os;
      write_grid_csv(os, g.nodes, g.values);
      emit(a.out_prefix + "_" + name + ".csv", os.str(), out);
    };
    write_grid("v", sol.v);
    write_grid("u", sol.u);
    write_grid("du", sol.du);
    emit(a.out_prefix + "_summary.json", dump_json(j), out);
  }
  out << dump_json(j);
  return kExitOk;
}

struct RegionArgs {
  Params p;
  RegionSpec spec;
  std::size_t samples = 2000;
  bool invariance = false;
  std::size_t n_ics = 50;
  double t_end = kDefaultTEnd;
  double tol = kDefaultTol;
  std::uint64_t seed = 1;
  std::string json;
};

int do_region(const RegionArgs& a, std::ostream& out) {
  const CertificateReport cert = region_certificate(a.p, a.spec, a.samples);
  Json j;
  j["params"] = to_json(a.p);
  j["eps_r"] = a.spec.eps_r;
  j["M"] = a.spec.M;
  j["exponent_check"] = {{"lhs", cert.exponent_lhs},
                         {"rhs", cert.exponent_rhs},
                         {"pass", cert.exponent_lhs < cert.exponent_rhs}};
  Json pieces = Json::array();
  for (const PieceReport& pc : cert.pieces)
    pieces.push_back({{"piece", pc.name},
                      {"samples", pc.samples},
                      {"worst_margin", pc.worst_margin},
                      {"pass", pc.pass}});
  j["pieces"] = pieces;
  j["pass"] = cert.pass;
  const std::optional<double> best = largest_certified_radius(a.p, a.spec.M, a.samples);
  j["largest_certified_eps_r"] = best ? Json(*best) : Json(nullptr);
  if (a.invariance) {
    const InvarianceReport inv =
        region_invariance_test(a.p, a.spec, a.n_ics, a.t_end, a.tol, a.seed);
    Json ics = Json::array();
    for (const IcReport& ic : inv.ics)
      ics.push_back({{"z0", ic.start.z},
                     {"w0", ic.start.w},
                     {"u0", ic.u0},
                     {"du0", ic.du0},
                     {"contained", ic.contained},
                     {"worst_excess", ic.worst_excess},
                     {"status", std::string(to_string(ic.status))},
                     {"energy_rate", rate_or_null(ic.energy_rate)}});
    j["invariance"] = {{"n_ics", a.n_ics},
                       {"t_end", a.t_end},
                       {"tol", a.tol},
                       {"seed", a.seed},
                       {"contained", inv.contained},
                       {"fraction", inv.fraction},
                       {"slow_exponent", inv.slow_exponent},
                       {"fast_exponent", inv.fast_exponent},
                       {"closer_to_slow", inv.closer_to_slow},
                       {"ics", ics}};
  }
  j["defaults"] = defaults_json();
  emit(a.json, dump_json(j), out);
  return kExitOk;
}

struct SweepArgs {
  std::string grid, out;
  unsigned jobs = 1;
};

int do_sweep(const SweepArgs& a, std::ostream& out) {
  const SweepGrid grid = load_sweep_grid(a.grid);
  const std::vector<RunReport> reports = run_sweep(grid.enumerate(), a.jobs);
  std::ostringstream csv;
  write_reports_csv(csv, reports);
  emit(a.out, csv.str(), out);
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Singular damped oscillator toolkit", "sdosc"};
  app.require_subcommand(1);
  std::string isa = "auto";
  app.add_option("--isa", isa, "kernel variant")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}))
      ->capture_default_str();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "integrate one trajectory and write it as CSV");
  add_params(simulate, sim.p, true);
  simulate->add_option("--u0", sim.u0)->required();
  simulate->add_option("--du0", sim.du0)->required();
  simulate->add_option("--t-end", sim.t_end)->capture_default_str();
  simulate->add_option("--tol", sim.tol)->capture_default_str();
  simulate->add_option("--eps", sim.eps, "integrate the regularised system instead");
  simulate->add_option("--out", sim.out, "trajectory CSV (stdout if omitted)");

  ClassifyArgs cls;
  auto* classify = app.add_subcommand("classify", "theoretical (and empirical) regime");
  add_params(classify, cls.p, true);
  classify->add_flag("--empirical", cls.empirical, "also integrate and classify the trajectory");
  classify->add_option("--u0", cls.u0)->capture_default_str();
  classify->add_option("--du0", cls.du0)->capture_default_str();
  classify->add_option("--t-end", cls.t_end)->capture_default_str();
  classify->add_option("--tol", cls.tol)->capture_default_str();
  classify->add_option("--json", cls.json, "report file (stdout if omitted)");
  classify->add_option("--csv", cls.csv, "one-row sweep-format CSV (needs --empirical)");

  RateArgs rate;
  auto* rate_cmd = app.add_subcommand("rate", "fit a power-law decay rate to a trajectory CSV");
  rate_cmd->add_option("--traj", rate.traj)->required();
  rate_cmd->add_option("--series", rate.series)
      ->required()
      ->check(CLI::IsMember({"E", "u", "du"}));
  rate_cmd->add_option("--window", rate.window, "LO,HI")->required();
  rate_cmd->add_option("--json", rate.json);

  ConstructArgs con;
  con.p.c = con.p.d = 1.0;
  auto* construct = app.add_subcommand("construct-fast", "build a fast solution by fixed-point iteration");
  add_params(construct, con.p, false);
  construct->add_option("--phi", con.phi, "v(1); defaults to the admissible cap");
  construct->add_option("--tmax", con.t_max)->capture_default_str();
  construct->add_option("--eps-fp", con.eps_fp, "AUTO or a number")->capture_default_str();
  construct->add_option("--nodes", con.nodes)->capture_default_str();
  construct->add_option("--max-iter", con.max_iter)->capture_default_str();
  construct->add_option("--fp-tol", con.fp_tol)->capture_default_str();
  construct->add_option("--out-prefix", con.out_prefix, "write P_v.csv, P_u.csv, P_du.csv, P_summary.json");

  RegionArgs reg;
  auto* region = app.add_subcommand("region-check", "certify the slow-solution region");
  add_params(region, reg.p, true);
  region->add_option("--M", reg.spec.M)->required();
  region->add_option("--eps-r", reg.spec.eps_r)->required();
  region->add_option("--samples", reg.samples)->capture_default_str();
  region->add_flag("--invariance", reg.invariance, "also simulate trajectories from inside the region");
  region->add_option("--n-ics", reg.n_ics)->capture_default_str();
  region->add_option("--t-end", reg.t_end)->capture_default_str();
  region->add_option("--tol", reg.tol)->capture_default_str();
  region->add_option("--seed", reg.seed)->capture_default_str();
  region->add_option("--json", reg.json);

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "run a parameter grid in parallel");
  sweep->add_option("--grid", sw.grid, "grid JSON file")->required();
  sweep->add_option("--jobs", sw.jobs)->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_option("--out", sw.out, "CSV file (stdout if omitted)");

  std::vector<const char*> argv{"sdosc"};
  for (const std::string& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  struct RestoreIsa {
    kernels::Isa isa;
    ~RestoreIsa() { kernels::set_active_isa(isa); }
  } restore{kernels::active_isa()};
  try {
    if (isa == "scalar") kernels::set_active_isa(kernels::Isa::Scalar);
    if (isa == "avx2") {
      if (!kernels::isa_available(kernels::Isa::Avx2))
        throw ValidationError("avx2 kernels are not available on this machine");
      kernels::set_active_isa(kernels::Isa::Avx2);
    }
    if (simulate->parsed()) return do_simulate(sim, out);
    if (classify->parsed()) return do_classify(cls, out);
    if (rate_cmd->parsed()) return do_rate(rate, out);
    if (construct->parsed()) return do_construct(con, out);
    if (region->parsed()) return do_region(reg, out);
    if (sweep->parsed()) return do_sweep(sw, out);
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
  err << "usage error: no subcommand\n";
  return kExitUsage;
}

}  // namespace sdosc::cli
