// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sdosc/analysis.hpp"
#include "sdosc/cli.hpp"
#include "sdosc/constructor.hpp"
#include "sdosc/integrator.hpp"
#include "sdosc/regions.hpp"

using namespace sdosc;

namespace {

// Fixed before any run; every random draw below comes from this seed.
constexpr std::uint64_t kSeed = 20261016;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::vector<std::pair<double, double>> random_ics(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<std::pair<double, double>> out;
  while (out.size() < n) {
    const double u0 = U(rng), du0 = U(rng);
    if (u0 != 0.0 || du0 != 0.0) out.emplace_back(u0, du0);
  }
  return out;
}

Outcome energy_law() {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double tol = 1e-9;
  double worst_increase = 0.0, worst_residual = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double l = 1.5 * U(rng);
    const Params p{l, l + 0.05 + 2.0 * U(rng), l + 0.05 + 2.0 * U(rng), 0.2 + 2.0 * U(rng),
                   0.2 + 2.0 * U(rng)};
    const double u0 = 2.0 * U(rng) - 1.0, du0 = 2.0 * U(rng) - 1.0;
    const AuditReport a = energy_audit(p, integrate(p, u0, du0, 100.0, tol));
    worst_increase = std::max(worst_increase, a.max_energy_increase);
    worst_residual = std::max(worst_residual, a.dissipation_residual);
  }
  return {worst_increase <= 50 * tol && worst_residual <= 1e-5,
          fmt("max energy increase %.3g (limit %.3g), dissipation residual %.3g (limit 1e-5)",
              worst_increase, 50 * tol, worst_residual)};
}

const Params kP1{0, 1, 1, 1, 1};

Outcome oscillatory_regime(const Trajectory& tr) {
  const Regime emp = classify_empirical(kP1, tr);
  const Regime th = classify_theoretical(kP1);
  std::size_t worst = tr.u_zeros.size();
  for (const auto& [lo, hi] : dyadic_windows(tr.t_end(), 10.0)) {
    const auto n = std::count_if(tr.u_zeros.begin(), tr.u_zeros.end(),
                                 [&](double z) { return z >= lo && z <= hi; });
    worst = std::min(worst, static_cast<std::size_t>(n));
  }
  const double inter = interlacing_fraction(tr);
  const bool ok = emp == Regime::Oscillatory && th == Regime::Oscillatory && worst >= 1 && inter == 1.0;
  return {ok, "empirical " + std::string(to_string(emp)) + ", theoretical " + std::string(to_string(th)) +
                  fmt(", min zeros per dyadic window %.0f, interlacing %.3f", static_cast<double>(worst), inter)};
}

Outcome fast_rate(const Trajectory& tr) {
  const RateEstimate r = fit_trajectory(tr, Series::E, 50.0, 200.0);
  const double target = fast_energy_exponent(kP1);
  const double rel = std::fabs(r.exponent / target - 1.0);
  // t^2 E(t) over the last decade, split into an early and a late half.
  double early = HUGE_VAL, late = HUGE_VAL;
  for (const Sample& s : tr.samples) {
    if (s.t < 20.0) continue;
    const double v = s.t * s.t * s.energy;
    double& slot = s.t < 100.0 ? early : late;
    slot = std::min(slot, v);
  }
  const bool ok = rel <= 0.10 && late > 0.0 && late >= 0.5 * early;
  return {ok, fmt("E exponent %.4f vs %.1f (rel err %.3f), min t^2 E on [20,100] %.4g",
                  r.exponent, target, rel, early) +
                  fmt(", on [100,200] %.4g", late)};
}

const Params kP2{1, 1.2, 3, 1, 1};

struct SlowRuns {
  std::vector<Trajectory> runs;
};

SlowRuns slow_runs() {
  SlowRuns s;
  for (const auto& [u0, du0] : random_ics(5, kSeed)) s.runs.push_back(integrate(kP2, u0, du0, 300.0));
  return s;
}

Outcome non_oscillatory(const SlowRuns& s) {
  int nonosc = 0, pattern = 0;
  for (const Trajectory& tr : s.runs) {
    nonosc += classify_empirical(kP2, tr) == Regime::NonOscillatoryFiniteZeros;
    bool all_neg = true;
    for (const Sample& smp : tr.samples)
      if (smp.t >= 0.5 * tr.t_end()) all_neg = all_neg && sign(smp.u) * sign(smp.du) == -1.0;
    pattern += all_neg;
  }
  return {nonosc == 5 && pattern == 5,
          fmt("%.0f/5 classified NonOscillatoryFiniteZeros, %.0f/5 with sign(u)sign(u') = -1 on the final half",
              nonosc, pattern)};
}

Outcome slow_rate(const SlowRuns& s) {
  const double slow = slow_energy_exponent(kP2), fast = fast_energy_exponent(kP2);
  int near_slow = 0, near_fast = 0;
  std::string fits;
  for (const Trajectory& tr : s.runs) {
    const double e = fit_trajectory(tr, Series::E, 0.25 * tr.t_end(), tr.t_end()).exponent;
    near_slow += std::fabs(e / slow - 1.0) <= 0.15;
    near_fast += std::fabs(e / fast - 1.0) <= 0.15;
    fits += fmt(" %.3f", e);
  }
  return {near_slow >= 4 && near_fast == 0,
          fmt("%.0f/5 within 15%% of %.4f, %.0f within 15%% of %.0f; fits:", near_slow, slow, near_fast, fast) +
              fits};
}

Outcome critical_constant() {
  const Params base{0, 1.0 / 3, 1, 1, 1};
  const double c0 = critical_c0(base);
  Params below = base, above = base;
  below.c = 1.0;
  above.c = 3.0;
  const Trajectory a = integrate(below, 1, 0, 300);
  const Trajectory b = integrate(above, 1, 0, 300);
  const Regime ra = classify_empirical(below, a);
  const bool ok = std::fabs(c0 - 2.4764) < 1e-4 && ra == Regime::Oscillatory && a.u_zeros.size() >= 5 &&
                  b.u_zeros.size() <= 1;
  return {ok, fmt("c0 = %.5f; c=1: %.0f u-zeros (", c0, static_cast<double>(a.u_zeros.size())) +
                  std::string(to_string(ra)) + fmt("); c=3: %.0f u-zeros", static_cast<double>(b.u_zeros.size()))};
}

Outcome constructor() {
  const Params p{0, 0.3, 2, 1, 1};
  const FastSolution s = build_fast_solution(p);
  const FastSolutionCheck c = check_fast_solution(p, s);
  const double rel = std::fabs(c.du_rate.exponent / c.expected_du_exponent - 1.0);
  const bool ok = s.iterates_bounded && s.residual <= 1e-3 && rel <= 0.10 &&
                  c.du_constant_ratio_min >= 0.9 && c.du_constant_ratio_max <= 1.1;
  return {ok, fmt("converged in %.0f iterations, residual %.3g, |u'| exponent %.4f vs %.4f, ",
                  static_cast<double>(s.iterations), s.residual, c.du_rate.exponent, c.expected_du_exponent) +
                  fmt("constant ratio [%.4f, %.4f], iterates bounded: ", c.du_constant_ratio_min,
                      c.du_constant_ratio_max) +
                  (s.iterates_bounded ? "yes" : "no")};
}

Outcome region() {
  const Params p{0, 0.3, 2, 1, 1};
  const RegionSpec spec{1e-3, 1.0};
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst_defect = 0.0;
  for (int i = 0; i < 10000; ++i) {
    PhasePoint pt{U(rng), U(rng)};
    if (pt.w == 0.0) continue;
    worst_defect = std::max(worst_defect, radial_identity_defect(p, pt));
  }
  const CertificateReport cert = region_certificate(p, spec, 1000);
  const InvarianceReport inv = region_invariance_test(p, spec, 50, 200.0, 1e-9, kSeed);
  const bool ok = worst_defect <= 1e-12 && cert.pass && inv.contained == 50;
  return {ok, fmt("radial identity defect %.2g over 1e4 points, certificate ", worst_defect) +
                  (cert.pass ? "passes" : "fails") +
                  fmt(" at eps_r = 1e-3, %.0f/50 ICs stay in the closure for T = 200",
                      static_cast<double>(inv.contained))};
}

Outcome regularized() {
  const Params p{1, 1.5, 2, 1, 1};
  const Trajectory direct = integrate(p, 1, 0, 10, 1e-12);
  std::vector<double> dev;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    IntegratorOptions o;
    o.tol = 1e-11;
    const Trajectory reg = integrate_regularized(p, eps, 1, 0, 10, o);
    double d = 0.0;
    for (const Sample& s : direct.samples) {
      const DenseValue v = evaluate(reg, s.t);
      d = std::max({d, std::fabs(v.u - s.u), std::fabs(v.du - s.du)});
    }
    dev.push_back(d);
  }
  return {dev[0] > dev[1] && dev[1] > dev[2],
          fmt("max deviation eps=1e-2: %.3g, 1e-3: %.3g, 1e-4: %.3g", dev[0], dev[1], dev[2])};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sdosc_acceptance";
  fs::create_directories(dir);
  {
    std::ofstream g(dir / "grid.json");
    g << R"({"l":[0,0.5,1],"alpha":[1,1.5,2],"beta":[1,2,3],"c":[1],"d":[1],"ics":[[1,0]],"t_end":100,"tol":1e-9})";
  }
  auto sweep = [&](const char* jobs, const char* name) {
    std::ostringstream out, err;
    const int code = cli::run_command(
        {"sweep", "--grid", (dir / "grid.json").string(), "--jobs", jobs, "--out", (dir / name).string()},
        out, err);
    std::ifstream is(dir / name);
    std::stringstream ss;
    ss << is.rdbuf();
    return std::make_pair(code, ss.str());
  };
  const auto [c1, s1] = sweep("1", "jobs1.csv");
  const auto [c8, s8] = sweep("8", "jobs8.csv");
  const auto rows = std::count(s1.begin(), s1.end(), '\n') - 1;
  return {c1 == 0 && c8 == 0 && rows == 27 && s1 == s8,
          fmt("%.0f rows, %.0f bytes, jobs 1 vs 8 ", static_cast<double>(rows), static_cast<double>(s1.size())) +
              (s1 == s8 ? "byte-identical" : "differ")};
}

}  // namespace

int main() {
  const Trajectory p1 = integrate(kP1, 1, 0, 200);
  const SlowRuns slow = slow_runs();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"energy law", energy_law},
      {"oscillatory regime", [&] { return oscillatory_regime(p1); }},
      {"fast rate in regime (i)", [&] { return fast_rate(p1); }},
      {"non-oscillatory regime", [&] { return non_oscillatory(slow); }},
      {"slow rate realized", [&] { return slow_rate(slow); }},
      {"critical constant", critical_constant},
      {"constructor", constructor},
      {"region certificate", region},
      {"regularized consistency", regularized},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu. %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
