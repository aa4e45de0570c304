#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sdosc/error.hpp"
#include "sdosc/integrator.hpp"
#include "sdosc/report.hpp"
#include "sdosc/trajectory_io.hpp"

using namespace sdosc;

TEST_CASE("format_double keeps 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(200.0) == "200");
  CHECK(format_double(-2.5e-12) == "-2.4999999999999998e-12");
  for (double x : {1.0 / 3, 6.02e23, -7.1e-300, 123456.789})
    CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("trajectory CSV round trip") {
  const Params p{1, 1.5, 2, 1, 1};
  const Trajectory tr = integrate(p, 0.7, -0.2, 40);
  std::stringstream ss;
  write_trajectory_csv(ss, tr);
  std::string header;
  std::getline(std::stringstream(ss.str()), header);
  CHECK(header == "t,u,du,p,E");
  Trajectory back = read_trajectory_csv(ss);
  CHECK(back.u_zeros.empty());
  back.params = p;
  back.tol = tr.tol;
  finalize_loaded(back);
  REQUIRE(back.samples.size() == tr.samples.size());
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    CHECK(back.samples[k].t == tr.samples[k].t);
    CHECK(back.samples[k].u == tr.samples[k].u);
    CHECK(back.samples[k].du == tr.samples[k].du);
    CHECK(back.samples[k].p == tr.samples[k].p);
    CHECK(back.samples[k].energy == tr.samples[k].energy);
  }
  CHECK(back.u_zeros == tr.u_zeros);
  CHECK(back.du_zeros == tr.du_zeros);
}

TEST_CASE("trajectory CSV validation") {
  std::stringstream bad_header("t,u,du,E\n0,1,0,0\n");
  CHECK_THROWS_AS(read_trajectory_csv(bad_header), ValidationError);
  std::stringstream short_row("t,u,du,p,E\n0,1,0,0\n");
  CHECK_THROWS_AS(read_trajectory_csv(short_row), ValidationError);
  std::stringstream order("t,u,du,p,E\n1,1,0,0,0.5\n0,1,0,0,0.5\n");
  CHECK_THROWS_AS(read_trajectory_csv(order), ValidationError);
  CHECK_THROWS_AS(read_trajectory_csv("/nonexistent/dir/x.csv"), IoError);
}

TEST_CASE("sweep grid enumeration") {
  const auto j = nlohmann::ordered_json::parse(
      R"({"l":[0,1],"alpha":[1.5],"beta":[2,3],"c":[1],"d":[1],"ics":[[1,0],[0.5,0.5]],"t_end":50})");
  const SweepGrid g = parse_sweep_grid(j);
  const std::vector<RunConfig> cfg = g.enumerate();
  REQUIRE(cfg.size() == 8);
  CHECK(cfg[0].params.l == 0);
  CHECK(cfg[0].ic.du0 == 0);
  CHECK(cfg[1].ic.du0 == 0.5);
  CHECK(cfg[2].params.beta == 3);
  CHECK(cfg[4].params.l == 1);
  CHECK(cfg[7].t_end == 50);
  CHECK(cfg[7].tol == kDefaultTol);
  CHECK_THROWS_AS(parse_sweep_grid(nlohmann::ordered_json::parse(R"({"l":[0]})")), ValidationError);
  CHECK_THROWS_AS(parse_sweep_grid(nlohmann::ordered_json::parse(
                      R"({"l":["x"],"alpha":[1],"beta":[1],"c":[1],"d":[1],"ics":[]})")),
                  ValidationError);
}

TEST_CASE("empty sweep writes only the header") {
  std::ostringstream os;
  write_reports_csv(os, run_sweep({}, 4));
  CHECK(os.str() == csv_header() + "\n");
}

TEST_CASE("run reports are deterministic and parse back") {
  const RunConfig cfg{{0, 1, 1, 1, 1}, {1, 0}, 100, 1e-9};
  const RunReport a = run_single(cfg, 3);
  const RunReport b = run_single(cfg, 3);
  CHECK(dump_json(to_json(a)) == dump_json(to_json(b)));
  CHECK(csv_row(a) == csv_row(b));
  CHECK(a.regime_theoretical == Regime::Oscillatory);
  CHECK(a.regime_empirical == Regime::Oscillatory);
  REQUIRE(a.rate_E.has_value());
  REQUIRE(a.audit.has_value());

  const auto j = nlohmann::json::parse(dump_json(to_json(a)));
  CHECK(j.at("exponents").at("E").at("exponent").get<double>() == a.rate_E->exponent);
  CHECK(j.at("audit").at("dissipation_residual").get<double>() == a.audit->dissipation_residual);
  CHECK(j.at("defaults").at("tol").get<double>() == 1e-9);
  CHECK(j.at("defaults").at("t_max").get<double>() == 1e4);

  // The same configs run concurrently come back in input order.
  std::vector<RunConfig> many(6, cfg);
  for (std::size_t i = 0; i < many.size(); ++i) many[i].ic.u0 = 0.2 * (i + 1);
  const auto serial = run_sweep(many, 1);
  const auto parallel = run_sweep(many, 4);
  std::ostringstream s1, s2;
  write_reports_csv(s1, serial);
  write_reports_csv(s2, parallel);
  CHECK(s1.str() == s2.str());
}

TEST_CASE("not well posed configurations are reported, not integrated") {
  const RunReport r = run_single({{2, 1, 3, 1, 1}, {1, 0}, 100, 1e-9});
  CHECK(r.status == "NotWellPosed");
  CHECK(r.regime_theoretical == Regime::OutsideTheory);
  CHECK(r.regime_empirical == Regime::OutsideTheory);
  CHECK(!r.rate_E.has_value());
  CHECK(!r.audit.has_value());
}
