#include "sdosc/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "sdosc/error.hpp"
#include "sdosc/trajectory_io.hpp"

namespace sdosc {
namespace {

using Json = nlohmann::ordered_json;

std::vector<double> number_list(const Json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("sweep grid is missing '") + key + "'");
  const Json& a = j.at(key);
  if (!a.is_array()) throw ValidationError(std::string("sweep grid '") + key + "' must be an array");
  std::vector<double> out;
  for (const Json& x : a) {
    if (!x.is_number()) throw ValidationError(std::string("sweep grid '") + key + "' holds a non-number");
    out.push_back(x.get<double>());
  }
  return out;
}

void dump_into(std::ostringstream& os, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << Json(it.key()).dump() << ": ";
        dump_into(os, it.value(), indent + 2);
      }
      os << '\n' << close << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << '[';
      bool first = true;
      for (const Json& x : j) {
        if (!first) os << ", ";
        first = false;
        dump_into(os, x, indent + 2);
      }
      os << ']';
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      os << (std::isfinite(x) ? format_double(x) : std::string("null"));
      return;
    }
    default:
      os << j.dump();
  }
}

std::string opt_field(const std::optional<double>& x) { return x ? format_double(*x) : ""; }

void rate_fields(std::ostringstream& os, const std::optional<RateEstimate>& r) {
  if (r)
    os << ',' << format_double(r->exponent) << ',' << format_double(r->amplitude) << ','
       << format_double(r->goodness);
  else
    os << ",,,";
}

std::optional<RateEstimate> try_fit(const Trajectory& traj, Series s, double lo, double hi) {
  try {
    return fit_trajectory(traj, s, lo, hi);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

}  // namespace

Json defaults_json() {
  Json j;
  j["tol"] = kDefaultTol;
  j["t_end"] = kDefaultTEnd;
  j["t_max"] = kDefaultTMax;
  return j;
}

std::vector<RunConfig> SweepGrid::enumerate() const {
  std::vector<RunConfig> out;
  for (double vl : l)
    for (double va : alpha)
      for (double vb : beta)
        for (double vc : c)
          for (double vd : d)
            for (const InitialCondition& ic : ics) out.push_back({{vl, va, vb, vc, vd}, ic, t_end, tol});
  return out;
}

SweepGrid parse_sweep_grid(const Json& j) {
  if (!j.is_object()) throw ValidationError("sweep grid must be a JSON object");
  SweepGrid g;
  g.l = number_list(j, "l");
  g.alpha = number_list(j, "alpha");
  g.beta = number_list(j, "beta");
  g.c = number_list(j, "c");
  g.d = number_list(j, "d");
  if (!j.contains("ics") || !j.at("ics").is_array())
    throw ValidationError("sweep grid 'ics' must be an array of [u0, du0] pairs");
  for (const Json& ic : j.at("ics")) {
    if (!ic.is_array() || ic.size() != 2 || !ic[0].is_number() || !ic[1].is_number())
      throw ValidationError("sweep grid 'ics' entries must be [u0, du0] pairs");
    g.ics.push_back({ic[0].get<double>(), ic[1].get<double>()});
  }
  if (j.contains("t_end")) {
    if (!j.at("t_end").is_number()) throw ValidationError("sweep grid 't_end' must be a number");
    g.t_end = j.at("t_end").get<double>();
  }
  if (j.contains("tol")) {
    if (!j.at("tol").is_number()) throw ValidationError("sweep grid 'tol' must be a number");
    g.tol = j.at("tol").get<double>();
  }
  return g;
}

SweepGrid load_sweep_grid(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  Json j;
  try {
    j = Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
  return parse_sweep_grid(j);
}

RunReport run_single(const RunConfig& cfg, std::size_t index) {
  cfg.params.validate();
  const ClassifyOptions copts;
  if (!(cfg.t_end >= 2.0 * copts.t_window_min))
    throw ValidationError("t_end must be >= " + format_double(2.0 * copts.t_window_min));
  if (!(cfg.tol > 0.0)) throw ValidationError("tol must be > 0");

  RunReport r;
  r.index = index;
  r.config = cfg;
  r.regime_theoretical = classify_theoretical(cfg.params);
  if (!cfg.params.well_posed()) {
    r.status = "NotWellPosed";
    return r;
  }
  const Trajectory traj = integrate(cfg.params, cfg.ic.u0, cfg.ic.du0, cfg.t_end, cfg.tol);
  r.status = std::string(to_string(traj.status));
  r.u_zeros = traj.u_zeros.size();
  r.du_zeros = traj.du_zeros.size();
  try {
    r.regime_empirical = classify_empirical(cfg.params, traj, copts);
  } catch (const InsufficientDataError&) {
    r.regime_empirical = Regime::OutsideTheory;  // stopped early at the energy floor
  }
  const double lo = 0.25 * traj.t_end(), hi = traj.t_end();
  if (lo > 0.0) {
    r.rate_E = try_fit(traj, Series::E, lo, hi);
    r.rate_u = try_fit(traj, Series::U, lo, hi);
    r.rate_du = try_fit(traj, Series::DU, lo, hi);
  }
  r.audit = energy_audit(cfg.params, traj, 0.5);
  return r;
}

std::vector<RunReport> run_sweep(const std::vector<RunConfig>& configs, unsigned jobs) {
  const std::size_t n = configs.size();
  std::vector<RunReport> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        out[i] = run_single(configs[i], i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(std::max(1u, jobs), std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string csv_header() {
  return "index,l,alpha,beta,c,d,u0,du0,t_end,tol,regime_theoretical,regime_empirical,status,"
         "u_zeros,du_zeros,E_exponent,E_amplitude,E_r2,u_exponent,u_amplitude,u_r2,"
         "du_exponent,du_amplitude,du_r2,max_energy_increase,dissipation_residual,"
         "tail_liminf_statistic";
}

std::string csv_row(const RunReport& r) {
  std::ostringstream os;
  const Params& p = r.config.params;
  os << r.index << ',' << format_double(p.l) << ',' << format_double(p.alpha) << ','
     << format_double(p.beta) << ',' << format_double(p.c) << ',' << format_double(p.d) << ','
     << format_double(r.config.ic.u0) << ',' << format_double(r.config.ic.du0) << ','
     << format_double(r.config.t_end) << ',' << format_double(r.config.tol) << ','
     << to_string(r.regime_theoretical) << ',' << to_string(r.regime_empirical) << ','
     << r.status << ',' << r.u_zeros << ',' << r.du_zeros;
  rate_fields(os, r.rate_E);
  rate_fields(os, r.rate_u);
  rate_fields(os, r.rate_du);
  if (r.audit)
    os << ',' << format_double(r.audit->max_energy_increase) << ','
       << format_double(r.audit->dissipation_residual) << ','
       << opt_field(r.audit->tail_liminf_statistic);
  else
    os << ",,,";
  return os.str();
}

void write_reports_csv(std::ostream& os, const std::vector<RunReport>& reports) {
  os << csv_header() << '\n';
  for (const RunReport& r : reports) os << csv_row(r) << '\n';
}

Json to_json(const RateEstimate& r) {
  Json j;
  j["exponent"] = r.exponent;
  j["amplitude"] = r.amplitude;
  j["goodness"] = r.goodness;
  j["conclusive"] = r.goodness >= kConclusiveGoodness;
  j["window"] = Json::array({r.t_lo, r.t_hi});
  j["points"] = r.points;
  return j;
}

Json to_json(const AuditReport& a) {
  Json j;
  j["max_energy_increase"] = a.max_energy_increase;
  j["dissipation_residual"] = a.dissipation_residual;
  j["tail_liminf_statistic"] =
      a.tail_liminf_statistic ? Json(*a.tail_liminf_statistic) : Json(nullptr);
  j["samples_used"] = a.samples_used;
  return j;
}

Json to_json(const Params& p) {
  Json j;
  j["l"] = p.l;
  j["alpha"] = p.alpha;
  j["beta"] = p.beta;
  j["c"] = p.c;
  j["d"] = p.d;
  return j;
}

Json to_json(const RunReport& r) {
  auto opt_rate = [](const std::optional<RateEstimate>& x) { return x ? to_json(*x) : Json(nullptr); };
  Json j;
  j["index"] = r.index;
  j["params"] = to_json(r.config.params);
  j["initial_condition"] = Json::array({r.config.ic.u0, r.config.ic.du0});
  j["t_end"] = r.config.t_end;
  j["tol"] = r.config.tol;
  j["regime_theoretical"] = std::string(to_string(r.regime_theoretical));
  j["regime_empirical"] = std::string(to_string(r.regime_empirical));
  j["status"] = r.status;
  j["u_zeros"] = r.u_zeros;
  j["du_zeros"] = r.du_zeros;
  j["exponents"] = {{"E", opt_rate(r.rate_E)}, {"u", opt_rate(r.rate_u)}, {"du", opt_rate(r.rate_du)}};
  j["audit"] = r.audit ? to_json(*r.audit) : Json(nullptr);
  j["defaults"] = defaults_json();
  return j;
}

std::string dump_json(const Json& j) {
  std::ostringstream os;
  dump_into(os, j, 0);
  os << '\n';
  return os.str();
}

}  // namespace sdosc
