#pragma once

// Declarative experiment runner behind the command-line tool: configuration
// loading and validation, replica fan-out, CSV data and the gated JSON
// summary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "error.hpp"
#include "fw.hpp"
#include "parallel.hpp"
#include "process.hpp"
#include "stats.hpp"
#include "summary.hpp"
#include "theta.hpp"
#include "toy.hpp"

namespace dynvoter {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr double kDefaultDelta = 0.4;

/// Bad configuration: unknown experiment, missing or out-of-range field.
class usage_error : public invalid_parameter {
 public:
  using invalid_parameter::invalid_parameter;
};

inline const std::set<std::string>& experiment_names() {
  static const std::set<std::string> names = {
      "theta-table", "sim-meeting", "sim-voter",      "sim-toy",  "duality-check",
      "fw",          "edge-tail",   "homogenisation", "consensus"};
  return names;
}

struct ExperimentConfig {
  std::string experiment;
  std::vector<std::uint32_t> n;
  std::vector<int> d;
  std::vector<double> nu;
  std::optional<double> u;
  std::optional<double> horizon;    // voter horizon, FW / homogenisation T, duality t
  std::optional<double> grid_step;  // voter grid, FW dt
  std::optional<double> s;          // edge-tail threshold
  std::optional<double> t_cap;      // meeting censoring cap
  std::size_t reps = 0;
  double delta = kDefaultDelta;
  double tol = 1e-12;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;  // CSV path; the JSON summary goes next to it
};

namespace detail {

template <class T>
std::vector<T> as_list(const json& v, const std::string& field) {
  std::vector<T> out;
  try {
    if (v.is_array()) {
      for (const auto& e : v) out.push_back(e.get<T>());
    } else if (v.is_string()) {
      std::stringstream ss(v.get<std::string>());
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::istringstream is(item);
        T x{};
        if (!(is >> x)) throw usage_error("field '" + field + "': cannot parse '" + item + "'");
        out.push_back(x);
      }
    } else {
      out.push_back(v.get<T>());
    }
  } catch (const json::exception& e) {
    throw usage_error("field '" + field + "': " + e.what());
  }
  return out;
}

template <class T>
T as_scalar(const json& v, const std::string& field) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw usage_error("field '" + field + "': " + e.what());
  }
}

inline void need(bool ok, const std::string& msg) {
  if (!ok) throw usage_error(msg);
}

}  // namespace detail

/// Validates preconditions of the targeted experiment. Throws usage_error.
inline void validate(const ExperimentConfig& c) {
  using detail::need;
  const std::string& e = c.experiment;
  need(experiment_names().count(e) == 1, "unknown experiment '" + e + "'");
  need(!c.d.empty(), "missing required parameter 'd'");
  need(!c.nu.empty(), "missing required parameter 'nu'");
  for (double nu : c.nu) need(nu >= 0.0 && std::isfinite(nu), "field 'nu': must be >= 0");
  const int d_min = (e == "theta-table") ? 2 : 3;
  for (int d : c.d) {
    need(d >= d_min, "field 'd': " + e + " requires d >= " + std::to_string(d_min));
  }
  if (e == "theta-table") {
    need(c.tol > 0.0, "field 'tol': must be positive");
    return;
  }
  need(c.reps >= 1, "missing required parameter 'reps'");
  need(c.threads >= 1, "field 'threads': must be >= 1");
  if (e != "fw") {
    need(!c.n.empty(), "missing required parameter 'n'");
    for (auto n : c.n) need(n >= 2, "field 'n': must be >= 2");
  }
  if (e != "sim-toy" && e != "fw") {
    for (auto n : c.n) {
      need((static_cast<std::uint64_t>(n) * c.d.front()) % 2 == 0, "field 'n': n * d must be even");
    }
  }
  if (e == "sim-voter" || e == "homogenisation" || e == "fw" || e == "consensus") {
    need(c.u.has_value(), "missing required parameter 'u'");
    need(*c.u >= 0.0 && *c.u <= 1.0, "field 'u': must lie in [0, 1]");
  }
  if (e == "consensus") need(*c.u > 0.0 && *c.u < 1.0, "field 'u': must lie in (0, 1)");
  if (e == "sim-voter" || e == "homogenisation" || e == "fw" || e == "duality-check") {
    need(c.horizon.has_value(), "missing required parameter 'T'");
    need(*c.horizon > 0.0, "field 'T': must be positive");
  }
  if (e == "sim-toy" || e == "edge-tail" || e == "homogenisation" || e == "fw" || e == "sim-meeting") {
    for (double nu : c.nu) need(nu > 0.0 || e == "sim-meeting" || e == "fw", "field 'nu': " + e + " requires nu > 0");
  }
  if (e == "sim-toy") need(c.delta > 0.0, "field 'delta': must be positive");
  if (c.grid_step) need(*c.grid_step > 0.0, "field 'grid_step': must be positive");
}

/// Builds a configuration from an optional JSON document and flag
/// overrides (flags win). Both use the same field names.
inline ExperimentConfig load_config(const json& file, const json& flags) {
  json merged = file.is_object() ? file : json::object();
  if (merged.contains("schema")) {
    detail::need(merged["schema"] == kSchemaVersion,
                 "field 'schema': unsupported version " + merged["schema"].dump());
  }
  for (auto it = flags.begin(); it != flags.end(); ++it) merged[it.key()] = it.value();

  static const std::set<std::string> known = {
      "schema", "experiment", "n", "d", "nu", "u", "T", "horizon", "grid_step", "dt", "s",
      "t_cap", "reps", "delta", "tol", "seed", "threads", "out"};
  for (auto it = merged.begin(); it != merged.end(); ++it) {
    detail::need(known.count(it.key()) == 1, "unknown field '" + it.key() + "'");
  }

  ExperimentConfig c;
  c.threads = default_threads();
  detail::need(merged.contains("experiment"), "missing required field 'experiment'");
  c.experiment = detail::as_scalar<std::string>(merged["experiment"], "experiment");
  if (c.experiment == "theta") c.experiment = "theta-table";
  if (merged.contains("n")) c.n = detail::as_list<std::uint32_t>(merged["n"], "n");
  if (merged.contains("d")) c.d = detail::as_list<int>(merged["d"], "d");
  if (merged.contains("nu")) c.nu = detail::as_list<double>(merged["nu"], "nu");
  if (merged.contains("u")) c.u = detail::as_scalar<double>(merged["u"], "u");
  if (merged.contains("horizon")) c.horizon = detail::as_scalar<double>(merged["horizon"], "horizon");
  if (merged.contains("T")) c.horizon = detail::as_scalar<double>(merged["T"], "T");
  if (merged.contains("grid_step")) c.grid_step = detail::as_scalar<double>(merged["grid_step"], "grid_step");
  if (merged.contains("dt")) c.grid_step = detail::as_scalar<double>(merged["dt"], "dt");
  if (merged.contains("s")) c.s = detail::as_scalar<double>(merged["s"], "s");
  if (merged.contains("t_cap")) c.t_cap = detail::as_scalar<double>(merged["t_cap"], "t_cap");
  if (merged.contains("reps")) {
    const auto r = detail::as_scalar<std::int64_t>(merged["reps"], "reps");
    detail::need(r >= 1, "field 'reps': must be >= 1");
    c.reps = static_cast<std::size_t>(r);
  }
  if (merged.contains("delta")) c.delta = detail::as_scalar<double>(merged["delta"], "delta");
  if (merged.contains("tol")) c.tol = detail::as_scalar<double>(merged["tol"], "tol");
  if (merged.contains("seed")) c.seed = detail::as_scalar<std::uint64_t>(merged["seed"], "seed");
  if (merged.contains("threads")) {
    const auto t = detail::as_scalar<std::int64_t>(merged["threads"], "threads");
    detail::need(t >= 1, "field 'threads': must be >= 1");
    c.threads = static_cast<unsigned>(t);
  }
  if (merged.contains("out")) c.out = detail::as_scalar<std::string>(merged["out"], "out");
  validate(c);
  return c;
}

/// Reads a JSON config file; syntax errors carry the parser's line/column.
inline json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw usage_error("config file '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports

struct Gate {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

inline json to_json(const Gate& g) {
  return {{"name", g.name}, {"value", g.value}, {"threshold", g.threshold}, {"pass", g.pass}};
}

/// Gate passing when value < threshold.
inline Gate below(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, value < threshold};
}

/// Gate passing when |deviation| <= 3 se.
inline Gate within_3se(std::string name, double deviation, double se) {
  const double thr = 3.0 * se;
  return {std::move(name), std::abs(deviation), thr, std::abs(deviation) <= thr + 1e-12};
}

struct Report {
  std::string experiment;
  json params = json::object();
  json estimates = json::object();
  std::vector<Gate> gates;
  std::string csv;

  bool all_pass() const {
    return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.pass; });
  }

  json summary() const {
    json j{{"schema_version", kSchemaVersion},
           {"experiment", experiment},
           {"params", params},
           {"estimates", estimates},
           {"gates", json::array()}};
    for (const auto& g : gates) j["gates"].push_back(to_json(g));
    return j;
  }
};

namespace detail {

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& header) { os_ << header << '\n'; }

  template <class... Ts>
  void row(const Ts&... fields) {
    bool first = true;
    ((os_ << (first ? "" : ",") << fmt(fields), first = false), ...);
    os_ << '\n';
  }

  std::string str() const { return os_.str(); }

 private:
  template <class T>
  static std::string fmt(const T& v) {
    std::ostringstream s;
    if constexpr (std::is_floating_point_v<T>) {
      s << std::setprecision(17) << v;
    } else if constexpr (std::is_same_v<T, bool>) {
      s << (v ? 1 : 0);
    } else {
      s << v;
    }
    return s.str();
  }

  std::ostringstream os_;
};

inline json config_params(const ExperimentConfig& c) {
  json p{{"seed", c.seed}};
  if (!c.n.empty()) p["n"] = c.n.size() == 1 ? json(c.n.front()) : json(c.n);
  p["d"] = c.d.size() == 1 ? json(c.d.front()) : json(c.d);
  p["nu"] = c.nu.size() == 1 ? json(c.nu.front()) : json(c.nu);
  if (c.u) p["u"] = *c.u;
  if (c.horizon) p["T"] = *c.horizon;
  if (c.grid_step) p["grid_step"] = *c.grid_step;
  if (c.s) p["s"] = *c.s;
  if (c.t_cap) p["t_cap"] = *c.t_cap;
  if (c.reps) p["reps"] = c.reps;
  if (c.experiment == "sim-toy") p["delta"] = c.delta;
  if (c.experiment == "theta-table") p["tol"] = c.tol;
  return p;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiments

inline Report run_theta_table(const ExperimentConfig& c) {
  Report r;
  detail::CsvWriter csv("d,nu,beta,rho,delta0,theta,depth,residual");
  double worst_anchor = 0.0, worst_identity = 0.0;
  json rows = json::array();
  for (int d : c.d) {
    for (double nu : c.nu) {
      const ThetaBundle b = theta_bundle(make_consts(d, nu), c.tol);
      csv.row(d, nu, b.consts.beta, b.consts.rho, b.delta0, b.theta, b.depth_used, b.residual);
      rows.push_back({{"d", d}, {"nu", nu}, {"theta", b.theta}});
      if (nu == 0.0) {
        worst_anchor = std::max(worst_anchor, std::abs(b.theta - (d - 2.0) / (d - 1.0)));
      } else {
        worst_identity = std::max(worst_identity, b.residual);
      }
    }
  }
  r.estimates["theta"] = rows;
  r.gates.push_back(below("theta-closed-form", worst_anchor, 1e-12));
  r.gates.push_back(below("cf-identity", worst_identity, 1e-10));
  r.csv = csv.str();
  return r;
}

struct MeetingSummary {
  std::vector<MeetingResult> results;
  std::vector<double> scaled;  // tau / n, uncensored only
  std::size_t censored = 0;
  double theta = 0.0;
  double ks = 0.0;
  RateFit fit;
};

inline MeetingSummary meeting_experiment(std::uint32_t n, std::uint32_t d, double nu,
                                         std::size_t reps, std::uint64_t seed, unsigned threads,
                                         std::optional<double> t_cap = std::nullopt) {
  MeetingSummary m;
  m.theta = theta(make_consts(static_cast<int>(d), nu));
  const double cap = t_cap.value_or(default_meeting_cap(n, m.theta));
  m.results = run_replicas(reps, seed, threads, [&](std::size_t, Rng& rng) {
    return simulate_two_walks(n, d, nu, WalkStart::stationary(), cap, rng);
  });
  for (const auto& res : m.results) {
    if (res.censored) {
      ++m.censored;
    } else {
      m.scaled.push_back(res.tau / n);
    }
  }
  if (!m.scaled.empty()) {
    m.ks = ks_statistic(m.scaled, exponential_cdf(2.0 * m.theta));
    std::vector<double> positive;
    for (double x : m.scaled) {
      if (x > 0.0) positive.push_back(x);
    }
    // tau = 0 (coincident start) carries no rate information under the
    // continuous exponential law; zeros are kept in the KS statistic only.
    if (!positive.empty()) m.fit = exp_rate_fit(positive);
  }
  return m;
}

inline Report run_sim_meeting(const ExperimentConfig& c) {
  Report r;
  const auto n = c.n.front();
  const auto m = meeting_experiment(n, c.d.front(), c.nu.front(), c.reps, c.seed, c.threads, c.t_cap);
  detail::CsvWriter csv("replica,tau,censored");
  for (std::size_t i = 0; i < m.results.size(); ++i) csv.row(i, m.results[i].tau, m.results[i].censored);
  const double censor_frac = static_cast<double>(m.censored) / c.reps;
  const double rel_rate = std::abs(m.fit.rate - 2.0 * m.theta) / (2.0 * m.theta);
  r.estimates = {{"theta", m.theta},     {"ks", m.ks},
                 {"rate", m.fit.rate},   {"rate_se", m.fit.se},
                 {"censored", m.censored}, {"mean_scaled", mean_and_se(m.scaled).mean}};
  r.gates.push_back(below("meeting-ks", m.ks, 0.06));
  r.gates.push_back(below("meeting-rate", rel_rate, 0.10));
  r.gates.push_back(below("meeting-censoring", censor_frac, 0.01));
  r.csv = csv.str();
  return r;
}

struct VoterMoments {
  std::vector<double> t;
  std::vector<MeanEstimate> O;            // E[O_t]
  std::vector<MeanEstimate> qv_residual;  // E[O_t^2 - O_0^2 - (1/n) int_0^t D]
  std::vector<MeanEstimate> H;            // E[O_t (1 - O_t)]
};

inline VoterMoments voter_moments(const std::vector<VoterTrace>& traces) {
  VoterMoments m;
  if (traces.empty()) return m;
  m.t = traces.front().t;
  const double n = traces.front().n;
  for (std::size_t k = 0; k < m.t.size(); ++k) {
    std::vector<double> o, qv, h;
    for (const auto& tr : traces) {
      const double ok = tr.O[k], o0 = tr.O[0];
      o.push_back(ok);
      qv.push_back(ok * ok - o0 * o0 - tr.D_integral[k] / n);
      h.push_back(ok * (1.0 - ok));
    }
    m.O.push_back(mean_and_se(o));
    m.qv_residual.push_back(mean_and_se(qv));
    m.H.push_back(mean_and_se(h));
  }
  return m;
}

inline std::vector<VoterTrace> voter_experiment(std::uint32_t n, std::uint32_t d, double nu,
                                                double u, double horizon, double grid_step,
                                                std::size_t reps, std::uint64_t seed,
                                                unsigned threads) {
  return run_replicas(reps, seed, threads, [&](std::size_t, Rng& rng) {
    return simulate_voter(n, d, nu, u, horizon, grid_step, rng);
  });
}

inline Report run_sim_voter(const ExperimentConfig& c) {
  Report r;
  const auto n = c.n.front();
  const double u = *c.u;
  const double step = c.grid_step.value_or(*c.horizon / 10.0);
  const auto traces = voter_experiment(n, c.d.front(), c.nu.front(), u, *c.horizon, step, c.reps,
                                       c.seed, c.threads);
  const double th = theta(make_consts(c.d.front(), c.nu.front()));
  const auto m = voter_moments(traces);
  detail::CsvWriter csv("replica,t,O,D");
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (std::size_t k = 0; k < traces[i].t.size(); ++k) csv.row(i, traces[i].t[k], traces[i].O[k], traces[i].D[k]);
  }
  json est = json::array();
  for (std::size_t k = 1; k < m.t.size(); ++k) {
    const std::string at = "@t=" + std::to_string(m.t[k]);
    const double h_ref = fw_heterozygosity(th, u, m.t[k] / n);
    est.push_back({{"t", m.t[k]},
                   {"mean_O", m.O[k].mean},
                   {"se_O", m.O[k].se},
                   {"qv_residual", m.qv_residual[k].mean},
                   {"se_qv", m.qv_residual[k].se},
                   {"mean_H", m.H[k].mean},
                   {"se_H", m.H[k].se},
                   {"H_reference", h_ref}});
    r.gates.push_back(within_3se("martingale" + at, m.O[k].mean - u, m.O[k].se));
    r.gates.push_back(within_3se("quadratic-variation" + at, m.qv_residual[k].mean, m.qv_residual[k].se));
    r.gates.push_back(within_3se("heterozygosity" + at, m.H[k].mean - h_ref, m.H[k].se));
  }
  r.estimates = {{"theta", th}, {"grid", est}};
  r.csv = csv.str();
  return r;
}

inline Report run_sim_toy(const ExperimentConfig& c) {
  Report r;
  const int d = c.d.front();
  const double nu = c.nu.front();
  const std::int64_t n = c.n.front();
  const TwoPhaseModel model(d, nu, n, c.delta);
  const auto samples = run_replicas(c.reps, c.seed, c.threads, [&](std::size_t, Rng& rng) {
    TwoPhaseModel local = model;
    return local.sample(rng);
  });
  const double th = theta(make_consts(d, nu));
  detail::CsvWriter csv("replica,tau_first,tau_second,tau_final,N");
  std::vector<double> scaled, second_frac;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    csv.row(i, s.tau_first_total, s.tau_second_total, s.tau_final, s.iterations);
    scaled.push_back(s.tau_final / static_cast<double>(n));
    second_frac.push_back(s.tau_second_total / s.tau_final);
  }
  const double ks = ks_statistic(scaled, exponential_cdf(2.0 * th));
  const double mean = mean_and_se(scaled).mean;
  const double rel = std::abs(mean - 1.0 / (2.0 * th)) * 2.0 * th;
  const double frac = mean_and_se(second_frac).mean;
  r.estimates = {{"theta", th},
                 {"hbar", model.rates().hbar},
                 {"n_gamma_n", static_cast<double>(n) * model.rates().gamma_n},
                 {"ks", ks},
                 {"mean_scaled", mean},
                 {"second_phase_fraction", frac}};
  r.gates.push_back(below("two-phase-ks", ks, 0.05));
  r.gates.push_back(below("two-phase-mean", rel, 0.05));
  r.gates.push_back(below("second-phase-fraction", frac, 0.05));
  r.csv = csv.str();
  return r;
}

inline Report run_duality(const ExperimentConfig& c) {
  Report r;
  const auto n = c.n.front();
  const double u = c.u.value_or(0.5);
  const double t = *c.horizon;
  const auto reports = run_replicas(c.reps, c.seed, c.threads, [&](std::size_t, Rng& rng) {
    const auto xi = bernoulli_opinions(n, u, rng);
    return duality_check(n, c.d.front(), c.nu.front(), xi, t, rng);
  });
  detail::CsvWriter csv("replica,pass,mismatch_count");
  std::size_t failed = 0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    csv.row(i, reports[i].pass, reports[i].mismatches.size());
    if (!reports[i].pass) ++failed;
  }
  r.estimates = {{"failed_trials", failed}};
  r.gates.push_back(below("duality", static_cast<double>(failed), 0.5));
  r.csv = csv.str();
  return r;
}

inline Report run_fw(const ExperimentConfig& c) {
  Report r;
  const double th = theta(make_consts(c.d.front(), c.nu.front()));
  const double u = *c.u;
  const double T = *c.horizon;
  const double dt = c.grid_step.value_or(fw_default_dt(th));
  const auto stride = std::max<std::int64_t>(1, std::llround(0.1 / dt));
  const auto paths = run_replicas(c.reps, c.seed, c.threads, [&](std::size_t, Rng& rng) {
    return fw_simulate(th, u, T, dt, rng, stride);
  });
  detail::CsvWriter csv("path,s,B");
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t k = 0; k < paths[i].s.size(); ++k) csv.row(i, paths[i].s[k], paths[i].B[k]);
  }
  const std::size_t last = paths.front().s.size() - 1;
  std::vector<double> b, h;
  for (const auto& p : paths) {
    b.push_back(p.B[last]);
    h.push_back(p.B[last] * (1.0 - p.B[last]));
  }
  const auto mb = mean_and_se(b), mh = mean_and_se(h);
  const double h_ref = fw_heterozygosity(th, u, paths.front().s[last]);
  r.estimates = {{"theta", th}, {"mean_B", mb.mean}, {"mean_H", mh.mean}, {"H_reference", h_ref}};
  r.gates.push_back(within_3se("fw-martingale", mb.mean - u, mb.se));
  r.gates.push_back(within_3se("fw-heterozygosity", mh.mean - h_ref, mh.se));
  r.csv = csv.str();
  return r;
}

inline Report run_edge_tail(const ExperimentConfig& c) {
  Report r;
  const auto n = c.n.front();
  const double s = c.s.value_or(std::sqrt(static_cast<double>(n)));
  const double th = theta(make_consts(c.d.front(), c.nu.front()));
  const auto est = edge_tail_estimate(n, c.d.front(), c.nu.front(), s, c.reps, c.seed, c.threads);
  r.estimates = {{"theta", th}, {"phat", est.mean}, {"se", est.se}, {"s", s}};
  const double thr = std::max(0.03, 3.0 * est.se);
  r.gates.push_back({"edge-tail", std::abs(est.mean - th), thr, std::abs(est.mean - th) < thr});
  detail::CsvWriter csv("phat,se,theta");
  csv.row(est.mean, est.se, th);
  r.csv = csv.str();
  return r;
}

inline Report run_homogenisation(const ExperimentConfig& c) {
  Report r;
  detail::CsvWriter csv("n,replica,value");
  json rows = json::array();
  std::vector<double> scores;
  for (std::size_t i = 0; i < c.n.size(); ++i) {
    const auto rep = homogenisation_experiment(c.n[i], c.d.front(), c.nu.front(), *c.u, *c.horizon,
                                               c.reps, c.seed + i, c.threads);
    for (std::size_t k = 0; k < rep.values.size(); ++k) csv.row(c.n[i], k, rep.values[k]);
    rows.push_back({{"n", c.n[i]}, {"mean", rep.summary.mean}, {"se", rep.summary.se}});
    scores.push_back(std::abs(rep.summary.mean) + rep.summary.se);
    if (i + 1 == c.n.size()) {
      r.gates.push_back(within_3se("homogenisation", rep.summary.mean, rep.summary.se));
    }
  }
  if (scores.size() > 1) {
    bool decreasing = true;
    for (std::size_t i = 1; i < scores.size(); ++i) decreasing = decreasing && scores[i] < scores[i - 1];
    r.gates.push_back({"homogenisation-shrinks", decreasing ? 1.0 : 0.0, 1.0, decreasing});
  }
  r.estimates = {{"by_n", rows}};
  r.csv = csv.str();
  return r;
}

inline Report run_consensus(const ExperimentConfig& c) {
  Report r;
  const auto rep = consensus_time_experiment(c.n.front(), c.d.front(), c.nu.front(), *c.u, c.reps,
                                             c.seed, c.threads);
  detail::CsvWriter csv("replica,tau_cons_over_n");
  for (std::size_t i = 0; i < rep.scaled_times.size(); ++i) csv.row(i, rep.scaled_times[i]);
  r.estimates = {{"mean", rep.mean},
                 {"se", rep.se},
                 {"prediction_2H_over_theta", rep.prediction},
                 {"not_reached", rep.not_reached}};
  r.csv = csv.str();
  return r;
}

/// Runs one experiment and returns its report; does not touch the
/// filesystem.
inline Report run_experiment(const ExperimentConfig& c) {
  validate(c);
  Report r;
  const std::string& e = c.experiment;
  if (e == "theta-table") r = run_theta_table(c);
  else if (e == "sim-meeting") r = run_sim_meeting(c);
  else if (e == "sim-voter") r = run_sim_voter(c);
  else if (e == "sim-toy") r = run_sim_toy(c);
  else if (e == "duality-check") r = run_duality(c);
  else if (e == "fw") r = run_fw(c);
  else if (e == "edge-tail") r = run_edge_tail(c);
  else if (e == "homogenisation") r = run_homogenisation(c);
  else r = run_consensus(c);
  r.experiment = e;
  r.params = detail::config_params(c);
  return r;
}

inline std::string summary_path(const std::string& csv_path) {
  const auto slash = csv_path.find_last_of('/');
  const auto dot = csv_path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    return csv_path.substr(0, dot) + ".json";
  }
  return csv_path + ".json";
}

/// Exit codes.
enum ExitCode : int { kPass = 0, kGateFailure = 1, kUsage = 2, kNumerical = 3 };

/// Runs and writes CSV to c.out (stdout when empty) and the JSON summary next
/// to it (stderr when c.out is empty).
inline int run(const ExperimentConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    const Report r = run_experiment(c);
    const std::string summary = r.summary().dump(2) + "\n";
    if (c.out.empty()) {
      out << r.csv;
      err << summary;
    } else {
      std::ofstream csv(c.out, std::ios::binary);
      std::ofstream js(summary_path(c.out), std::ios::binary);
      if (!csv || !js) {
        err << "error: cannot write output '" << c.out << "'\n";
        return kUsage;
      }
      csv << r.csv;
      js << summary;
    }
    return r.all_pass() ? kPass : kGateFailure;
  } catch (const numerical_failure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const invalid_parameter& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace dynvoter
