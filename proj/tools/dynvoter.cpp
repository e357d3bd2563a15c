// Command-line front end: one subcommand per experiment, flags override the
// fields of an optional JSON config file.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dynvoter/experiment.hpp"

namespace {

struct Flags {
  std::optional<std::string> config;
  std::vector<std::string> n, d, nu;
  std::optional<double> u, horizon, delta, tol, s, dt, grid_step, t_cap;
  std::optional<long long> reps, threads;
  std::optional<unsigned long long> seed;
  std::optional<std::string> out;
};

void add_flags(CLI::App& sub, Flags& f) {
  sub.add_option("--config", f.config, "JSON config file");
  sub.add_option("--n", f.n, "vertex count(s), comma separated")->delimiter(',');
  sub.add_option("--d", f.d, "degree(s), comma separated")->delimiter(',');
  sub.add_option("--nu", f.nu, "rewiring rate(s), comma separated")->delimiter(',');
  sub.add_option("--u", f.u, "initial opinion density");
  sub.add_option("--T,--horizon,--t", f.horizon, "time horizon");
  sub.add_option("--reps", f.reps, "number of replicas");
  sub.add_option("--delta", f.delta, "tree-height exponent of the two-phase model");
  sub.add_option("--tol", f.tol, "continued-fraction tolerance");
  sub.add_option("--s", f.s, "edge-tail time threshold");
  sub.add_option("--dt", f.dt, "Euler-Maruyama step");
  sub.add_option("--grid-step", f.grid_step, "observation grid step");
  sub.add_option("--t-cap", f.t_cap, "censoring cap for meeting times");
  sub.add_option("--seed", f.seed, "master seed");
  sub.add_option("--threads", f.threads, "worker threads");
  sub.add_option("--out", f.out, "CSV output path; the JSON summary is written next to it");
}

dynvoter::json to_overrides(const std::string& experiment, const Flags& f) {
  using dynvoter::json;
  json j{{"experiment", experiment}};
  auto list = [&](const char* key, const std::vector<std::string>& v) {
    if (v.empty()) return;
    std::string joined;
    for (const auto& s : v) joined += (joined.empty() ? "" : ",") + s;
    j[key] = joined;
  };
  list("n", f.n);
  list("d", f.d);
  list("nu", f.nu);
  if (f.u) j["u"] = *f.u;
  if (f.horizon) j["T"] = *f.horizon;
  if (f.reps) j["reps"] = *f.reps;
  if (f.delta) j["delta"] = *f.delta;
  if (f.tol) j["tol"] = *f.tol;
  if (f.s) j["s"] = *f.s;
  if (f.dt) j["dt"] = *f.dt;
  if (f.grid_step) j["grid_step"] = *f.grid_step;
  if (f.t_cap) j["t_cap"] = *f.t_cap;
  if (f.seed) j["seed"] = *f.seed;
  if (f.threads) j["threads"] = *f.threads;
  if (f.out) j["out"] = *f.out;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voter model on dynamic random regular graphs"};
  app.require_subcommand(1);
  std::map<std::string, Flags> flags;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"theta", "continued-fraction table of theta(d, nu)"},
      {"sim-meeting", "meeting time of two walks on the dynamic graph"},
      {"sim-voter", "voter model with martingale and heterozygosity gates"},
      {"sim-toy", "two-phase renewal model"},
      {"duality-check", "pathwise voter / coalescing-walk duality"},
      {"fw", "Fisher-Wright diffusion"},
      {"edge-tail", "tail of the discordant-edge dual"},
      {"homogenisation", "discordant-edge homogenisation functional"},
      {"consensus", "consensus time against 2 H(u) / theta"},
  };
  for (const auto& [name, help] : commands) add_flags(*app.add_subcommand(name, help), flags[name]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : dynvoter::kUsage;
  }

  for (const auto& [name, help] : commands) {
    if (!app.got_subcommand(name)) continue;
    const Flags& f = flags[name];
    try {
      const dynvoter::json file =
          f.config ? dynvoter::read_config_file(*f.config) : dynvoter::json::object();
      const auto cfg = dynvoter::load_config(file, to_overrides(name, f));
      return dynvoter::run(cfg);
    } catch (const dynvoter::numerical_failure& e) {
      std::cerr << "numerical failure: " << e.what() << '\n';
      return dynvoter::kNumerical;
    } catch (const dynvoter::invalid_parameter& e) {
      std::cerr << "error: " << e.what() << '\n';
      return dynvoter::kUsage;
    }
  }
  return dynvoter::kUsage;
}
