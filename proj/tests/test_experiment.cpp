#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dynvoter/experiment.hpp"

using namespace dynvoter;

namespace {

json flags(std::initializer_list<std::pair<const std::string, json>> kv) {
  json j = json::object();
  for (const auto& [k, v] : kv) j[k] = v;
  return j;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(DYNVOTER_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "dynvoter_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(LoadConfig, MinimalFlags) {
  const auto c = load_config(json::object(), flags({{"experiment", "sim-meeting"},
                                                    {"n", "1500"},
                                                    {"d", "3"},
                                                    {"nu", "0.3"},
                                                    {"reps", 1000},
                                                    {"seed", 7}}));
  EXPECT_EQ(c.experiment, "sim-meeting");
  EXPECT_EQ(c.n, std::vector<std::uint32_t>{1500});
  EXPECT_EQ(c.d, std::vector<int>{3});
  EXPECT_EQ(c.nu, std::vector<double>{0.3});
  EXPECT_EQ(c.reps, 1000u);
  EXPECT_EQ(c.seed, 7u);
}

TEST(LoadConfig, RejectsDegreeTwoOutsideThetaTable) {
  auto f = flags({{"experiment", "sim-voter"}, {"n", 100}, {"d", 2}, {"nu", 0.3}, {"u", 0.5}, {"T", 1.0}, {"reps", 1}});
  EXPECT_THROW(load_config(json::object(), f), usage_error);
  EXPECT_NO_THROW(load_config(json::object(), flags({{"experiment", "theta"}, {"d", 2}, {"nu", 0.5}})));
}

TEST(LoadConfig, RejectsNegativeNu) {
  EXPECT_THROW(load_config(json::object(), flags({{"experiment", "theta"}, {"d", 3}, {"nu", "0.1,-0.2"}})), usage_error);
}

TEST(LoadConfig, MissingParameters) {
  EXPECT_THROW(load_config(json::object(), flags({{"experiment", "sim-meeting"}, {"d", 3}, {"nu", 0.3}})), usage_error);
  EXPECT_THROW(load_config(json::object(), flags({{"d", 3}, {"nu", 0.3}})), usage_error);
  EXPECT_THROW(load_config(json::object(), flags({{"experiment", "bogus"}, {"d", 3}, {"nu", 0.3}})), usage_error);
}

TEST(LoadConfig, OddStubCountRejected) {
  EXPECT_THROW(load_config(json::object(), flags({{"experiment", "sim-meeting"}, {"n", 15}, {"d", 3}, {"nu", 0.3}, {"reps", 3}})),
               usage_error);
}

TEST(LoadConfig, FlagsOverrideFile) {
  const json file = json::parse(R"({"schema": 1, "experiment": "sim-toy", "n": 100000, "d": 3, "nu": 0.3, "reps": 10, "seed": 3})");
  const auto c = load_config(file, flags({{"experiment", "sim-toy"}, {"seed", 9}, {"nu", "0.5"}}));
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.nu, std::vector<double>{0.5});
  EXPECT_EQ(c.reps, 10u);
  EXPECT_THROW(load_config(json::parse(R"({"schema": 2, "experiment": "theta"})"), json::object()), usage_error);
  EXPECT_THROW(load_config(json::parse(R"({"experiment": "theta", "d": 3, "nu": 0, "typo": 1})"), json::object()),
               usage_error);
}

TEST(LoadConfig, ParseErrorNamesLocation) {
  const auto p = scratch("bad.json");
  std::ofstream(p) << "{\n  \"experiment\": \"theta\",\n  \"d\": 3,,\n}\n";
  try {
    read_config_file(p.string());
    FAIL() << "expected usage_error";
  } catch (const usage_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  try {
    load_config(json::parse(R"({"experiment": "theta", "d": "three", "nu": 0})"), json::object());
    FAIL() << "expected usage_error";
  } catch (const usage_error& e) {
    EXPECT_NE(std::string(e.what()).find("'d'"), std::string::npos) << e.what();
  }
}

TEST(Run, ThetaTableGatesPass) {
  auto c = load_config(json::object(), flags({{"experiment", "theta"}, {"d", "3,4,5"}, {"nu", "0,0.3,1"}}));
  const auto r = run_experiment(c);
  EXPECT_TRUE(r.all_pass());
  const auto j = r.summary();
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["experiment"], "theta-table");
  EXPECT_EQ(r.csv.substr(0, r.csv.find('\n')), "d,nu,beta,rho,delta0,theta,depth,residual");
}

TEST(Run, NumericalFailureExitCode) {
  auto c = load_config(json::object(), flags({{"experiment", "theta"}, {"d", 2}, {"nu", 0}}));
  std::ostringstream out, err;
  EXPECT_EQ(run(c, out, err), kNumerical);
}

TEST(Run, SameSeedSameCsv) {
  auto c = load_config(json::object(), flags({{"experiment", "sim-meeting"}, {"n", 100}, {"d", 3}, {"nu", 0.3}, {"reps", 50}, {"seed", 11}}));
  const auto a = run_experiment(c), b = run_experiment(c);
  EXPECT_EQ(a.csv, b.csv);
  c.seed = 12;
  EXPECT_NE(a.csv, run_experiment(c).csv);
}

TEST(Run, ThreadCountDoesNotChangeEstimates) {
  for (const char* exp : {"sim-meeting", "sim-toy", "duality-check"}) {
    auto f = flags({{"experiment", exp}, {"n", 100}, {"d", 3}, {"nu", 0.5}, {"reps", 40}, {"seed", 5}, {"T", 3.0}});
    if (std::string(exp) == "sim-toy") f["n"] = 100000;
    auto c = load_config(json::object(), f);
    c.threads = 1;
    const auto a = run_experiment(c);
    c.threads = 8;
    const auto b = run_experiment(c);
    EXPECT_EQ(a.summary()["estimates"], b.summary()["estimates"]) << exp;
    EXPECT_EQ(a.csv, b.csv) << exp;
  }
}

TEST(Run, WritesCsvAndJsonNextToIt) {
  const auto csv = scratch("theta.csv");
  auto c = load_config(json::object(), flags({{"experiment", "theta"}, {"d", 3}, {"nu", 0.3}, {"out", csv.string()}}));
  std::ostringstream out, err;
  EXPECT_EQ(run(c, out, err), kPass);
  const auto j = json::parse(slurp(scratch("theta.json")));
  EXPECT_EQ(j["experiment"], "theta-table");
  EXPECT_EQ(slurp(csv).substr(0, 2), "d,");
}

TEST(Run, VoterGatesAreReported) {
  auto c = load_config(json::object(), flags({{"experiment", "sim-voter"}, {"n", 60}, {"d", 3}, {"nu", 0.5},
                                              {"u", 0.5}, {"T", 20.0}, {"grid_step", 10.0}, {"reps", 200}}));
  const auto r = run_experiment(c);
  EXPECT_EQ(r.gates.size(), 6u);
  EXPECT_EQ(r.gates[0].name, "martingale@t=10.000000");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("--help"), 0);
  EXPECT_EQ(cli("theta --d 3,4 --nu 0,0.3"), 0);
  EXPECT_EQ(cli("sim-meeting --d 3 --nu 0.3"), 2);
  EXPECT_EQ(cli("sim-voter --n 100 --d 2 --nu 0.3 --u 0.5 --T 1 --reps 2"), 2);
  EXPECT_EQ(cli("theta --d 3 --nu -1"), 2);
  EXPECT_EQ(cli("theta --d 3 --nu 0 --bogus"), 2);
  EXPECT_EQ(cli("theta --d 2 --nu 0"), 3);
  EXPECT_EQ(cli("sim-toy --d 3 --nu 0.3 --n 100000 --delta 0.02 --reps 5"), 2);
}

TEST(Cli, ConfigFileAndOverride) {
  const auto cfg = scratch("cfg.json");
  const auto out = scratch("cfg_out.csv");
  std::ofstream(cfg) << R"({"schema": 1, "experiment": "theta-table", "d": [3], "nu": [0.3]})";
  EXPECT_EQ(cli("theta --config " + cfg.string() + " --nu 0,1 --out " + out.string()), 0);
  const std::string csv = slurp(out);
  EXPECT_NE(csv.find("\n3,0,"), std::string::npos);
  EXPECT_NE(csv.find("\n3,1,"), std::string::npos);
  EXPECT_EQ(csv.find("\n3,0.29"), std::string::npos);
}

TEST(Cli, DeterministicCsvBytes) {
  const auto a = scratch("det_a.csv"), b = scratch("det_b.csv");
  const std::string args = "sim-meeting --n 80 --d 3 --nu 0.4 --reps 30 --seed 3 --out ";
  cli(args + a.string() + " --threads 1");
  cli(args + b.string() + " --threads 4");
  EXPECT_FALSE(slurp(a).empty());
  EXPECT_EQ(slurp(a), slurp(b));
}
