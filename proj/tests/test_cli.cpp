#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coagstat/cli.hpp"
#include "coagstat/config.hpp"

using namespace coagstat;
namespace fs = std::filesystem;

namespace {

fs::path make_workdir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("coagstat_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& name,
                      const std::string& body) {
  fs::path p = dir / name;
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const char* kGoodConfig = R"({
  "kernel": {"type": "sum_power", "lambda": 0, "k": 1},
  "source": {"family": "indicator", "c": 1, "a": 1, "b": 2},
  "grid": {"x_min": 1e-2, "x_max": 1e3, "bins_per_decade": 8},
  "evolution": {"delta": 5e-3, "steady_tol": 1e-9, "max_steps": 50000},
  "seed": 1
})";

}  // namespace

TEST_CASE("cmd_run: a valid config produces the three outputs and exits 0") {
  fs::path dir = make_workdir("run_ok");
  fs::path cfg = write_config(dir, "cfg.json", kGoodConfig);
  const int code = cmd_run(cfg.string(), (dir / "out").string());
  CHECK(code == 0);
  CHECK(fs::exists(dir / "out" / "distribution.csv"));
  CHECK(fs::exists(dir / "out" / "trajectory.csv"));
  CHECK(fs::exists(dir / "out" / "report.json"));

  auto rep = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  CHECK(rep["converged"].get<bool>());
  CHECK(rep["d2a"]["pass"].get<bool>());
  CHECK(rep["d2b"]["pass"].get<bool>());

  // determinism: a second run writes byte-identical outputs
  const int code2 = cmd_run(cfg.string(), (dir / "out2").string());
  CHECK(code2 == 0);
  CHECK(slurp(dir / "out" / "distribution.csv") == slurp(dir / "out2" / "distribution.csv"));
  CHECK(slurp(dir / "out" / "report.json") == slurp(dir / "out2" / "report.json"));
  CHECK(slurp(dir / "out" / "trajectory.csv") == slurp(dir / "out2" / "trajectory.csv"));
}

TEST_CASE("config: missing and unknown keys are named") {
  fs::path dir = make_workdir("cfg_err");
  fs::path missing = write_config(dir, "missing.json", R"({
    "kernel": {"type": "sum_power", "lambda": 0, "k": 1},
    "source": {"family": "indicator", "c": 1, "a": 1, "b": 2},
    "evolution": {"delta": 0.01}
  })");
  CHECK(cmd_run(missing.string(), (dir / "o1").string()) == 1);
  try {
    load_run_config(missing.string());
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("grid") != std::string::npos);
  }

  fs::path unknown = write_config(dir, "unknown.json", R"({
    "kernel": {"type": "sum_power", "lambda": 0, "k": 1, "gamma": 2},
    "source": {"family": "indicator", "c": 1, "a": 1, "b": 2},
    "grid": {"x_min": 1e-2, "x_max": 1e3, "bins_per_decade": 8},
    "evolution": {"delta": 0.01}
  })");
  try {
    load_run_config(unknown.string());
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("gamma") != std::string::npos);
    CHECK(std::string(e.what()).find("/kernel") != std::string::npos);
  }

  fs::path malformed = write_config(dir, "broken.json", "{ not json");
  CHECK(cmd_run(malformed.string(), (dir / "o2").string()) == 1);
}

TEST_CASE("config: evolution accepts exactly one of delta and deltas") {
  fs::path dir = make_workdir("cfg_delta");
  fs::path both = write_config(dir, "both.json", R"({
    "kernel": {"type": "sum_power", "lambda": 0, "k": 1},
    "source": {"family": "indicator", "c": 1, "a": 1, "b": 2},
    "grid": {"x_min": 1e-2, "x_max": 1e3, "bins_per_decade": 8},
    "evolution": {"delta": 0.01, "deltas": [0.1, 0.01]}
  })");
  CHECK_THROWS_AS(load_run_config(both.string()), ConfigError);

  fs::path list = write_config(dir, "list.json", R"({
    "kernel": {"type": "sum_power", "lambda": 0, "k": 1},
    "source": {"family": "indicator", "c": 1, "a": 1, "b": 2},
    "grid": {"x_min": 1e-2, "x_max": 1e3, "bins_per_decade": 8},
    "evolution": {"deltas": [0.1, 0.01]}
  })");
  // run refuses a family; continue accepts it
  CHECK(cmd_run(list.string(), (dir / "o").string()) == 1);
}

TEST_CASE("cmd_continue: per-delta outputs plus a family summary") {
  fs::path dir = make_workdir("continue");
  fs::path cfg = write_config(dir, "cfg.json", R"({
    "kernel": {"type": "sum_power", "lambda": 0, "k": 1},
    "source": {"family": "indicator", "c": 1, "a": 1, "b": 2},
    "grid": {"x_min": 1e-2, "x_max": 1e3, "bins_per_decade": 8},
    "evolution": {"deltas": [1e-1, 1e-2, 1e-3], "steady_tol": 1e-9, "max_steps": 50000},
    "seed": 1
  })");
  const int code = cmd_continue(cfg.string(), (dir / "out").string());
  CHECK(code == 0);
  auto cont = nlohmann::json::parse(slurp(dir / "out" / "continuation.json"));
  REQUIRE(cont["entries"].size() == 3);
  double prev = 1.0;
  for (const auto& e : cont["entries"]) {
    CHECK(e["delta"].get<double>() < prev);
    prev = e["delta"].get<double>();
    CHECK(e["converged"].get<bool>());
  }
  CHECK(cont["complete"].get<bool>());
  for (int s = 0; s < 3; ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "delta_%03d", s);
    CHECK(fs::exists(dir / "out" / "family" / name / "report.json"));
  }
}

TEST_CASE("cmd_run: lambda >= 1 with existence checks enabled fails scientifically") {
  fs::path dir = make_workdir("lam15");
  fs::path cfg = write_config(dir, "cfg.json", R"({
    "kernel": {"type": "sum_power", "lambda": 1.5, "k": 1},
    "source": {"family": "indicator", "c": 1, "a": 1, "b": 2},
    "grid": {"x_min": 0.5, "x_max": 1e2, "bins_per_decade": 8},
    "evolution": {"delta": 1e-2, "max_steps": 60000},
    "seed": 1
  })");
  CHECK(cmd_run(cfg.string(), (dir / "out").string()) == 2);
  auto rep = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  CHECK_FALSE(rep["d2b"]["applicable"].get<bool>());
}

TEST_CASE("cmd_verify: suites pass and verify.json ignores the worker count") {
  fs::path dir = make_workdir("verify");
  setenv("COAGSTAT_THREADS", "1", 1);
  CHECK(cmd_verify("all", 3, (dir / "t1").string()) == 0);
  setenv("COAGSTAT_THREADS", "5", 1);
  CHECK(cmd_verify("all", 3, (dir / "t5").string()) == 0);
  unsetenv("COAGSTAT_THREADS");
  const std::string a = slurp(dir / "t1" / "verify.json");
  const std::string b = slurp(dir / "t5" / "verify.json");
  CHECK(a == b);
  CHECK_FALSE(a.empty());

  auto v = nlohmann::json::parse(a);
  CHECK(v["pass"].get<bool>());
  CHECK(v["inequalities"]["pass"].get<bool>());
  CHECK(v["operator"]["pass"].get<bool>());
  CHECK(v["bounds"]["pass"].get<bool>());

  // single-suite selection stays within its section
  CHECK(cmd_verify("operator", 3, (dir / "op").string()) == 0);
  auto vo = nlohmann::json::parse(slurp(dir / "op" / "verify.json"));
  CHECK(vo.contains("operator"));
  CHECK_FALSE(vo.contains("inequalities"));
}
