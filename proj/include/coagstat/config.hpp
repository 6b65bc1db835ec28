#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "coagstat/diagnostics.hpp"
#include "coagstat/evolution.hpp"
#include "coagstat/kernel.hpp"
#include "coagstat/source.hpp"

namespace coagstat {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct KernelConfig {
  std::string type;  // "sum_power" | "product_power"
  double lambda = 0.0, gamma = 0.0, alpha = 0.0, k = 1.0;
  std::optional<double> k1, k2;

  Kernel make() const;
  bool is_general() const { return type == "product_power"; }
  GeneralKernel general() const;
};

struct GridConfig {
  double x_min = 1e-3, x_max = 1e6;
  int bins_per_decade = 16;
  Grid make() const { return Grid::geometric(x_min, x_max, bins_per_decade); }
};

struct EvolutionConfig {
  std::vector<double> deltas;  // strictly decreasing, at least one
  double dt_init = 1e-3;
  double dt_max = 1e12;
  double t_max = std::numeric_limits<double>::infinity();
  double steady_tol = 1e-8;
  long max_steps = 200000;
  double blowup_factor = 1000.0;  // times C1 when lambda < 1
  std::optional<double> blowup_absolute;

  EvolveParams params(double delta, double blowup_mlambda, int workers) const;
};

struct RunConfig {
  KernelConfig kernel;
  SourceSpec source = SourceSpec::indicator(1.0, 1.0, 2.0);
  GridConfig grid;
  EvolutionConfig evolution;
  DiagnosticsConfig diagnostics;
  std::uint64_t seed = 0;
};

// Strict parse: every section schema-checked before any compute starts;
// unknown keys are rejected with their JSON pointer.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

}  // namespace coagstat
