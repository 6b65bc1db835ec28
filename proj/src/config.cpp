#include "coagstat/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace coagstat {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where,
                const std::set<std::string>& allowed,
                const std::set<std::string>& required) {
  if (!j.is_object()) throw ConfigError("config error at " + where + ": expected an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key()))
      throw ConfigError("config error at " + where + ": unexpected key \"" + item.key() + "\"");
  }
  for (const std::string& key : required) {
    if (!j.contains(key))
      throw ConfigError("config error at " + where + ": missing key \"" + key + "\"");
  }
}

double get_num(const json& j, const std::string& where, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number())
    throw ConfigError("config error at " + where + "/" + key + ": expected a number");
  return v.get<double>();
}

long get_int(const json& j, const std::string& where, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number_integer())
    throw ConfigError("config error at " + where + "/" + key + ": expected an integer");
  return v.get<long>();
}

KernelConfig parse_kernel(const json& j) {
  KernelConfig k;
  if (!j.is_object() || !j.contains("type"))
    throw ConfigError("config error at /kernel: missing key \"type\"");
  k.type = j.at("type").get<std::string>();
  if (k.type == "sum_power") {
    check_keys(j, "/kernel", {"type", "lambda", "k", "k1", "k2"}, {"type", "lambda", "k"});
    k.lambda = get_num(j, "/kernel", "lambda");
    k.k = get_num(j, "/kernel", "k");
  } else if (k.type == "product_power") {
    check_keys(j, "/kernel", {"type", "gamma", "alpha", "k", "k1", "k2"},
               {"type", "gamma", "alpha", "k"});
    k.gamma = get_num(j, "/kernel", "gamma");
    k.alpha = get_num(j, "/kernel", "alpha");
    k.k = get_num(j, "/kernel", "k");
  } else {
    throw ConfigError("config error at /kernel/type: unknown kernel type \"" + k.type + "\"");
  }
  if (j.contains("k1") != j.contains("k2"))
    throw ConfigError("config error at /kernel: k1 and k2 must be given together");
  if (j.contains("k1")) {
    k.k1 = get_num(j, "/kernel", "k1");
    k.k2 = get_num(j, "/kernel", "k2");
  }
  return k;
}

SourceSpec parse_source(const json& j) {
  if (!j.is_object() || !j.contains("family"))
    throw ConfigError("config error at /source: missing key \"family\"");
  const std::string family = j.at("family").get<std::string>();
  if (family == "indicator") {
    check_keys(j, "/source", {"family", "c", "a", "b"}, {"family", "c", "a", "b"});
    return SourceSpec::indicator(get_num(j, "/source", "c"), get_num(j, "/source", "a"),
                                 get_num(j, "/source", "b"));
  }
  if (family == "power_bump") {
    check_keys(j, "/source", {"family", "c", "a", "b", "p"},
               {"family", "c", "a", "b", "p"});
    return SourceSpec::power_bump(get_num(j, "/source", "c"), get_num(j, "/source", "a"),
                                  get_num(j, "/source", "b"), get_num(j, "/source", "p"));
  }
  if (family == "power_expcut") {
    check_keys(j, "/source", {"family", "c", "p", "x_c"}, {"family", "c", "p", "x_c"});
    return SourceSpec::power_expcut(get_num(j, "/source", "c"), get_num(j, "/source", "p"),
                                    get_num(j, "/source", "x_c"));
  }
  throw ConfigError("config error at /source/family: unknown family \"" + family + "\"");
}

GridConfig parse_grid(const json& j) {
  check_keys(j, "/grid", {"x_min", "x_max", "bins_per_decade"},
             {"x_min", "x_max", "bins_per_decade"});
  GridConfig g;
  g.x_min = get_num(j, "/grid", "x_min");
  g.x_max = get_num(j, "/grid", "x_max");
  g.bins_per_decade = static_cast<int>(get_int(j, "/grid", "bins_per_decade"));
  return g;
}

EvolutionConfig parse_evolution(const json& j) {
  check_keys(j, "/evolution",
             {"delta", "deltas", "dt_init", "dt_max", "t_max", "steady_tol", "max_steps",
              "blowup_factor", "blowup_absolute"},
             {});
  EvolutionConfig e;
  if (j.contains("delta") == j.contains("deltas"))
    throw ConfigError("config error at /evolution: exactly one of \"delta\" or \"deltas\" is required");
  if (j.contains("delta")) {
    e.deltas = {get_num(j, "/evolution", "delta")};
  } else {
    const json& arr = j.at("deltas");
    if (!arr.is_array() || arr.empty())
      throw ConfigError("config error at /evolution/deltas: expected a non-empty array");
    for (const json& v : arr) {
      if (!v.is_number())
        throw ConfigError("config error at /evolution/deltas: expected numbers");
      e.deltas.push_back(v.get<double>());
    }
  }
  for (std::size_t i = 0; i < e.deltas.size(); ++i) {
    if (!(e.deltas[i] > 0.0 && e.deltas[i] < 1.0))
      throw ConfigError("config error at /evolution: deltas must lie in (0,1)");
    if (i > 0 && !(e.deltas[i] < e.deltas[i - 1]))
      throw ConfigError("config error at /evolution: deltas must be strictly decreasing");
  }
  if (j.contains("dt_init")) e.dt_init = get_num(j, "/evolution", "dt_init");
  if (j.contains("dt_max")) e.dt_max = get_num(j, "/evolution", "dt_max");
  if (j.contains("t_max")) e.t_max = get_num(j, "/evolution", "t_max");
  if (j.contains("steady_tol")) e.steady_tol = get_num(j, "/evolution", "steady_tol");
  if (j.contains("max_steps")) e.max_steps = get_int(j, "/evolution", "max_steps");
  if (j.contains("blowup_factor")) e.blowup_factor = get_num(j, "/evolution", "blowup_factor");
  if (j.contains("blowup_absolute"))
    e.blowup_absolute = get_num(j, "/evolution", "blowup_absolute");
  return e;
}

DiagnosticsConfig parse_diagnostics(const json& j) {
  check_keys(j, "/diagnostics",
             {"sandwich_tol", "residual_tol", "battery_A", "tail_window", "tail_exclude",
              "tail_slope_tol", "transfer_slack", "checks", "extra_moments"},
             {});
  DiagnosticsConfig d;
  if (j.contains("sandwich_tol")) d.sandwich_tol = get_num(j, "/diagnostics", "sandwich_tol");
  if (j.contains("residual_tol")) d.residual_tol = get_num(j, "/diagnostics", "residual_tol");
  if (j.contains("tail_window")) d.tail_window = get_num(j, "/diagnostics", "tail_window");
  if (j.contains("tail_exclude")) d.tail_exclude = get_num(j, "/diagnostics", "tail_exclude");
  if (j.contains("tail_slope_tol"))
    d.tail_slope_tol = get_num(j, "/diagnostics", "tail_slope_tol");
  if (j.contains("transfer_slack"))
    d.transfer_slack = get_num(j, "/diagnostics", "transfer_slack");
  if (j.contains("battery_A")) {
    d.battery_a.clear();
    for (const json& v : j.at("battery_A")) d.battery_a.push_back(v.get<double>());
  }
  if (j.contains("extra_moments")) {
    for (const json& v : j.at("extra_moments")) d.extra_moments.push_back(v.get<double>());
  }
  if (j.contains("checks")) {
    d.checks.clear();
    for (const json& v : j.at("checks")) d.checks.push_back(v.get<std::string>());
  }
  return d;
}

}  // namespace

Kernel KernelConfig::make() const {
  if (type == "sum_power")
    return Kernel::sum_power(lambda, k, k1.value_or(k), k2.value_or(k));
  GeneralKernel g = general();
  return g.as_kernel();
}

GeneralKernel KernelConfig::general() const {
  GeneralKernel g;
  g.gamma = gamma;
  g.alpha = alpha;
  g.k = k;
  g.k1 = k1.value_or(k);
  g.k2 = k2.value_or(k);
  return g;
}

EvolveParams EvolutionConfig::params(double delta, double blowup_mlambda,
                                     int workers) const {
  EvolveParams p;
  p.delta = delta;
  p.dt_init = dt_init;
  p.dt_max = dt_max;
  p.t_max = t_max;
  p.steady_tol = steady_tol;
  p.max_steps = max_steps;
  p.blowup_mlambda = blowup_mlambda;
  p.workers = workers;
  return p;
}

RunConfig parse_run_config(const nlohmann::json& j) {
  check_keys(j, "/", {"kernel", "source", "grid", "evolution", "diagnostics", "seed"},
             {"kernel", "source", "grid", "evolution"});
  RunConfig cfg;
  cfg.kernel = parse_kernel(j.at("kernel"));
  cfg.source = parse_source(j.at("source"));
  cfg.grid = parse_grid(j.at("grid"));
  cfg.evolution = parse_evolution(j.at("evolution"));
  if (j.contains("diagnostics")) cfg.diagnostics = parse_diagnostics(j.at("diagnostics"));
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer() || j.at("seed").get<long long>() < 0)
      throw ConfigError("config error at /seed: expected a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  // Fail early on kernel/grid construction problems.
  (void)cfg.kernel.make();
  (void)cfg.grid.make();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config error: cannot open \"" + path + "\"");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  try {
    return parse_run_config(j);
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
}

}  // namespace coagstat
