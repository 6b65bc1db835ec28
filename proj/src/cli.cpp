#include "coagstat/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "coagstat/config.hpp"
#include "coagstat/diagnostics.hpp"
#include "coagstat/io.hpp"
#include "coagstat/rng.hpp"

namespace coagstat {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

double blowup_bound(const EvolutionConfig& evo, const AprioriConstants& cst) {
  if (evo.blowup_absolute) return *evo.blowup_absolute;
  if (cst.lambda_lt_one) return evo.blowup_factor * cst.c1;
  return std::numeric_limits<double>::infinity();
}

void write_stage_outputs(const fs::path& dir, const Grid& grid,
                         const EvolveResult& res, const SteadyReport& rep) {
  write_distribution_csv(dir / "distribution.csv", grid, res.phi);
  write_trajectory_csv(dir / "trajectory.csv", res.trajectory);
  write_json(dir / "report.json", rep.to_json());
}

// ---------------------------------------------------------------------------
// verify suites
// ---------------------------------------------------------------------------

json inequalities_suite(std::uint64_t seed) {
  json out;
  AlgebraicReport alg = algebraic_checks(1000000, seed);
  out["d4d5"] = {{"samples", alg.samples},
                 {"violations", alg.violations},
                 {"worst_d4_lower", alg.worst_d4_lower},
                 {"worst_d4_upper", alg.worst_d4_upper},
                 {"worst_d5_lower", alg.worst_d5_lower},
                 {"worst_d5_upper", alg.worst_d5_upper},
                 {"pass", alg.pass}};

  Grid grid = Grid::geometric(1.0, 1e4, 16);
  Rng rng(seed + 1);
  const int cases = 1000;
  bool all = true;
  double worst_ratio = 0.0;
  for (int c = 0; c < cases; ++c) {
    const double theta = 0.5 * rng.uniform01();
    const double m = 0.05 + 0.9 * rng.uniform01();
    const double sigma = 0.999 * rng.uniform01() * 0.5 * (m + 2.0 * theta);
    std::vector<double> g(static_cast<std::size_t>(grid.size()));
    for (double& gi : g) {
      const double u = rng.uniform01();
      const double amp = rng.uniform(-6.0, 2.0);
      gi = u < 0.25 ? 0.0 : std::exp(amp);
    }
    B3Report rep = b3_check(grid, g, theta, m, sigma);
    worst_ratio = std::max(worst_ratio, rep.ratio);
    all = all && rep.pass;
  }
  out["b3"] = {{"cases", cases}, {"worst_ratio", worst_ratio}, {"pass", all}};
  out["pass"] = alg.pass && all;
  return out;
}

json operator_suite(std::uint64_t seed, int workers) {
  json out;
  Grid grid = Grid::geometric(1e-3, 1e3, 8);
  const std::size_t n = static_cast<std::size_t>(grid.size());

  struct Case {
    std::string name;
    Kernel kernel;
  };
  std::vector<Case> cases;
  cases.push_back({"sum_lambda0", Kernel::sum_power(0.0, 1.0)});
  cases.push_back({"sum_lambda0.5", Kernel::sum_power(0.5, 1.0)});
  cases.push_back({"modulated_lambda0.5",
                   Kernel::custom(0.5, 0.5, 1.5, [](double x, double y) {
                     return (std::pow(x, 0.5) + std::pow(y, 0.5)) *
                            (1.0 + 0.5 * std::sin(std::log(x * y)));
                   })});

  Rng rng(seed + 2);
  bool pass = true;
  double worst_mass = 0.0, worst_weak = 0.0, worst_split = 0.0;
  bool thread_invariant = true, gain_nonneg = true, number_sign = true;
  double worst_symmetry = 0.0;

  for (const Case& kc : cases) {
    PairTable table = build_pair_table(kc.kernel, grid);
    for (const PairTable::Entry& e : table.entries) {
      if (e.target < 0) continue;
      if (e.w_lo < 0.0 || e.w_lo > 1.0 || e.w_hi < 0.0 || e.w_hi > 1.0) pass = false;
      worst_split = std::max(worst_split, std::abs(e.w_lo + e.w_hi - 1.0));
      const double mass =
          e.w_lo * grid.pivot(e.target) + e.w_hi * grid.pivot(e.target + 1);
      worst_split = std::max(worst_split, std::abs(mass - e.sum_size) / e.sum_size);
    }

    std::vector<double> phi(n);
    for (double& v : phi) {
      const double u = rng.uniform01();
      const double amp = rng.uniform(-8.0, 0.0);
      v = u < 0.3 ? 0.0 : std::exp(amp);
    }

    ApplyResult a = apply(table, grid, phi, workers);
    ApplyResult a1 = apply(table, grid, phi, 1);
    ApplyResult a4 = apply(table, grid, phi, 4);
    if (a.dphi != a1.dphi || a.dphi != a4.dphi ||
        a.overflow_mass != a1.overflow_mass || a.overflow_mass != a4.overflow_mass)
      thread_invariant = false;

    double mass_net = 0.0, mass_abs = 0.0, number_net = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
      const double term = grid.pivot(i) * a.dphi[static_cast<std::size_t>(i)] * grid.width(i);
      mass_net += term;
      mass_abs += std::abs(term);
      number_net += a.dphi[static_cast<std::size_t>(i)] * grid.width(i);
      if (a.gain[static_cast<std::size_t>(i)] < 0.0) gain_nonneg = false;
    }
    worst_mass = std::max(worst_mass, std::abs(mass_net + a.overflow_mass) /
                                          (mass_abs + a.overflow_mass + 1e-300));
    if (number_net > 1e-12 * (mass_abs + 1.0)) number_sign = false;

    for (int t = 0; t < 20; ++t) {
      std::vector<double> theta(n);
      for (double& v : theta) v = rng.uniform(-1.0, 1.0);
      const double wf =
          weak_form(table, grid, phi, WeakTestFunction::with_constant(theta, 0.0), workers);
      double direct = 0.0, scale = 0.0;
      for (int i = 0; i < grid.size(); ++i) {
        direct += theta[static_cast<std::size_t>(i)] * a.dphi[static_cast<std::size_t>(i)] *
                  grid.width(i);
        scale += std::abs(theta[static_cast<std::size_t>(i)] *
                          a.dphi[static_cast<std::size_t>(i)]) *
                 grid.width(i);
      }
      worst_weak = std::max(worst_weak, std::abs(wf - direct) / (scale + 1e-300));
    }

    for (int s = 0; s < 200000; ++s) {
      const double x = rng.log_uniform(1e-6, 1e6);
      const double y = rng.log_uniform(1e-6, 1e6);
      worst_symmetry =
          std::max(worst_symmetry, std::abs(kc.kernel.eval(x, y) - kc.kernel.eval(y, x)));
    }
  }

  pass = pass && thread_invariant && gain_nonneg && number_sign &&
         worst_mass <= 1e-10 && worst_weak <= 1e-10 && worst_split <= 1e-12 &&
         worst_symmetry == 0.0;
  out["mass_identity_worst"] = worst_mass;
  out["weak_identity_worst"] = worst_weak;
  out["splitting_worst"] = worst_split;
  out["symmetry_worst"] = worst_symmetry;
  out["gain_nonnegative"] = gain_nonneg;
  out["number_sign_ok"] = number_sign;
  out["thread_invariant"] = thread_invariant;
  out["pass"] = pass;
  return out;
}

json bounds_suite(std::uint64_t seed) {
  json out;
  bool pass = true;
  json entries = json::array();

  std::vector<SourceSpec> sources = {SourceSpec::indicator(1.0, 1.0, 2.0),
                                     SourceSpec::power_bump(1.0, 0.5, 4.0, 0.5),
                                     SourceSpec::power_expcut(1.0, 0.25, 2.0)};
  const std::vector<double> lambdas = {0.0, 0.3, 0.5, 0.7, 0.9};
  const std::vector<double> delta_ladder = {0.3, 0.1, 0.03, 0.01, 1e-3, 1e-4};

  for (const SourceSpec& src : sources) {
    for (double lambda : lambdas) {
      Kernel kernel = Kernel::sum_power(lambda, 1.0, 0.8, 1.25);
      AprioriConstants cst = apriori_bounds(kernel, src);
      json e;
      e["source"] = src.describe();
      e["lambda"] = lambda;
      e["C1"] = cst.c1;
      e["C4"] = cst.c4;
      e["C3"] = cst.c3;
      e["z_delta0"] = cst.z_delta0;
      const bool order_ok = cst.c4 < cst.c1 && cst.c4 < cst.z_delta0;
      double delta0 = 0.0;
      for (double d : delta_ladder)
        if (cst.z_delta(d) >= cst.c4) {
          delta0 = d;
          break;
        }
      e["delta0_empirical"] = delta0;
      e["order_ok"] = order_ok;

      // Monotone truncation and the crude M_1(S_delta) <= M_lambda(S)/delta^{1-lambda}.
      bool trunc_ok = true, crude_ok = true;
      for (double m : {0.0, 0.5, lambda}) {
        const double full = src.moment(m);
        double prev = 0.0;
        for (double d : delta_ladder) {  // decreasing delta: moments nondecreasing
          const double v = src.truncated(d).moment(m);
          if (v > full * (1.0 + 1e-12)) trunc_ok = false;
          if (v < prev * (1.0 - 1e-12)) trunc_ok = false;
          prev = v;
        }
        if (std::abs(src.truncated(delta_ladder.back()).moment(m) - full) >
            1e-6 * (full + 1e-300))
          trunc_ok = false;
      }
      for (double d : delta_ladder) {
        const double m1d = src.truncated(d).moment(1.0);
        if (m1d > src.moment(lambda) / std::pow(d, 1.0 - lambda) * (1.0 + 1e-12))
          crude_ok = false;
      }
      e["truncation_ok"] = trunc_ok;
      e["crude_m1_ok"] = crude_ok;
      entries.push_back(e);
      pass = pass && order_ok && trunc_ok && crude_ok;
    }
  }

  // kappa monotonicity in theta for a few (m, sigma).
  Rng rng(seed + 3);
  bool kappa_ok = true;
  for (int t = 0; t < 100; ++t) {
    const double m = 0.1 + 0.8 * rng.uniform01();
    const double th1 = 0.4 * rng.uniform01();
    const double th2 = th1 + 0.05;
    const double sig = 0.9 * rng.uniform01() * 0.5 * m;
    if (kappa(th2, m, sig) > kappa(th1, m, sig)) kappa_ok = false;
  }
  out["kappa_monotone_in_theta"] = kappa_ok;
  out["entries"] = entries;
  out["pass"] = pass && kappa_ok;
  return out;
}

}  // namespace

int env_workers() {
  const char* env = std::getenv("COAGSTAT_THREADS");
  if (!env) return 1;
  const int v = std::atoi(env);
  return std::max(1, std::min(v, 64));
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
    if (cfg.evolution.deltas.size() != 1)
      throw ConfigError("config error at /evolution: `run` expects a single delta; use `continue` for a family");
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    const int workers = env_workers();
    Grid grid = cfg.grid.make();
    Kernel kernel = cfg.kernel.make();
    PairTable table = build_pair_table(kernel, grid);
    AprioriConstants cst = apriori_bounds(kernel, cfg.source);
    const double delta = cfg.evolution.deltas[0];
    EvolveParams params =
        cfg.evolution.params(delta, blowup_bound(cfg.evolution, cst), workers);
    SizeDistribution src = cfg.source.truncated(delta).discretize(grid);
    SizeDistribution init(static_cast<std::size_t>(grid.size()), 0.0);
    EvolveResult res = evolve_to_steady(params, table, grid, kernel.lambda(), src, init);
    SteadyReport rep = analyze_steady(kernel, grid, table, res.phi, cfg.source, src,
                                      delta, cfg.diagnostics, res.trajectory,
                                      res.converged, workers);
    write_stage_outputs(out_dir, grid, res, rep);
    const bool ok = res.converged && !res.blown_up && rep.pass(cfg.diagnostics);
    if (!ok)
      std::cerr << "run: " << (res.converged ? "checks failed" : "did not converge")
                << (res.blown_up ? " (moment blow-up)" : "") << "\n";
    return ok ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 2;
  }
}

int cmd_continue(const std::string& config_path, const std::string& out_dir) {
  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    const int workers = env_workers();
    Grid grid = cfg.grid.make();
    Kernel kernel = cfg.kernel.make();
    PairTable table = build_pair_table(kernel, grid);
    AprioriConstants cst = apriori_bounds(kernel, cfg.source);
    EvolveParams base =
        cfg.evolution.params(cfg.evolution.deltas[0], blowup_bound(cfg.evolution, cst), workers);
    SteadyFamily family =
        delta_continuation(cfg.evolution.deltas, table, grid, kernel.lambda(),
                           cfg.source, base);

    // The moment sandwiches are delta -> 0 statements; along the family they
    // gate only the smallest delta, while residual and trajectory bounds hold
    // at every stage.
    DiagnosticsConfig mid_cfg = cfg.diagnostics;
    std::erase_if(mid_cfg.checks, [](const std::string& c) {
      return c == "d2a" || c == "d2b" || c == "transfer";
    });

    json continuation;
    continuation["deltas"] = cfg.evolution.deltas;
    json entries = json::array();
    bool all_pass = family.complete;
    char name[32];
    for (std::size_t s = 0; s < family.stages.size(); ++s) {
      const bool final_stage = s + 1 == family.stages.size();
      const DiagnosticsConfig& stage_cfg = final_stage ? cfg.diagnostics : mid_cfg;
      const ContinuationStage& stage = family.stages[s];
      SteadyReport rep = analyze_steady(kernel, grid, table, stage.result.phi,
                                        cfg.source, stage.source_disc, stage.delta,
                                        cfg.diagnostics, stage.result.trajectory,
                                        stage.result.converged, workers);
      std::snprintf(name, sizeof(name), "delta_%03zu", s);
      write_stage_outputs(fs::path(out_dir) / "family" / name, grid, stage.result, rep);

      json e;
      e["delta"] = stage.delta;
      e["converged"] = stage.result.converged;
      e["steps"] = stage.result.steps;
      e["M0"] = moment(grid, stage.result.phi, 0.0);
      e["Mlambda"] = moment(grid, stage.result.phi, kernel.lambda());
      e["M1"] = moment(grid, stage.result.phi, 1.0);
      e["max_residual"] = rep.max_residual;
      e["tail_slope"] = rep.tail.slope;
      e["pass"] = rep.pass(stage_cfg);
      entries.push_back(e);
      all_pass = all_pass && rep.pass(stage_cfg);
    }
    continuation["entries"] = entries;
    continuation["complete"] = family.complete;
    continuation["flag"] = family.flag;
    continuation["constants"] = {{"C1", cst.c1}, {"C4", cst.c4}};
    write_json(fs::path(out_dir) / "continuation.json", continuation);
    if (!all_pass) std::cerr << "continue: " << (family.complete ? "checks failed" : family.flag) << "\n";
    return all_pass ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "continue failed: " << e.what() << "\n";
    return 2;
  }
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& out_dir) {
  try {
    const int workers = env_workers();
    json out;
    out["suite"] = suite;
    out["seed"] = seed;
    bool pass = true;
    if (suite == "inequalities" || suite == "all") {
      out["inequalities"] = inequalities_suite(seed);
      pass = pass && out["inequalities"]["pass"].get<bool>();
    }
    if (suite == "operator" || suite == "all") {
      out["operator"] = operator_suite(seed, workers);
      pass = pass && out["operator"]["pass"].get<bool>();
    }
    if (suite == "bounds" || suite == "all") {
      out["bounds"] = bounds_suite(seed);
      pass = pass && out["bounds"]["pass"].get<bool>();
    }
    out["pass"] = pass;
    write_json(fs::path(out_dir) / "verify.json", out);
    return pass ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "verify failed: " << e.what() << "\n";
    return 2;
  }
}

int cli_main(int argc, char** argv) {
  CLI::App app{"stationary coagulation-with-source solver and verification suite"};
  app.require_subcommand(1);

  std::string config, out, suite = "all";
  std::uint64_t seed = 0;

  CLI::App* run = app.add_subcommand("run", "solve one regularized steady state");
  run->add_option("--config", config, "JSON config")->required();
  run->add_option("--out", out, "output directory")->required();

  CLI::App* cont = app.add_subcommand("continue", "warm-started delta continuation");
  cont->add_option("--config", config, "JSON config")->required();
  cont->add_option("--out", out, "output directory")->required();

  CLI::App* ver = app.add_subcommand("verify", "run property suites");
  ver->add_option("--suite", suite, "inequalities|operator|bounds|all")
      ->check(CLI::IsMember({"inequalities", "operator", "bounds", "all"}));
  ver->add_option("--seed", seed, "RNG seed");
  ver->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (run->parsed()) return cmd_run(config, out);
  if (cont->parsed()) return cmd_continue(config, out);
  return cmd_verify(suite, seed, out);
}

}  // namespace coagstat
