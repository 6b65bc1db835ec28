#include "coagstat/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "coagstat/rng.hpp"

namespace coagstat {

namespace {

std::string fmt_g(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

double kappa(double theta, double m, double sigma) {
  if (!(theta >= 0.0 && theta <= 0.5))
    throw std::domain_error("kappa: theta must lie in [0, 1/2]");
  if (!(m > 0.0 && m < 1.0)) throw std::domain_error("kappa: m must lie in (0,1)");
  if (!(sigma >= 0.0 && sigma < 0.5 * (m + 2.0 * theta)))
    throw std::domain_error("kappa: sigma must lie in [0, (m+2 theta)/2)");
  const double pi = std::numbers::pi;
  return std::pow(2.0, 1.0 - m) * pi * pi / (3.0 * (1.0 - m)) *
         std::pow(4.0, (2.0 - m) / (m + 2.0 * theta - 2.0 * sigma));
}

B3Report b3_check(const Grid& grid, std::span<const double> g, double theta,
                  double m, double sigma) {
  if (static_cast<int>(g.size()) != grid.size())
    throw std::invalid_argument("b3_check: g not aligned with grid");
  const double kap = kappa(theta, m, sigma);

  const int n = grid.size();
  double lhs_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = grid.pivot(i);
    if (x < 1.0) continue;
    lhs_sum += std::pow(x, sigma) * g[static_cast<std::size_t>(i)] * grid.width(i);
  }

  double dsum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = grid.pivot(i);
    if (x < 1.0) continue;
    const double gi = g[static_cast<std::size_t>(i)] * grid.width(i);
    for (int j = 0; j < n; ++j) {
      const double y = grid.pivot(j);
      if (y < 1.0) continue;
      const double gj = g[static_cast<std::size_t>(j)] * grid.width(j);
      const double bracket = std::pow(x, m) + std::pow(y, m) - std::pow(x + y, m);
      dsum += bracket * std::pow(x * y, theta) * gi * gj;
    }
  }

  B3Report rep;
  rep.lhs = lhs_sum * lhs_sum;
  rep.rhs = 0.5 * kap * dsum;
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : (rep.lhs > 0.0 ? 1e300 : 0.0);
  rep.pass = rep.lhs <= rep.rhs * (1.0 + 1e-9);
  return rep;
}

AlgebraicReport algebraic_checks(long sample_count, std::uint64_t seed) {
  AlgebraicReport rep;
  rep.samples = sample_count;
  Rng rng(seed);
  double w4l = 1e300, w4u = 1e300, w5l = 1e300, w5u = 1e300;

  for (long s = 0; s < sample_count; ++s) {
    const double lambda = rng.uniform01();  // [0,1)
    const double x = rng.log_uniform(1e-6, 1e6);
    const double y = rng.log_uniform(1e-6, 1e6);
    const double xl = std::pow(x, lambda);
    const double yl = std::pow(y, lambda);
    const double sl = std::pow(x + y, lambda);
    const double xyl = std::pow(x * y, lambda);
    const double tl = std::pow(2.0, lambda);

    const double mid = xl + yl - sl;
    const double d4_lo = tl * (2.0 - tl) * xyl / sl;
    const double d4_hi = xyl / sl;
    const double d5_lo = 0.5 * tl * (xl + yl);
    const double scale = xl + yl;

    const double m1 = (mid - d4_lo) / scale;
    const double m2 = (d4_hi - mid) / scale;
    const double m3 = (sl - d5_lo) / scale;
    const double m4 = (xl + yl - sl) / scale;
    w4l = std::min(w4l, m1);
    w4u = std::min(w4u, m2);
    w5l = std::min(w5l, m3);
    w5u = std::min(w5u, m4);

    // Rounding guard: each side carries a few ulps from pow and division.
    const double fp_tol = 1e-14;
    if (m1 < -fp_tol || m2 < -fp_tol || m3 < -fp_tol || m4 < -fp_tol)
      ++rep.violations;
  }
  rep.worst_d4_lower = w4l;
  rep.worst_d4_upper = w4u;
  rep.worst_d5_lower = w5l;
  rep.worst_d5_upper = w5u;
  rep.pass = rep.violations == 0;
  return rep;
}

double AprioriConstants::z_delta(double delta) const {
  return (std::sqrt(k2 * mlambda_s + std::pow(2.0, 1.0 + lambda) * delta * delta) -
          std::pow(2.0, 0.5 * (1.0 + lambda)) * delta) /
         (std::pow(2.0, 0.5 * (1.0 - lambda)) * k2);
}

double AprioriConstants::c2(double m, double mu) const {
  return kappa(0.5 * lambda, m, mu) / (2.0 * k1);
}

AprioriConstants apriori_bounds(const Kernel& kernel, const SourceSpec& base_source) {
  AprioriConstants c;
  c.lambda = kernel.lambda();
  c.k1 = kernel.k1();
  c.k2 = kernel.k2();
  c.m0_s = base_source.moment(0.0);
  c.mlambda_s = base_source.moment(c.lambda);
  c.lambda_lt_one = c.lambda < 1.0;

  const double denom = (1.0 - std::pow(2.0, c.lambda - 1.0)) * c.k1;
  c.c1 = c.lambda_lt_one ? std::sqrt(2.0 * c.mlambda_s / denom)
                         : std::numeric_limits<double>::infinity();
  c.c4 = std::sqrt(c.mlambda_s / (std::pow(4.0, 1.0 - c.lambda) * c.k2));
  c.c3 = c.lambda_lt_one
             ? std::pow(2.0 * c.k2 * c.mlambda_s, (1.0 + c.lambda) / (1.0 - c.lambda)) *
                   c.m0_s / 2.0
             : std::numeric_limits<double>::infinity();
  c.z_delta0 = std::sqrt(c.mlambda_s / (std::pow(2.0, 1.0 - c.lambda) * c.k2));
  return c;
}

SandwichReport check_d2a(double k1, double k2, double m0_phi, double mlambda_phi,
                         double m0_source, double delta, double coag_rate,
                         double overflow_number, double tol) {
  SandwichReport rep;
  const double effective = m0_source - 2.0 * delta * m0_phi;
  rep.r_lo = k1 * m0_phi * mlambda_phi / std::max(effective, 1e-300);
  rep.r_hi = k2 * m0_phi * mlambda_phi / std::max(m0_source, 1e-300);
  rep.identity_residual =
      std::abs(effective - (coag_rate + overflow_number)) / std::max(m0_source, 1e-300);
  rep.pass = rep.r_lo <= 1.0 + tol && rep.r_hi >= 1.0 - tol &&
             rep.identity_residual <= 1e-6;
  rep.applicable = true;
  return rep;
}

SandwichReport check_d2b(double lambda, double k1, double k2, double mlambda_phi,
                         double mlambda_source, double d6_identity_residual,
                         double tol) {
  SandwichReport rep;
  rep.applicable = lambda < 1.0;
  rep.identity_residual = d6_identity_residual;
  if (!rep.applicable) return rep;
  const double tl = std::pow(2.0, lambda);
  const double sq = mlambda_phi * mlambda_phi;
  const double lower = tl * mlambda_source / k2;
  const double upper = std::pow(2.0, 1.0 - lambda) * mlambda_source / (k1 * (2.0 - tl));
  rep.r_lo = lower / std::max(sq, 1e-300);
  rep.r_hi = upper / std::max(sq, 1e-300);
  rep.pass = rep.r_lo <= 1.0 + tol && rep.r_hi >= 1.0 - tol &&
             d6_identity_residual <= 1e-4;
  return rep;
}

Battery default_battery(const Grid& grid, double lambda,
                        const std::vector<double>& a_list) {
  Battery bat;
  const int n = grid.size();
  std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
  bat.members.push_back({"ones", WeakTestFunction::with_constant(ones, 0.0)});

  for (double a : a_list) {
    std::vector<double> lin(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      lin[static_cast<std::size_t>(i)] = std::min(grid.pivot(i), a) / a;
    bat.members.push_back({"cap_lin_" + fmt_g(a),
                           WeakTestFunction::with_constant(std::move(lin), 0.0)});

    if (lambda > 1e-12) {
      const double al = std::pow(a, lambda);
      std::vector<double> pw(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        pw[static_cast<std::size_t>(i)] =
            std::min(std::pow(grid.pivot(i), lambda), al) / al;
      bat.members.push_back({"cap_pow_" + fmt_g(a),
                             WeakTestFunction::with_constant(std::move(pw), 0.0)});
    }

    std::vector<double> ind(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      ind[static_cast<std::size_t>(i)] = grid.pivot(i) < a ? 1.0 : 0.0;
    bat.members.push_back({"indicator_" + fmt_g(a),
                           WeakTestFunction::with_constant(std::move(ind), 0.0)});
  }
  return bat;
}

std::vector<ResidualEntry> stationarity_residuals(
    const PairTable& table, const Grid& grid, std::span<const double> phi,
    std::span<const double> source, double delta, const Battery& battery,
    int workers) {
  std::vector<ResidualEntry> out;
  out.reserve(battery.members.size());
  for (const Battery::Member& mem : battery.members) {
    const double wf = weak_form(table, grid, phi, mem.fn, workers);
    double src = 0.0, eff = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
      const double th = mem.fn.values[static_cast<std::size_t>(i)];
      src += th * source[static_cast<std::size_t>(i)] * grid.width(i);
      eff += th * phi[static_cast<std::size_t>(i)] * grid.width(i);
    }
    const double numer = std::abs(wf + src - 2.0 * delta * eff);
    out.push_back({mem.name, src > 0.0 ? numer / src : numer});
  }
  return out;
}

TailFit tail_slope(const Grid& grid, std::span<const double> phi,
                   double window_decades, double exclude_decades) {
  TailFit fit;
  fit.window_hi = grid.x_max() * std::pow(10.0, -exclude_decades);
  fit.window_lo = fit.window_hi * std::pow(10.0, -window_decades);

  std::vector<double> lx, lp;
  for (int i = 0; i < grid.size(); ++i) {
    const double x = grid.pivot(i);
    if (x < fit.window_lo || x > fit.window_hi) continue;
    const double v = phi[static_cast<std::size_t>(i)];
    if (!(v > 0.0)) continue;
    lx.push_back(std::log(x));
    lp.push_back(std::log(v));
  }
  fit.points = static_cast<int>(lx.size());
  if (fit.points < 8) return fit;

  const double n = static_cast<double>(fit.points);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += lp[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (lp[i] - my);
  }
  fit.slope = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = lp[i] - my - fit.slope * (lx[i] - mx);
    ss += r * r;
  }
  fit.stderr_slope = fit.points > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
  fit.applicable = true;
  return fit;
}

TransferEntry weighted_transfer(const std::string& name, double k1, const Grid& grid,
                                std::span<const double> phi,
                                std::span<const double> source,
                                std::span<const double> w, double mlambda_phi,
                                double slack) {
  for (std::size_t i = 1; i < w.size(); ++i)
    if (w[i] > w[i - 1] * (1.0 + 1e-12))
      throw std::domain_error("weighted_transfer: weight must be nonincreasing");
  TransferEntry e;
  e.weight = name;
  for (int i = 0; i < grid.size(); ++i) {
    e.lhs += w[static_cast<std::size_t>(i)] * source[static_cast<std::size_t>(i)] *
             grid.width(i);
    e.rhs += w[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(i)] *
             grid.width(i);
  }
  e.rhs *= k1 * mlambda_phi;
  e.pass = e.lhs >= e.rhs * (1.0 - slack);
  return e;
}

std::vector<TransferEntry> weighted_transfer_check(double k1, const Grid& grid,
                                                   std::span<const double> phi,
                                                   std::span<const double> source,
                                                   double mlambda_phi, double slack) {
  std::vector<TransferEntry> out;
  const std::size_t n = static_cast<std::size_t>(grid.size());
  std::vector<double> w(n, 1.0);
  out.push_back(weighted_transfer("1", k1, grid, phi, source, w, mlambda_phi, slack));
  for (double eps : {1e-2, 1e-1, 1.0}) {
    for (std::size_t i = 0; i < n; ++i)
      w[i] = 1.0 / (grid.pivot(static_cast<int>(i)) + eps);
    out.push_back(weighted_transfer("1/(x+" + fmt_g(eps) + ")", k1, grid, phi, source,
                                    w, mlambda_phi, slack));
  }
  return out;
}

TrajectoryCheck check_trajectory(const std::vector<TrajectorySample>& traj,
                                 double k1, double delta, double m0_s,
                                 const AprioriConstants& constants,
                                 double b7_tol_factor, double cap_slack,
                                 double floor_slack) {
  TrajectoryCheck chk;
  if (traj.empty()) return chk;

  double worst = -std::numeric_limits<double>::infinity();
  for (const TrajectorySample& s : traj) {
    const double lhs = s.dm0dt + 2.0 * delta * s.m0 + k1 * s.m0 * s.mlambda;
    worst = std::max(worst, lhs - m0_s);
  }
  chk.b7_worst_slack = worst;
  chk.b7_pass = worst <= b7_tol_factor * m0_s;

  chk.c1_applicable =
      constants.lambda_lt_one && traj.front().mlambda <= constants.c1;
  if (chk.c1_applicable) {
    double mmax = 0.0;
    for (const TrajectorySample& s : traj) mmax = std::max(mmax, s.mlambda);
    chk.mlambda_max = mmax;
    chk.c1_pass = mmax <= constants.c1 * (1.0 + cap_slack);
  }

  // Floor applies once delta is small enough that z_delta >= C4.
  if (constants.lambda_lt_one && constants.z_delta(delta) >= constants.c4) {
    chk.transient_t = 5.0 / std::sqrt(std::max(constants.mlambda_s, 1e-300));
    double mmin = std::numeric_limits<double>::infinity();
    for (const TrajectorySample& s : traj)
      if (s.t >= chk.transient_t) mmin = std::min(mmin, s.mlambda);
    if (std::isfinite(mmin)) {
      chk.c4_checked = true;
      chk.mlambda_min_after = mmin;
      chk.c4_pass = mmin >= constants.c4 * (1.0 - floor_slack);
    }
  }
  return chk;
}

bool DiagnosticsConfig::enabled(const std::string& name) const {
  return std::find(checks.begin(), checks.end(), name) != checks.end();
}

bool SteadyReport::pass(const DiagnosticsConfig& cfg) const {
  if (!converged) return false;
  if (cfg.enabled("d2a") && !(d2a.applicable && d2a.pass)) return false;
  if (cfg.enabled("d2b") && !(d2b.applicable && d2b.pass)) return false;
  if (cfg.enabled("residuals") && !(max_residual <= cfg.residual_tol)) return false;
  if (cfg.enabled("trajectory")) {
    if (!trajectory.applicable) return false;
    if (!trajectory.b7_pass) return false;
    if (trajectory.c1_applicable && !trajectory.c1_pass) return false;
    if (trajectory.c4_checked && !trajectory.c4_pass) return false;
  }
  if (cfg.enabled("transfer")) {
    if (!transfer_applicable) return false;
    for (const TransferEntry& t : transfer)
      if (!t.pass) return false;
  }
  if (cfg.enabled("tail")) {
    if (!tail.applicable) return false;
    const double target = -(3.0 + constants.lambda) / 2.0;
    if (std::abs(tail.slope - target) > cfg.tail_slope_tol) return false;
  }
  return true;
}

nlohmann::json SteadyReport::to_json() const {
  nlohmann::json j;
  j["delta"] = delta;
  j["converged"] = converged;
  j["moments"] = moments;
  j["d2a"] = {{"r_lo", d2a.r_lo},
              {"r_hi", d2a.r_hi},
              {"identity_residual", d2a.identity_residual},
              {"pass", d2a.pass},
              {"applicable", d2a.applicable}};
  j["d2b"] = {{"r_lo", d2b.r_lo},
              {"r_hi", d2b.r_hi},
              {"identity_residual", d2b.identity_residual},
              {"pass", d2b.pass},
              {"applicable", d2b.applicable}};
  nlohmann::json res = nlohmann::json::array();
  for (const ResidualEntry& r : residuals)
    res.push_back({{"theta", r.theta}, {"value", r.value}});
  j["residuals"] = res;
  j["max_residual"] = max_residual;
  j["tail"] = {{"slope", tail.slope},
               {"stderr", tail.stderr_slope},
               {"window", {tail.window_lo, tail.window_hi}},
               {"points", tail.points},
               {"applicable", tail.applicable}};
  nlohmann::json tr = nlohmann::json::array();
  for (const TransferEntry& t : transfer)
    tr.push_back({{"weight", t.weight}, {"lhs", t.lhs}, {"rhs", t.rhs}, {"pass", t.pass}});
  j["transfer"] = tr;
  j["constants"] = {{"C1", constants.c1},
                    {"C4", constants.c4},
                    {"C3", constants.c3},
                    {"z_delta0", constants.z_delta0}};
  j["overflow"] = {{"number", overflow_number}, {"mass", overflow_mass}};
  j["trajectory_checks"] = {{"b7_pass", trajectory.b7_pass},
                            {"b7_worst_slack", trajectory.b7_worst_slack},
                            {"c1_applicable", trajectory.c1_applicable},
                            {"c1_pass", trajectory.c1_pass},
                            {"mlambda_max", trajectory.mlambda_max},
                            {"c4_checked", trajectory.c4_checked},
                            {"c4_pass", trajectory.c4_pass},
                            {"mlambda_min_after", trajectory.mlambda_min_after}};
  return j;
}

SteadyReport analyze_steady(const Kernel& kernel, const Grid& grid,
                            const PairTable& table, std::span<const double> phi,
                            const SourceSpec& base_source,
                            std::span<const double> source_disc, double delta,
                            const DiagnosticsConfig& cfg,
                            const std::vector<TrajectorySample>& trajectory,
                            bool converged, int workers) {
  SteadyReport rep;
  rep.delta = delta;
  rep.converged = converged;
  const double lambda = kernel.lambda();

  ApplyResult a = apply(table, grid, phi, workers);
  rep.overflow_number = a.overflow_number;
  rep.overflow_mass = a.overflow_mass;

  const double m0 = moment(grid, phi, 0.0);
  const double ml = moment(grid, phi, lambda);
  std::vector<double> orders = {0.0, lambda, 1.0, 1.0 + lambda, 0.5 * (1.0 + lambda),
                                0.5 * (1.0 + lambda) - 0.1};
  orders.insert(orders.end(), cfg.extra_moments.begin(), cfg.extra_moments.end());
  for (double m : orders) rep.moments[fmt_g(m)] = moment(grid, phi, m);

  rep.constants = apriori_bounds(kernel, base_source);

  const bool hyp = kernel.claims_sandwich();
  const double m0_s = moment(grid, source_disc, 0.0);
  const double ml_s = moment(grid, source_disc, lambda);
  const double w_half = total_coagulation_rate(table, grid, phi, workers);
  rep.d2a = check_d2a(kernel.k1(), kernel.k2(), m0, ml, m0_s, delta, w_half,
                      a.overflow_number, cfg.sandwich_tol);
  rep.d2a.applicable = hyp;

  double d6_residual = 0.0;
  if (lambda < 1.0) {
    std::vector<double> theta_l(static_cast<std::size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i)
      theta_l[static_cast<std::size_t>(i)] = std::pow(grid.pivot(i), lambda);
    const double wf =
        weak_form(table, grid, phi, WeakTestFunction::with_constant(theta_l, 0.0), workers);
    d6_residual = std::abs(wf + ml_s - 2.0 * delta * ml) / std::max(ml_s, 1e-300);
  }
  rep.d2b = check_d2b(lambda, kernel.k1(), kernel.k2(), ml, ml_s, d6_residual,
                      cfg.sandwich_tol);
  rep.d2b.applicable = rep.d2b.applicable && hyp;

  Battery battery = default_battery(grid, lambda, cfg.battery_a);
  rep.residuals =
      stationarity_residuals(table, grid, phi, source_disc, delta, battery, workers);
  rep.max_residual = 0.0;
  for (const ResidualEntry& r : rep.residuals)
    rep.max_residual = std::max(rep.max_residual, r.value);

  rep.tail = tail_slope(grid, phi, cfg.tail_window, cfg.tail_exclude);
  rep.transfer_applicable = hyp;
  if (hyp)
    rep.transfer = weighted_transfer_check(kernel.k1(), grid, phi, source_disc, ml,
                                           cfg.transfer_slack);
  if (hyp) {
    rep.trajectory = check_trajectory(trajectory, kernel.k1(), delta,
                                      base_source.moment(0.0), rep.constants);
  } else {
    rep.trajectory.applicable = false;
  }
  return rep;
}

}  // namespace coagstat
