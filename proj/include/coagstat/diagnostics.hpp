#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "coagstat/coag_op.hpp"
#include "coagstat/evolution.hpp"
#include "coagstat/grid.hpp"
#include "coagstat/kernel.hpp"
#include "coagstat/source.hpp"

namespace coagstat {

// kappa(theta, m, sigma) = 2^{1-m} pi^2 / (3(1-m)) * 4^{(2-m)/(m+2 theta-2 sigma)},
// theta in [0,1/2], m in (0,1), sigma in [0,(m+2 theta)/2).
double kappa(double theta, double m, double sigma);

struct B3Report {
  double lhs = 0.0, rhs = 0.0, ratio = 0.0;
  bool pass = false;
};

// (int_{x>=1} x^sigma g dx)^2 <= (kappa/2) * double sum of
// [x^m + y^m - (x+y)^m](xy)^theta g g over pivots >= 1, by brute force.
B3Report b3_check(const Grid& grid, std::span<const double> g, double theta,
                  double m, double sigma);

struct AlgebraicReport {
  long samples = 0;
  long violations = 0;
  double worst_d4_lower = 0.0;  // most negative normalized margin seen
  double worst_d4_upper = 0.0;
  double worst_d5_lower = 0.0;
  double worst_d5_upper = 0.0;
  bool pass = false;
};

// Sampled verification of the subadditivity inequalities for lambda in [0,1):
//   2^l (2-2^l) (xy)^l/(x+y)^l <= x^l + y^l - (x+y)^l <= (xy)^l/(x+y)^l
//   2^{l-1} (x^l + y^l) <= (x+y)^l <= x^l + y^l
AlgebraicReport algebraic_checks(long sample_count, std::uint64_t seed);

struct AprioriConstants {
  double lambda = 0.0, k1 = 1.0, k2 = 1.0;
  double m0_s = 0.0, mlambda_s = 0.0;
  double c1 = 0.0;  // sqrt(2 M_l(S) / ((1-2^{l-1}) k1)); infinite for lambda >= 1
  double c4 = 0.0;  // sqrt(M_l(S) / (4^{1-l} k2))
  double c3 = 0.0;  // (2 k2 M_l(S))^{(1+l)/(1-l)} M_0(S)/2
  double z_delta0 = 0.0;  // lim_{delta->0} z_delta
  bool lambda_lt_one = true;

  double z_delta(double delta) const;
  double c2(double m, double mu) const;  // kappa(lambda/2, m, mu) / (2 k1)
};

AprioriConstants apriori_bounds(const Kernel& kernel, const SourceSpec& base_source);

struct SandwichReport {
  double r_lo = 0.0, r_hi = 0.0;
  double identity_residual = 0.0;
  bool pass = false;
  bool applicable = true;
};

// M_0 sandwich k1 M0 Ml <= M0(S_delta) <= k2 M0 Ml plus the exact discrete
// identity M0(S_delta) - 2 delta M0 = (1/2) sum K phi phi + overflow number.
SandwichReport check_d2a(double k1, double k2, double m0_phi, double mlambda_phi,
                         double m0_source, double delta, double coag_rate,
                         double overflow_number, double tol);

// M_lambda sandwich 2^l M_l(S_d)/k2 <= M_l(phi)^2 <= 2^{1-l} M_l(S_d)/(k1(2-2^l)).
SandwichReport check_d2b(double lambda, double k1, double k2, double mlambda_phi,
                         double mlambda_source, double d6_identity_residual,
                         double tol);

struct ResidualEntry {
  std::string theta;
  double value = 0.0;
};

struct Battery {
  struct Member {
    std::string name;
    WeakTestFunction fn;
  };
  std::vector<Member> members;
};

// Default test battery: theta == 1; min(x,A)/A; min(x^l,A^l)/A^l; 1_{(0,A)}.
Battery default_battery(const Grid& grid, double lambda,
                        const std::vector<double>& a_list);

// R(theta) = |1/2 sum chi_theta K phi phi + sum theta S_d dx - 2 delta sum theta phi dx|
//            / sum theta S_d dx  (absolute when the normalizer vanishes).
std::vector<ResidualEntry> stationarity_residuals(
    const PairTable& table, const Grid& grid, std::span<const double> phi,
    std::span<const double> source, double delta, const Battery& battery,
    int workers = 1);

struct TailFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  int points = 0;
  bool applicable = false;
};

// Least-squares slope of log phi vs log x over the top `window` decades that
// sit `exclude` decades below x_max (overflow-contaminated zone excluded).
TailFit tail_slope(const Grid& grid, std::span<const double> phi,
                   double window_decades = 1.5, double exclude_decades = 2.0);

struct TransferEntry {
  std::string weight;
  double lhs = 0.0, rhs = 0.0;
  bool pass = false;
};

// sum w S dx >= k1 M_lambda(phi) sum w phi dx for nonincreasing weights.
TransferEntry weighted_transfer(const std::string& name, double k1, const Grid& grid,
                                std::span<const double> phi,
                                std::span<const double> source,
                                std::span<const double> w, double mlambda_phi,
                                double slack);

std::vector<TransferEntry> weighted_transfer_check(double k1, const Grid& grid,
                                                   std::span<const double> phi,
                                                   std::span<const double> source,
                                                   double mlambda_phi, double slack);

struct TrajectoryCheck {
  bool applicable = true;  // requires a trusted x^lambda sandwich
  bool b7_pass = true;
  double b7_worst_slack = 0.0;
  bool c1_applicable = false;
  bool c1_pass = true;
  double mlambda_max = 0.0;
  bool c4_checked = false;
  bool c4_pass = true;
  double mlambda_min_after = 0.0;
  double transient_t = 0.0;
};

// Trajectory-wise a-priori bounds: the M_0 dissipation inequality at every
// recorded state, the M_lambda cap C1, and the M_lambda floor C4 past the
// initial transient (enforced only when z_delta >= C4).
TrajectoryCheck check_trajectory(const std::vector<TrajectorySample>& traj,
                                 double k1, double delta, double m0_s,
                                 const AprioriConstants& constants,
                                 double b7_tol_factor = 1e-6,
                                 double cap_slack = 1e-3,
                                 double floor_slack = 1e-3);

struct DiagnosticsConfig {
  double sandwich_tol = 0.02;
  double residual_tol = 1e-4;
  std::vector<double> battery_a = {1e1, 1e2, 1e3, 1e4};
  double tail_window = 1.5;
  double tail_exclude = 2.0;
  double tail_slope_tol = 0.1;
  double transfer_slack = 0.02;
  std::vector<double> extra_moments;
  std::vector<std::string> checks = {"d2a", "d2b", "residuals", "trajectory",
                                     "transfer"};

  bool enabled(const std::string& name) const;
};

struct SteadyReport {
  double delta = 0.0;
  bool converged = false;
  std::map<std::string, double> moments;
  SandwichReport d2a, d2b;
  std::vector<ResidualEntry> residuals;
  double max_residual = 0.0;
  TailFit tail;
  std::vector<TransferEntry> transfer;
  bool transfer_applicable = true;
  AprioriConstants constants;
  double overflow_number = 0.0, overflow_mass = 0.0;
  TrajectoryCheck trajectory;

  bool pass(const DiagnosticsConfig& cfg) const;
  nlohmann::json to_json() const;
};

// Full verification of a converged state against every applicable bound.
SteadyReport analyze_steady(const Kernel& kernel, const Grid& grid,
                            const PairTable& table, std::span<const double> phi,
                            const SourceSpec& base_source,
                            std::span<const double> source_disc, double delta,
                            const DiagnosticsConfig& cfg,
                            const std::vector<TrajectorySample>& trajectory,
                            bool converged, int workers = 1);

}  // namespace coagstat
