#pragma once

#include <limits>
#include <string>
#include <vector>

#include "coagstat/coag_op.hpp"
#include "coagstat/grid.hpp"
#include "coagstat/kernel.hpp"
#include "coagstat/source.hpp"

namespace coagstat {

struct EvolveParams {
  double delta = 1e-2;       // efflux/truncation parameter, in (0,1)
  double dt_init = 1e-3;
  double dt_max = 1e12;
  double t_max = std::numeric_limits<double>::infinity();
  double steady_tol = 1e-8;  // weighted relative residual threshold
  long max_steps = 200000;
  double blowup_mlambda = std::numeric_limits<double>::infinity();
  int workers = 1;
};

struct TrajectorySample {
  double t = 0.0, dt = 0.0;
  double m0 = 0.0, mlambda = 0.0, m1 = 0.0, m1pl = 0.0;
  double dm0dt = 0.0;  // instantaneous operator derivative of M_0
  double overflow_number = 0.0, overflow_mass = 0.0;
};

struct EvolveResult {
  SizeDistribution phi;
  std::vector<TrajectorySample> trajectory;
  bool converged = false;
  bool blown_up = false;
  long steps = 0;
  double residual = 0.0;
};

// One semi-implicit update:
//   phi_i' = (phi_i + dt (gain_i + S_i)) / (1 + dt (L_i + 2 delta)),
// non-negative for every dt > 0; fixed points are exactly the discrete
// stationary states.
SizeDistribution step(const PairTable& table, const Grid& grid,
                      std::span<const double> source, std::span<const double> phi,
                      double dt, double delta, int workers = 1);

// Relaxation to steady state with adaptive dt (grow 1.2 on residual decrease,
// halve on increase). Converged when
//   max_i |RHS_i| (1 + x_i^lambda) dx_i / (M0 + M_lambda + eps) < steady_tol.
EvolveResult evolve_to_steady(const EvolveParams& params, const PairTable& table,
                              const Grid& grid, double lambda,
                              std::span<const double> source, SizeDistribution init);

struct ContinuationStage {
  double delta = 0.0;
  EvolveResult result;
  SizeDistribution source_disc;
};

struct SteadyFamily {
  std::vector<ContinuationStage> stages;
  bool complete = true;
  std::string flag;
};

// Warm-started continuation over a strictly decreasing delta list, starting
// from phi == 0 at the largest delta.
SteadyFamily delta_continuation(const std::vector<double>& deltas,
                                const PairTable& table, const Grid& grid,
                                double lambda, const SourceSpec& source,
                                const EvolveParams& base);

// Discrete counterpart of the min{x,A} identity: the transfer of
// int min(x,A) S dx into the three coagulation terms plus the overflow
// removal term. A must be a pivot value for the decomposition to be exact.
struct D7Decomposition {
  double a_value = 0.0;
  double t1 = 0.0;  // (1/2) sum over x,y < A, x+y > A of (x+y-A) K phi phi
  double t2 = 0.0;  // sum over x < A <= y of x K phi phi
  double t3 = 0.0;  // (A/2) sum over x,y >= A of K phi phi
  double t_overflow = 0.0;
  double source_term = 0.0;   // sum theta_A S dx
  double efflux_term = 0.0;   // 2 delta sum theta_A phi dx
  double residual = 0.0;      // relative defect of the identity
};
D7Decomposition d7_decomposition(const PairTable& table, const Grid& grid,
                                 std::span<const double> phi,
                                 std::span<const double> source, double delta,
                                 int a_pivot_index);

enum class ProbeVerdict { exists, nonexistent, inconclusive };

struct ProbePoint {
  double x_max = 0.0;
  double delta = 0.0;
  double mlambda = 0.0;
  bool converged = false;
  D7Decomposition d7;
};

struct ProbeReport {
  ProbeVerdict verdict = ProbeVerdict::inconclusive;
  std::vector<ProbePoint> points;
  std::vector<double> growth_per_decade;
  std::string note;
};

struct ProbeConfig {
  std::vector<double> x_max_ladder;  // increasing
  std::vector<double> deltas;        // strictly decreasing
  double x_min = 0.5;
  int bins_per_decade = 16;
  double growth_threshold = 5.0;  // per decade of x_max
  double saturation_band = 0.10;  // EXISTS when top-two-decade variation <= band
  EvolveParams base;
};

// Domain-ladder dichotomy: M_lambda of the smallest-delta steady state as a
// function of x_max. Unbounded growth signals that no stationary solution
// survives the truncation removal.
ProbeReport nonexistence_probe(const Kernel& kernel, const SourceSpec& source,
                               const ProbeConfig& config);

}  // namespace coagstat
