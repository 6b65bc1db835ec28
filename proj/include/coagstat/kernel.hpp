#pragma once

#include <cstdint>
#include <functional>

#include "coagstat/grid.hpp"

namespace coagstat {

enum class KernelShape { exact_sum, custom };

// Symmetric coagulation rate K(x,y) with declared bounds
//   k1 (x^lambda + y^lambda) <= K(x,y) <= k2 (x^lambda + y^lambda).
// exact_sum means K(x,y) = k (x^lambda + y^lambda) with k1 = k2 = k;
// custom kernels are black-box evaluators whose declared constants are
// trusted after sampled verification (verify_hypotheses).
class Kernel {
 public:
  static Kernel sum_power(double lambda, double k);
  static Kernel sum_power(double lambda, double k, double k1, double k2);
  static Kernel custom(double lambda, double k1, double k2,
                       std::function<double(double, double)> eval,
                       bool claims_sandwich = true);

  // Symmetric by construction: arguments are ordered before evaluation.
  double eval(double x, double y) const;

  KernelShape shape() const { return shape_; }
  double lambda() const { return lambda_; }
  double k() const { return k_; }
  double k1() const { return k1_; }
  double k2() const { return k2_; }
  // False for wrappers (e.g. two-parameter kernels) whose declared constants
  // describe the reduced problem, not a direct x^lambda + y^lambda envelope.
  bool claims_sandwich() const { return claims_sandwich_; }

 private:
  Kernel() = default;
  KernelShape shape_ = KernelShape::exact_sum;
  double lambda_ = 0.0, k_ = 1.0, k1_ = 1.0, k2_ = 1.0;
  bool claims_sandwich_ = true;
  std::function<double(double, double)> fn_;
};

// Two-parameter kernel K(x,y) = k (x^{gamma+alpha} y^{-alpha} + x^{-alpha} y^{gamma+alpha}),
// with declared bound constants k1 <= k <= k2 for the same algebraic envelope.
struct GeneralKernel {
  double gamma = 0.0;
  double alpha = 0.0;
  double k = 1.0;
  double k1 = 1.0;
  double k2 = 1.0;

  double eval(double x, double y) const;
  // Black-box wrapper; the declared lambda is the reduced exponent |gamma+2alpha|.
  Kernel as_kernel() const;
};

// Change of variables f_theta(x) = x^theta f(x), K_theta(x,y) = (xy)^{-theta} K(x,y):
// a stationary solution for K maps to one for K_theta with the same source.
struct Reduction {
  double theta = 0.0;           // min{gamma+alpha, -alpha}
  double reduced_lambda = 0.0;  // |gamma + 2 alpha|
  Kernel reduced_kernel = Kernel::sum_power(0.0, 1.0);  // exact K_theta
};

Reduction reduce_general(const GeneralKernel& g);

// Bin-wise x_i^theta * phi_i.
SizeDistribution transform_solution(std::span<const double> phi, const Grid& grid,
                                    double theta);

struct HypothesisReport {
  double lambda = 0.0, k1 = 0.0, k2 = 0.0;
  int sample_count = 0;
  std::uint64_t seed = 0;
  double min_lower_ratio = 0.0;    // min K / (k1 (x^l + y^l)), expect >= 1
  double max_upper_ratio = 0.0;    // max K / (k2 (x^l + y^l)), expect <= 1
  bool sandwich_pass = false;
  double worst_mono_violation = 0.0;  // max (K(x-y,y) - K(x,y)) / K(x,y)
  bool monotonicity_pass = false;
};

// Sampled check of the growth sandwich and of K(x-y,y) <= K(x,y),
// log-uniform over [1e-6, 1e6]^2. A violation is reported, not thrown.
HypothesisReport verify_hypotheses(const Kernel& kernel, int sample_count,
                                   std::uint64_t seed);

}  // namespace coagstat
