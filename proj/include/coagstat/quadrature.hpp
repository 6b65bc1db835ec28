#pragma once

#include <functional>

namespace coagstat {

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod (G7/K15) integration with interval bisection.
// The rule never evaluates the endpoints, so integrable endpoint
// singularities are handled by refinement.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-8, double abs_tol = 0.0,
                     int max_intervals = 4000);

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gammp(double a, double x);

}  // namespace coagstat
