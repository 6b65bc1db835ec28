#pragma once

#include <limits>
#include <string>

#include "coagstat/grid.hpp"

namespace coagstat {

enum class SourceFamily { indicator, power_bump, power_expcut };

// Parametric source term S(x) with analytic moments, plus the truncation
// S_delta = S * 1_{(0,1/delta)} used by the regularized evolution.
class SourceSpec {
 public:
  // Constant c on [a, b].
  static SourceSpec indicator(double c, double a, double b);
  // c x^{-p} on [a, b].
  static SourceSpec power_bump(double c, double a, double b, double p);
  // c x^{-p} exp(-x/x_c) on (0, inf), p < 1.
  static SourceSpec power_expcut(double c, double p, double x_c);

  // Same source with truncation S * 1_{(0,1/delta)}, delta in (0,1).
  SourceSpec truncated(double delta) const;

  // Pointwise S_delta(x); domain error for x <= 0.
  double eval(double x) const;

  // Analytic M_m = int x^m S_delta(x) dx; throws on divergent combinations.
  double moment(double m) const;

  // Exact bin mean over [lo, hi].
  double bin_average(double lo, double hi) const;

  // Bin-averaged values on a grid. Preserves M_0 exactly by construction.
  SizeDistribution discretize(const Grid& grid) const;

  SourceFamily family() const { return family_; }
  bool truncation() const { return delta_ > 0.0; }
  double delta() const { return delta_; }
  double cutoff() const {
    return delta_ > 0.0 ? 1.0 / delta_ : std::numeric_limits<double>::infinity();
  }
  double c() const { return c_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double p() const { return p_; }
  double x_c() const { return xc_; }

  // Finite M_m for every m in [0,1): required by existence runs.
  bool all_small_moments_finite() const;

  std::string describe() const;

 private:
  SourceSpec() = default;
  // int_{lo}^{hi} x^m S_delta(x) dx over the support intersection.
  double piece_integral(double lo, double hi, double m) const;

  SourceFamily family_ = SourceFamily::indicator;
  double c_ = 1.0, a_ = 1.0, b_ = 2.0, p_ = 0.0, xc_ = 1.0;
  double delta_ = 0.0;  // 0 means no truncation
};

}  // namespace coagstat
