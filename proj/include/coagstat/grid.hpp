#pragma once

#include <span>
#include <vector>

namespace coagstat {

// Geometric size mesh: edges e_0 < ... < e_N with constant ratio,
// pivots x_i = sqrt(e_i e_{i+1}), widths dx_i = e_{i+1} - e_i.
class Grid {
 public:
  static Grid geometric(double x_min, double x_max, int bins_per_decade);

  int size() const { return static_cast<int>(pivots_.size()); }
  double edge(int i) const { return edges_[static_cast<std::size_t>(i)]; }
  double pivot(int i) const { return pivots_[static_cast<std::size_t>(i)]; }
  double width(int i) const { return widths_[static_cast<std::size_t>(i)]; }
  double x_min() const { return edges_.front(); }
  double x_max() const { return edges_.back(); }
  double ratio() const { return ratio_; }

  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& pivots() const { return pivots_; }
  const std::vector<double>& widths() const { return widths_; }

 private:
  std::vector<double> edges_, pivots_, widths_;
  double ratio_ = 0.0;
};

// Per-bin number density (number per unit size at the pivot).
using SizeDistribution = std::vector<double>;

// Discrete moment sum_i x_i^m phi_i dx_i, fixed left-to-right summation.
double moment(const Grid& grid, std::span<const double> phi, double m);

}  // namespace coagstat
