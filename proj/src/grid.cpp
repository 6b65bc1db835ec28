#include "coagstat/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace coagstat {

Grid Grid::geometric(double x_min, double x_max, int bins_per_decade) {
  if (!(x_min > 0.0) || !(x_max > x_min))
    throw std::domain_error("grid: require 0 < x_min < x_max");
  if (bins_per_decade < 1)
    throw std::domain_error("grid: bins_per_decade must be >= 1");

  const double decades = std::log10(x_max / x_min);
  const int n = static_cast<int>(std::ceil(bins_per_decade * decades - 1e-12));
  if (n < 1) throw std::domain_error("grid: empty range");

  Grid g;
  g.edges_.resize(static_cast<std::size_t>(n) + 1);
  const double la = std::log(x_min);
  const double lb = std::log(x_max);
  for (int i = 0; i <= n; ++i)
    g.edges_[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * i / n);
  g.edges_.front() = x_min;
  g.edges_.back() = x_max;

  g.pivots_.resize(static_cast<std::size_t>(n));
  g.widths_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double lo = g.edges_[static_cast<std::size_t>(i)];
    const double hi = g.edges_[static_cast<std::size_t>(i) + 1];
    g.pivots_[static_cast<std::size_t>(i)] = std::sqrt(lo * hi);
    g.widths_[static_cast<std::size_t>(i)] = hi - lo;
  }
  g.ratio_ = std::exp((lb - la) / n);
  return g;
}

double moment(const Grid& grid, std::span<const double> phi, double m) {
  if (static_cast<int>(phi.size()) != grid.size())
    throw std::invalid_argument("moment: phi not aligned with grid");
  double acc = 0.0;
  for (int i = 0; i < grid.size(); ++i)
    acc += std::pow(grid.pivot(i), m) * phi[static_cast<std::size_t>(i)] * grid.width(i);
  return acc;
}

}  // namespace coagstat
