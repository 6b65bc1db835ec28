#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "coagstat/grid.hpp"
#include "coagstat/kernel.hpp"

namespace coagstat {

// Precomputed pair data for the fixed-pivot operator. Each unordered bin pair
// (i, j), j <= i, either splits its coalesced size x_i + x_j between two
// neighboring pivots (number- and mass-conserving) or is marked overflow when
// the sum exceeds the largest pivot.
struct PairTable {
  struct Entry {
    std::int32_t i = 0, j = 0;   // j <= i
    std::int32_t target = -1;    // split between pivots target, target+1; -1 = overflow
    double w_lo = 0.0, w_hi = 0.0;
    double rate = 0.0;           // K(x_i, x_j)
    double sum_size = 0.0;       // x_i + x_j
  };
  int n = 0;
  std::vector<Entry> entries;
};

PairTable build_pair_table(const Kernel& kernel, const Grid& grid);

struct ApplyResult {
  SizeDistribution dphi;       // gain - loss, per unit size
  SizeDistribution gain;       // per unit size, >= 0
  SizeDistribution loss_rate;  // L_i = sum_j K_ij phi_j dx_j
  double overflow_number = 0.0;
  double overflow_mass = 0.0;
};

// Discrete coagulation operator. Partial sums are accumulated over fixed
// entry chunks and merged in chunk order, so results are bit-identical for
// any worker count.
ApplyResult apply(const PairTable& table, const Grid& grid,
                  std::span<const double> phi, int workers = 1);

// Bounded test vector theta given at pivots. The value at a coalesced size is
// the splitting interpolation w_lo theta_k + w_hi theta_{k+1}; overflow pairs
// get overflow_value(x_i + x_j).
struct WeakTestFunction {
  std::vector<double> values;
  std::function<double(double)> overflow_value;

  static WeakTestFunction with_constant(std::vector<double> v, double boundary);
  static WeakTestFunction with_sum_size(std::vector<double> v);
};

// (1/2) sum_{i,j} chi_theta(x_i, x_j) K_ij phi_i phi_j dx_i dx_j.
double weak_form(const PairTable& table, const Grid& grid,
                 std::span<const double> phi, const WeakTestFunction& theta,
                 int workers = 1);

// sum over ordered pairs (1/2) sum_{i,j} K_ij phi_i phi_j dx_i dx_j,
// all pairs including overflow ones.
double total_coagulation_rate(const PairTable& table, const Grid& grid,
                              std::span<const double> phi, int workers = 1);

// theta-weighted removal by overflow pairs:
// (1/2) sum_{overflow} (theta_i + theta_j) K_ij phi_i phi_j dx_i dx_j.
double overflow_weighted(const PairTable& table, const Grid& grid,
                         std::span<const double> phi,
                         std::span<const double> theta);

}  // namespace coagstat
