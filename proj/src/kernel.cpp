#include "coagstat/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "coagstat/rng.hpp"

namespace coagstat {

namespace {
void check_declared(double lambda, double k1, double k2) {
  if (!(lambda >= 0.0)) throw std::domain_error("kernel: lambda must be >= 0");
  if (!(k1 > 0.0)) throw std::domain_error("kernel: k1 must be > 0");
  if (!(k2 >= k1)) throw std::domain_error("kernel: require k1 <= k2");
}
}  // namespace

Kernel Kernel::sum_power(double lambda, double k) {
  return sum_power(lambda, k, k, k);
}

Kernel Kernel::sum_power(double lambda, double k, double k1, double k2) {
  check_declared(lambda, k1, k2);
  if (!(k1 <= k && k <= k2))
    throw std::domain_error("kernel: require k1 <= k <= k2");
  Kernel out;
  out.shape_ = KernelShape::exact_sum;
  out.lambda_ = lambda;
  out.k_ = k;
  out.k1_ = k1;
  out.k2_ = k2;
  return out;
}

Kernel Kernel::custom(double lambda, double k1, double k2,
                      std::function<double(double, double)> eval,
                      bool claims_sandwich) {
  check_declared(lambda, k1, k2);
  Kernel out;
  out.shape_ = KernelShape::custom;
  out.lambda_ = lambda;
  out.k_ = 0.5 * (k1 + k2);
  out.k1_ = k1;
  out.k2_ = k2;
  out.claims_sandwich_ = claims_sandwich;
  out.fn_ = std::move(eval);
  return out;
}

double Kernel::eval(double x, double y) const {
  if (!(x > 0.0) || !(y > 0.0))
    throw std::domain_error("kernel: sizes must be positive");
  // Ordering the arguments makes eval(x,y) == eval(y,x) bit-exact for any shape.
  const double lo = std::min(x, y);
  const double hi = std::max(x, y);
  if (shape_ == KernelShape::exact_sum)
    return k_ * (std::pow(lo, lambda_) + std::pow(hi, lambda_));
  return fn_(lo, hi);
}

double GeneralKernel::eval(double x, double y) const {
  if (!(x > 0.0) || !(y > 0.0))
    throw std::domain_error("kernel: sizes must be positive");
  const double lo = std::min(x, y);
  const double hi = std::max(x, y);
  const double ga = gamma + alpha;
  const double na = -alpha;
  return k * (std::pow(lo, ga) * std::pow(hi, na) + std::pow(lo, na) * std::pow(hi, ga));
}

Kernel GeneralKernel::as_kernel() const {
  GeneralKernel copy = *this;
  return Kernel::custom(std::abs(gamma + 2.0 * alpha), k1, k2,
                        [copy](double x, double y) { return copy.eval(x, y); },
                        /*claims_sandwich=*/false);
}

Reduction reduce_general(const GeneralKernel& g) {
  Reduction r;
  const double ga = g.gamma + g.alpha;
  const double na = -g.alpha;
  r.theta = std::min(ga, na);
  r.reduced_lambda = std::abs(g.gamma + 2.0 * g.alpha);
  // (xy)^{-theta} K(x,y) collapses to an exact sum kernel with the same k.
  r.reduced_kernel = Kernel::sum_power(r.reduced_lambda, g.k, g.k1, g.k2);
  return r;
}

SizeDistribution transform_solution(std::span<const double> phi, const Grid& grid,
                                    double theta) {
  if (static_cast<int>(phi.size()) != grid.size())
    throw std::invalid_argument("transform_solution: phi not aligned with grid");
  SizeDistribution out(phi.size());
  for (int i = 0; i < grid.size(); ++i)
    out[static_cast<std::size_t>(i)] =
        std::pow(grid.pivot(i), theta) * phi[static_cast<std::size_t>(i)];
  return out;
}

HypothesisReport verify_hypotheses(const Kernel& kernel, int sample_count,
                                   std::uint64_t seed) {
  if (sample_count < 1)
    throw std::domain_error("verify_hypotheses: sample_count must be >= 1");

  HypothesisReport rep;
  rep.lambda = kernel.lambda();
  rep.k1 = kernel.k1();
  rep.k2 = kernel.k2();
  rep.sample_count = sample_count;
  rep.seed = seed;

  Rng rng(seed);
  const double lo = 1e-6, hi = 1e6;
  double min_lower = std::numeric_limits<double>::infinity();
  double max_upper = -std::numeric_limits<double>::infinity();
  double worst_mono = -std::numeric_limits<double>::infinity();

  for (int s = 0; s < sample_count; ++s) {
    const double x = rng.log_uniform(lo, hi);
    const double y = rng.log_uniform(lo, hi);
    const double kv = kernel.eval(x, y);
    const double a = std::min(x, y);
    const double b = std::max(x, y);
    const double env = std::pow(a, kernel.lambda()) + std::pow(b, kernel.lambda());
    min_lower = std::min(min_lower, kv / (kernel.k1() * env));
    max_upper = std::max(max_upper, kv / (kernel.k2() * env));

    // Monotonicity sample on 0 < y <= x, skipping degenerate x == y.
    if (b > a) {
      const double diff = b - a;
      if (diff > 0.0) {
        const double kl = kernel.eval(diff, a);
        worst_mono = std::max(worst_mono, (kl - kernel.eval(b, a)) / kernel.eval(b, a));
      }
    }
  }

  rep.min_lower_ratio = min_lower;
  rep.max_upper_ratio = max_upper;
  const double fp_slack = 1e-12;
  rep.sandwich_pass = (min_lower >= 1.0 - fp_slack) && (max_upper <= 1.0 + fp_slack);
  rep.worst_mono_violation = worst_mono;
  rep.monotonicity_pass = worst_mono <= fp_slack;
  return rep;
}

}  // namespace coagstat
