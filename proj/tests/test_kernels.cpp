#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "coagstat/kernel.hpp"
#include "coagstat/rng.hpp"

using namespace coagstat;

TEST_CASE("eval: spot values") {
  CHECK(Kernel::sum_power(0.0, 1.0).eval(1.0, 1.0) == 2.0);
  CHECK(Kernel::sum_power(0.5, 1.0).eval(4.0, 9.0) == doctest::Approx(5.0).epsilon(1e-15));
  GeneralKernel gk{-0.5, 0.25, 1.0, 1.0, 1.0};
  CHECK(gk.eval(1.0, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("eval: domain errors") {
  Kernel k = Kernel::sum_power(0.5, 1.0);
  CHECK_THROWS_AS(k.eval(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(k.eval(1.0, -2.0), std::domain_error);
}

TEST_CASE("eval: bit-exact symmetry over 1e6 log-uniform pairs") {
  std::vector<Kernel> kernels;
  kernels.push_back(Kernel::sum_power(0.5, 1.3));
  kernels.push_back(GeneralKernel{-0.5, 0.25, 2.0, 2.0, 2.0}.as_kernel());
  kernels.push_back(Kernel::custom(0.5, 0.5, 1.5, [](double x, double y) {
    return (std::pow(x, 0.5) + std::pow(y, 0.5)) * (1.0 + 0.5 * std::sin(x * y));
  }));
  for (const Kernel& k : kernels) {
    Rng rng(11);
    int bad = 0;
    const int samples = k.shape() == KernelShape::custom ? 1000000 : 1000000;
    for (int s = 0; s < samples; ++s) {
      const double x = rng.log_uniform(1e-6, 1e6);
      const double y = rng.log_uniform(1e-6, 1e6);
      if (k.eval(x, y) != k.eval(y, x)) ++bad;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("reduce_general: identity and the two spec points") {
  Reduction r0 = reduce_general(GeneralKernel{0.0, 0.0, 1.0, 1.0, 1.0});
  CHECK(r0.theta == 0.0);
  CHECK(r0.reduced_lambda == 0.0);

  Reduction ra = reduce_general(GeneralKernel{-0.5, 0.25, 1.0, 1.0, 1.0});
  CHECK(ra.theta == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(ra.reduced_lambda == doctest::Approx(0.0).epsilon(1e-15));

  Reduction rb = reduce_general(GeneralKernel{0.5, -0.25, 1.0, 1.0, 1.0});
  CHECK(rb.theta == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(rb.reduced_lambda == doctest::Approx(0.0).epsilon(1e-15));
}

// oracle: K_theta(x,y) * (xy)^theta must reproduce K(x,y)
static void check_reduction_consistency(const GeneralKernel& gk, int samples,
                                        double tol) {
  Reduction red = reduce_general(gk);
  Rng rng(23);
  for (int s = 0; s < samples; ++s) {
    const double x = rng.log_uniform(1e-4, 1e4);
    const double y = rng.log_uniform(1e-4, 1e4);
    const double back = red.reduced_kernel.eval(x, y) * std::pow(x * y, red.theta);
    const double orig = gk.eval(x, y);
    CHECK(std::abs(back - orig) <= tol * orig);
  }
}

TEST_CASE("reduce_general: round trip at 100 random points") {
  check_reduction_consistency(GeneralKernel{-0.5, 0.25, 1.0, 1.0, 1.0}, 100, 1e-13);
  check_reduction_consistency(GeneralKernel{0.5, -0.25, 1.0, 1.0, 1.0}, 100, 1e-13);
}

TEST_CASE("reduce_general: consistency within 1e-12 over 1e4 samples") {
  check_reduction_consistency(GeneralKernel{0.3, -0.4, 1.7, 1.7, 1.7}, 10000, 1e-12);
  check_reduction_consistency(GeneralKernel{-0.2, 0.55, 0.8, 0.8, 0.8}, 10000, 1e-12);
}

TEST_CASE("transform_solution") {
  Grid g = Grid::geometric(2.0, 8.0, 1);  // single bin, pivot 4
  REQUIRE(g.size() == 1);
  REQUIRE(g.pivot(0) == doctest::Approx(4.0).epsilon(1e-14));
  SizeDistribution phi = {1.0};

  SizeDistribution same = transform_solution(phi, g, 0.0);
  CHECK(same[0] == phi[0]);

  SizeDistribution half = transform_solution(phi, g, 0.5);
  CHECK(half[0] == doctest::Approx(2.0).epsilon(1e-14));

  SizeDistribution neg = transform_solution(phi, g, -0.5);
  CHECK(neg[0] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("verify_hypotheses: exact sum kernel has ratio extremes exactly 1") {
  for (double lambda : {0.0, 0.3, 0.7, 1.2}) {
    HypothesisReport rep = verify_hypotheses(Kernel::sum_power(lambda, 1.7), 20000, 3);
    CHECK(rep.min_lower_ratio == 1.0);
    CHECK(rep.max_upper_ratio == 1.0);
    CHECK(rep.sandwich_pass);
    CHECK(rep.monotonicity_pass);
  }
}

TEST_CASE("verify_hypotheses: sine-modulated kernel stays inside declared bounds") {
  Kernel k = Kernel::custom(0.5, 0.5, 1.5, [](double x, double y) {
    return (std::pow(x, 0.5) + std::pow(y, 0.5)) * (1.0 + 0.5 * std::sin(x * y));
  });
  HypothesisReport rep = verify_hypotheses(k, 50000, 5);
  CHECK(rep.sandwich_pass);
  CHECK(rep.min_lower_ratio >= 1.0 - 1e-12);
  CHECK(rep.max_upper_ratio <= 1.0 + 1e-12);
}

TEST_CASE("monotonicity spot: K(x-y,y) <= K(x,y) at (2,1) for gamma=0, alpha=1/2") {
  GeneralKernel gk{0.0, 0.5, 1.0, 1.0, 1.0};
  const double k_left = gk.eval(1.0, 1.0);
  const double k_right = gk.eval(2.0, 1.0);
  CHECK(k_left == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(k_right == doctest::Approx(std::sqrt(2.0) + std::sqrt(0.5)).epsilon(1e-14));
  CHECK(k_left <= k_right);
}

TEST_CASE("verify_hypotheses: monotonicity violations are reported, not thrown") {
  // gamma=0, alpha=1/2 violates K(x-y,y) <= K(x,y) as y -> x.
  HypothesisReport rep =
      verify_hypotheses(GeneralKernel{0.0, 0.5, 1.0, 1.0, 1.0}.as_kernel(), 50000, 7);
  CHECK(rep.worst_mono_violation > 0.0);
  CHECK_FALSE(rep.monotonicity_pass);
}
