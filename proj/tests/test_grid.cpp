#include <doctest.h>


#include <stdexcept>
#include <cmath>

#include "coagstat/grid.hpp"
#include "coagstat/rng.hpp"

using namespace coagstat;

TEST_CASE("geometric grid: single decade") {
  Grid g = Grid::geometric(1.0, 10.0, 1);
  REQUIRE(g.size() == 1);
  CHECK(g.edge(0) == 1.0);
  CHECK(g.edge(1) == 10.0);
  CHECK(g.pivot(0) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-15));
}

TEST_CASE("geometric grid: two decades") {
  Grid g = Grid::geometric(1.0, 100.0, 1);
  REQUIRE(g.size() == 2);
  CHECK(g.edge(1) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(g.pivot(0) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-14));
  CHECK(g.pivot(1) == doctest::Approx(std::sqrt(1000.0)).epsilon(1e-14));
}

TEST_CASE("geometric grid: default domain bin count and ratio") {
  Grid g = Grid::geometric(1e-3, 1e6, 16);
  // independent recount: ceil(16 * log10(1e6/1e-3)) = ceil(16 * 9)
  const int n_expected = static_cast<int>(std::ceil(16.0 * 9.0));
  REQUIRE(g.size() == n_expected);
  REQUIRE(g.size() == 144);
  const double r_expected = std::pow(10.0, 1.0 / 16.0);
  CHECK(g.ratio() == doctest::Approx(r_expected).epsilon(1e-13));
  for (int i = 0; i < g.size(); ++i) {
    CHECK(std::abs(g.edge(i + 1) / g.edge(i) / r_expected - 1.0) < 1e-12);
    CHECK(g.pivot(i) > g.edge(i));
    CHECK(g.pivot(i) < g.edge(i + 1));
  }
  CHECK(g.edge(0) == 1e-3);
  CHECK(g.edge(g.size()) == 1e6);
}

TEST_CASE("geometric grid: invalid ranges") {
  CHECK_THROWS_AS(Grid::geometric(-1.0, 10.0, 4), std::domain_error);
  CHECK_THROWS_AS(Grid::geometric(10.0, 1.0, 4), std::domain_error);
  CHECK_THROWS_AS(Grid::geometric(1.0, 10.0, 0), std::domain_error);
}

TEST_CASE("moment: zero distribution") {
  Grid g = Grid::geometric(1.0, 1e4, 8);
  SizeDistribution phi(static_cast<std::size_t>(g.size()), 0.0);
  for (double m : {0.0, 0.5, 1.0, 2.0}) CHECK(moment(g, phi, m) == 0.0);
}

TEST_CASE("moment: single bin with pivot 2 and width 1") {
  // pivot sqrt(e0 e1) = 2 and width e1 - e0 = 1: e0 = (sqrt(17)-1)/2.
  const double e0 = 0.5 * (std::sqrt(17.0) - 1.0);
  const double e1 = e0 + 1.0;
  Grid g = Grid::geometric(e0, e1, 1);
  REQUIRE(g.size() == 1);
  REQUIRE(g.pivot(0) == doctest::Approx(2.0).epsilon(1e-14));
  REQUIRE(g.width(0) == doctest::Approx(1.0).epsilon(1e-14));
  SizeDistribution phi = {3.0};
  CHECK(moment(g, phi, 2.0) == doctest::Approx(12.0).epsilon(1e-13));
}

TEST_CASE("moment: x^-2 against the analytic integral") {
  Grid g = Grid::geometric(1.0, 1e4, 64);
  SizeDistribution phi(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i)
    phi[static_cast<std::size_t>(i)] = std::pow(g.pivot(i), -2.0);
  const double got = moment(g, phi, 1.0);
  CHECK(std::abs(got - std::log(1e4)) / std::log(1e4) < 0.01);
}

TEST_CASE("moment: linearity, monotonicity, exact scaling by powers of two") {
  Grid g = Grid::geometric(1e-2, 1e3, 6);
  Rng rng(7);
  const std::size_t n = static_cast<std::size_t>(g.size());
  SizeDistribution a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.uniform01();
    b[i] = a[i] + rng.uniform01();  // b >= a pointwise
  }
  for (double m : {0.0, 0.7, 1.3}) {
    CHECK(moment(g, a, m) <= moment(g, b, m));
    SizeDistribution sum(n);
    for (std::size_t i = 0; i < n; ++i) sum[i] = a[i] + b[i];
    CHECK(moment(g, sum, m) ==
          doctest::Approx(moment(g, a, m) + moment(g, b, m)).epsilon(1e-13));

    SizeDistribution scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = 8.0 * a[i];
    CHECK(moment(g, scaled, m) == 8.0 * moment(g, a, m));  // exact: power of two
  }

  // moment(.,0) is the total particle number
  double number = 0.0;
  for (std::size_t i = 0; i < n; ++i) number += a[i] * g.width(static_cast<int>(i));
  CHECK(moment(g, a, 0.0) == doctest::Approx(number).epsilon(1e-15));
}
