#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "coagstat/quadrature.hpp"
#include "coagstat/source.hpp"

using namespace coagstat;

namespace {

// independent oracle: adaptive Simpson, no shared code with source internals
double simpson(const std::function<double(double)>& f, double a, double b, int depth,
               double fa, double fm, double fb, double whole) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 1e-12 * std::abs(left + right))
    return left + right;
  return simpson(f, a, m, depth - 1, fa, flm, fm, left) +
         simpson(f, m, b, depth - 1, fm, frm, fb, right);
}

double simpson_integrate(const std::function<double(double)>& f, double a, double b) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, 40, fa, fm, fb, whole);
}

}  // namespace

TEST_CASE("source_eval: spot values") {
  SourceSpec ind = SourceSpec::indicator(1.0, 1.0, 2.0);
  CHECK(ind.eval(1.5) == 1.0);
  CHECK(ind.eval(0.5) == 0.0);
  CHECK(ind.eval(2.5) == 0.0);

  SourceSpec trunc = ind.truncated(0.6);  // support cut at 1/0.6 = 1.666...
  CHECK(trunc.eval(1.8) == 0.0);
  CHECK(trunc.eval(1.5) == 1.0);

  SourceSpec exp = SourceSpec::power_expcut(1.0, 0.0, 1.0);
  CHECK(exp.eval(2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));

  CHECK_THROWS_AS(ind.eval(0.0), std::domain_error);
  CHECK_THROWS_AS(ind.eval(-1.0), std::domain_error);
}

TEST_CASE("source_moment: indicator closed forms") {
  SourceSpec ind = SourceSpec::indicator(1.0, 1.0, 2.0);
  CHECK(ind.moment(0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ind.moment(1.0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(ind.moment(-1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-13));
}

namespace {

// int_0^R c x^q e^{-x/xc} dx with the substitution x = u^s, s = 2/(1+q),
// which removes the endpoint singularity for q in (-1, 0].
double expcut_oracle(double c, double q, double xc, double upper) {
  const double s = 2.0 / (1.0 + q);
  auto g = [&](double u) {
    const double x = std::pow(u, s);
    return c * s * std::pow(u, s * (1.0 + q) - 1.0) * std::exp(-x / xc);
  };
  return simpson_integrate(g, 0.0, std::pow(upper, 1.0 / s));
}

}  // namespace

TEST_CASE("source_moment: expcut against quadrature oracle") {
  SourceSpec exp = SourceSpec::power_expcut(1.0, 0.0, 1.0);
  CHECK(exp.moment(1.0) == doctest::Approx(1.0).epsilon(1e-10));  // Gamma(2) = 1

  // quadrature oracle for several (p, x_c, m)
  for (double p : {0.0, 0.25, 0.8}) {
    for (double xc : {0.5, 2.0}) {
      SourceSpec s = SourceSpec::power_expcut(1.3, p, xc);
      for (double m : {0.0, 0.5, 1.0, 1.7}) {
        const double oracle = expcut_oracle(1.3, m - p, xc, xc * 80.0);
        CHECK(s.moment(m) == doctest::Approx(oracle).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("source_moment: truncated expcut against quadrature oracle") {
  SourceSpec s = SourceSpec::power_expcut(1.0, 0.25, 2.0).truncated(0.2);
  const double oracle = expcut_oracle(1.0, 0.5 - 0.25, 2.0, 5.0);
  CHECK(s.moment(0.5) == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("source_moment: divergence error") {
  SourceSpec s = SourceSpec::power_expcut(1.0, 0.5, 1.0);
  CHECK_THROWS_AS(s.moment(-0.5), std::domain_error);   // m = p - 1
  CHECK_THROWS_AS(s.moment(-0.75), std::domain_error);  // m < p - 1
  CHECK_NOTHROW(s.moment(-0.49));
}

TEST_CASE("truncation: monotone in delta and convergent") {
  std::vector<SourceSpec> sources = {SourceSpec::indicator(1.0, 1.0, 2.0),
                                     SourceSpec::power_bump(2.0, 0.5, 8.0, 0.5),
                                     SourceSpec::power_expcut(1.0, 0.25, 2.0)};
  const std::vector<double> deltas = {0.5, 0.2, 0.1, 0.05, 0.01, 1e-3, 1e-5};
  for (const SourceSpec& s : sources) {
    for (double m : {0.0, 0.4, 1.0}) {
      const double full = s.moment(m);
      double prev = 0.0;
      for (double d : deltas) {
        const double v = s.truncated(d).moment(m);
        CHECK(v <= full * (1.0 + 1e-12));
        CHECK(v >= prev * (1.0 - 1e-12));
        prev = v;
      }
      CHECK(prev == doctest::Approx(full).epsilon(1e-8));
    }
  }
}

TEST_CASE("truncation: crude bound M1(S_delta) <= M_lambda(S)/delta^(1-lambda)") {
  std::vector<SourceSpec> sources = {SourceSpec::indicator(1.0, 1.0, 2.0),
                                     SourceSpec::power_bump(2.0, 0.5, 8.0, 0.5),
                                     SourceSpec::power_expcut(1.0, 0.25, 2.0)};
  for (const SourceSpec& s : sources)
    for (double lambda : {0.0, 0.3, 0.5, 0.7})
      for (double d : {0.5, 0.1, 0.01, 1e-3}) {
        const double lhs = s.truncated(d).moment(1.0);
        const double rhs = s.moment(lambda) / std::pow(d, 1.0 - lambda);
        CHECK(lhs <= rhs * (1.0 + 1e-12));
      }
}

TEST_CASE("discretize: bin averages carry the exact source mass on the grid span") {
  Grid g = Grid::geometric(1e-2, 1e3, 16);
  std::vector<SourceSpec> sources = {SourceSpec::indicator(1.0, 1.0, 2.0).truncated(0.01),
                                     SourceSpec::power_bump(2.0, 0.5, 8.0, 0.5),
                                     SourceSpec::power_expcut(1.0, 0.25, 2.0).truncated(0.05)};
  for (const SourceSpec& s : sources) {
    SizeDistribution vals = s.discretize(g);
    double m0 = 0.0;
    for (int i = 0; i < g.size(); ++i) m0 += vals[static_cast<std::size_t>(i)] * g.width(i);
    const double span_mass = s.bin_average(g.x_min(), g.x_max()) * (g.x_max() - g.x_min());
    CHECK(m0 == doctest::Approx(span_mass).epsilon(1e-10));
  }
  // compact support inside the grid: the full M0 is preserved
  SourceSpec ind = SourceSpec::indicator(1.0, 1.0, 2.0);
  SizeDistribution vals = ind.discretize(g);
  double m0 = 0.0;
  for (int i = 0; i < g.size(); ++i) m0 += vals[static_cast<std::size_t>(i)] * g.width(i);
  CHECK(m0 == doctest::Approx(ind.moment(0.0)).epsilon(1e-12));
}

TEST_CASE("gammp path agrees with the generic adaptive integrator") {
  for (double a : {0.3, 1.0, 2.5, 7.0}) {
    for (double x : {0.1, 1.0, 3.0, 20.0}) {
      auto f = [a](double t) { return std::pow(t, a - 1.0) * std::exp(-t); };
      QuadResult q = integrate(f, 0.0, x, 1e-12);
      REQUIRE(q.converged);
      CHECK(gammp(a, x) == doctest::Approx(q.value / std::tgamma(a)).epsilon(1e-9));
    }
  }
}

TEST_CASE("source construction guards") {
  CHECK_THROWS_AS(SourceSpec::indicator(1.0, 2.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(SourceSpec::indicator(-1.0, 1.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(SourceSpec::power_expcut(1.0, 1.0, 1.0), std::domain_error);  // p < 1
  CHECK_THROWS_AS(SourceSpec::indicator(1.0, 1.0, 2.0).truncated(1.5), std::domain_error);
  CHECK_THROWS_AS(SourceSpec::indicator(1.0, 1.0, 2.0).truncated(0.0), std::domain_error);
}
