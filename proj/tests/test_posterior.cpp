#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "susc/posterior.hpp"
#include "support/oracles.hpp"

using namespace susc;

namespace {
WPoly w_power(int dim, int coord, int p) {
  MultiIndex e(dim, 0);
  e[coord] = p;
  return WPoly::monomial(e, 1.0);
}
}  // namespace

TEST_CASE("normalization: expectation of 1 is 1") {
  ModelFamily m = make_monomial_gaussian({1}, {0}, Box::unit(1));
  QuadratureBackend be(TemperedPosteriorSpec::population(m, 100.0));
  CHECK(be.expect_poly(Submanifold::full(), WPoly::constant(1, 1.0)) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(be.expect([](const std::vector<double>&) { return 1.0; }) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Gamma-integral oracle: E[w] for the standard-form 1D family") {
  // loss_scale 1 so the posterior density is exp(-nbeta w^2) on [0,1]
  ModelFamily m = make_monomial_gaussian({1}, {0}, Box::unit(1), 1.0);
  const double a = 100.0;
  QuadratureBackend be(TemperedPosteriorSpec::population(m, a));
  double ew = be.expect_poly(Submanifold::full(), w_power(1, 0, 1));
  // exact truncated-to-[0,1] value
  double num = (1.0 - std::exp(-a)) / (2.0 * a);
  double den = std::sqrt(M_PI) / (2.0 * std::sqrt(a)) * std::erf(std::sqrt(a));
  CHECK(ew == Catch::Approx(num / den).epsilon(1e-9));
  CHECK(ew == Catch::Approx(1.0 / std::sqrt(M_PI) / std::sqrt(a)).epsilon(0.02));  // ~ 0.05642

  double ek = be.expect_poly(Submanifold::full(), m.loss_poly());
  CHECK(ek >= 0.0);
}

TEST_CASE("partition function behavior in nbeta") {
  ModelFamily m = make_monomial_gaussian({1}, {0}, Box::unit(1), 1.0);
  QuadratureBackend zero(TemperedPosteriorSpec::population(m, 0.0));
  CHECK(zero.partition_function() == Catch::Approx(1.0).epsilon(1e-12));

  double prev = 2.0;
  for (double nb : {1.0, 10.0, 100.0, 1000.0}) {
    QuadratureBackend be(TemperedPosteriorSpec::population(m, nb));
    double z = be.partition_function();
    CHECK(z < prev);
    prev = z;
  }
  QuadratureBackend be(TemperedPosteriorSpec::population(m, 1000.0));
  CHECK(be.partition_function() ==
        Catch::Approx(std::sqrt(M_PI / 1000.0) / 2.0 * std::erf(std::sqrt(1000.0))).epsilon(1e-10));
}

TEST_CASE("population posterior depends only on the product n*beta") {
  ModelFamily m = make_monomial_gaussian({2}, {1}, Box::unit(1));
  TemperedPosteriorSpec s1;
  s1.model = &m;
  s1.n = 10.0;
  s1.beta = 50.0;
  TemperedPosteriorSpec s2;
  s2.model = &m;
  s2.n = 500.0;
  s2.beta = 1.0;
  QuadratureBackend b1(s1), b2(s2);
  double e1 = b1.expect_poly(Submanifold::full(), w_power(1, 0, 2));
  double e2 = b2.expect_poly(Submanifold::full(), w_power(1, 0, 2));
  CHECK(e1 == Catch::Approx(e2).epsilon(1e-12));
}

TEST_CASE("doubling quadrature resolution moves expectations by <= 1e-8 relative") {
  ModelFamily m = make_monomial_gaussian({2}, {1}, Box::unit(1));
  for (double nb : {10.0, 1e3, 1e5}) {
    QuadratureConfig base;
    QuadratureConfig fine;
    fine.nodes = 2 * base.nodes;
    fine.refine_depth = 2 * base.refine_depth;
    QuadratureBackend b0(TemperedPosteriorSpec::population(m, nb), base);
    QuadratureBackend b1(TemperedPosteriorSpec::population(m, nb), fine);
    double e0 = b0.expect_poly(Submanifold::full(), w_power(1, 0, 1));
    double e1 = b1.expect_poly(Submanifold::full(), w_power(1, 0, 1));
    CHECK(std::abs(e0 - e1) <= 1e-8 * std::abs(e1));
  }
}

TEST_CASE("2D expectation agrees with a brute-force midpoint oracle") {
  ModelFamily m = make_monomial_gaussian({1, 2}, {0, 0}, Box::unit(2), 1.0);
  const double nb = 50.0;
  QuadratureBackend be(TemperedPosteriorSpec::population(m, nb));
  double ew1 = be.expect_poly(Submanifold::full(), w_power(2, 0, 1));

  const int N = 2000;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < N; ++i) {
    double w1 = (i + 0.5) / N;
    for (int j = 0; j < N; ++j) {
      double w2 = (j + 0.5) / N;
      double wgt = std::exp(-nb * w1 * w1 * std::pow(w2, 4));
      num += w1 * wgt;
      den += wgt;
    }
  }
  CHECK(ew1 == Catch::Approx(num / den).epsilon(1e-5));
}

TEST_CASE("restricted expectation on S = W reduces to the full expectation") {
  ModelFamily m = make_monomial_gaussian({1, 2}, {0, 1}, Box::unit(2));
  QuadratureBackend be(TemperedPosteriorSpec::population(m, 200.0));
  double full = be.expect_poly(Submanifold::full(), w_power(2, 1, 2));
  double sub = be.expect_poly(Submanifold::slice({}), w_power(2, 1, 2));
  CHECK(full == sub);
}

TEST_CASE("slice expectations match an equivalent rescaled 1D model") {
  ModelFamily m2 = make_monomial_gaussian({1, 2}, {0, 0}, Box::unit(2));
  const double nb = 300.0, v = 0.5;
  QuadratureBackend b2(TemperedPosteriorSpec::population(m2, nb));
  double e_slice = b2.expect_poly(Submanifold::slice({{1, v}}), w_power(2, 0, 1));

  // on {w2 = v} the density is exp(-nbeta * (c v^4) w1^2)
  ModelFamily m1 = make_monomial_gaussian({1}, {0}, Box::unit(1), 0.5 * std::pow(v, 4));
  QuadratureBackend b1(TemperedPosteriorSpec::population(m1, nb));
  double e_1d = b1.expect_poly(Submanifold::full(), w_power(1, 0, 1));
  CHECK(e_slice == Catch::Approx(e_1d).epsilon(1e-11));
}

TEST_CASE("point supports evaluate exactly") {
  ModelFamily m = make_monomial_gaussian({1}, {0}, Box::unit(1));
  QuadratureBackend be(TemperedPosteriorSpec::population(m, 40.0));
  Submanifold pt = Submanifold::point({0.3});
  CHECK(be.expect_poly(pt, w_power(1, 0, 2)) == Catch::Approx(0.09).epsilon(1e-14));
  CHECK(be.partition_function(pt) == Catch::Approx(std::exp(-40.0 * 0.5 * 0.09)).epsilon(1e-13));
}

TEST_CASE("restricted support with vanishing prior mass is rejected") {
  ModelFamily m = make_monomial_gaussian({1, 1}, {0, 2}, Box::unit(2));
  QuadratureBackend be(TemperedPosteriorSpec::population(m, 10.0));
  CHECK_THROWS_WITH(be.expect_poly(Submanifold::slice({{1, 0.0}}), w_power(2, 0, 1)),
                    Catch::Matchers::ContainsSubstring("zero prior mass"));
}

TEST_CASE("level-set expectations") {
  ModelFamily m = make_monomial_gaussian({1}, {0}, Box::unit(1));
  // eps >= max K: uniform on [0,1]
  CHECK(level_set_expect(m, 10.0, Submanifold::full(), w_power(1, 0, 1)) == Catch::Approx(0.5).epsilon(1e-12));
  // K = w^2/2 <= eps on [0, sqrt(2 eps)]: E[w] = sqrt(2 eps)/2
  const double eps = 0.02;
  CHECK(level_set_expect(m, eps, Submanifold::full(), w_power(1, 0, 1)) ==
        Catch::Approx(std::sqrt(2.0 * eps) / 2.0).epsilon(1e-12));
  CHECK(level_set_expect(m, eps, Submanifold::full(), WPoly::constant(1, 1.0)) == Catch::Approx(1.0));

  CHECK_THROWS_AS(LevelSetMoments(m, -1.0), std::invalid_argument);
}

TEST_CASE("2D level-set volume matches the closed form") {
  // K = w1^2 w2^2 <= eps on the unit square: volume = s (1 - ln s), s = sqrt(eps)
  ModelFamily m = make_monomial_gaussian({1, 1}, {0, 0}, Box::unit(2), 1.0);
  const double eps = 0.04, s = 0.2;
  LevelSetMoments ls(m, eps);
  CHECK(ls.volume() == Catch::Approx(s * (1.0 - std::log(s))).epsilon(1e-9));
}
