#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "susc/loss.hpp"
#include "susc/model.hpp"
#include "support/oracles.hpp"

using namespace susc;

TEST_CASE("monomial Gaussian family matches closed-form losses") {
  ModelFamily m1 = make_monomial_gaussian({1}, {0}, Box::unit(1));
  CHECK(m1.population_loss({0.5}) == Catch::Approx(0.125));  // (1/2) 0.5^2
  // f(x,w) = w^2/2 - x w
  CHECK(m1.f_lift().eval(1.0, {0.5}) == Catch::Approx(0.5 * 0.25 - 0.5));

  ModelFamily m2 = make_monomial_gaussian({2}, {0}, Box::unit(1));
  CHECK(m2.population_loss({0.0}) == 0.0);

  ModelFamily m12 = make_monomial_gaussian({1, 2}, {0, 0}, Box::unit(2));
  CHECK(m12.population_loss({0.3, 0.7}) == Catch::Approx(0.5 * 0.09 * std::pow(0.7, 4)));
}

TEST_CASE("model construction rejects invalid input") {
  CHECK_THROWS_AS(make_monomial_gaussian({0}, {0}, Box::unit(1)), std::invalid_argument);
  CHECK_THROWS_AS(Box({0.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_monomial_gaussian({1, 1}, {0}, Box::unit(2)), std::invalid_argument);
  CHECK_THROWS_AS(make_monomial_gaussian({1}, {0}, Box::unit(1), -1.0), std::invalid_argument);
}

TEST_CASE("sample_data is deterministic and matches Gaussian moments") {
  ModelFamily m = make_monomial_gaussian({1}, {0}, Box::unit(1));
  Dataset a = sample_data(m, 5, 42);
  Dataset b = sample_data(m, 5, 42);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(a.points()[i] == b.points()[i]);

  CHECK_THROWS_AS(sample_data(m, 0, 7), std::invalid_argument);

  Dataset big = sample_data(m, 100000, 1234);
  double n = static_cast<double>(big.size());
  CHECK(std::abs(big.power_mean(1)) < 4.0 / std::sqrt(n));
  CHECK(big.power_mean(4) == Catch::Approx(3.0).epsilon(0.10));
}

TEST_CASE("perturbation densities are Hermite polynomials with zero q-mean") {
  CHECK(perturbation_density(Perturbation(1, 1.0), 2.0) == Catch::Approx(2.0));
  CHECK(perturbation_density(Perturbation(2, 1.0), 1.0) == Catch::Approx(0.0));
  CHECK_THROWS_AS(Perturbation(0, 1.0), std::invalid_argument);

  // int He_3(x)^2 q dx = 3! = 6
  double m2 = oracle::gauss_expect([](double x) {
    double he3 = susc::hermite_he(3, x);
    return he3 * he3;
  });
  CHECK(m2 == Catch::Approx(6.0).epsilon(1e-10));

  for (int m = 1; m <= 6; ++m) {
    double mu = oracle::gauss_expect([m](double x) { return susc::hermite_he(m, x); });
    CHECK(std::abs(mu) < 1e-12);
  }
}

TEST_CASE("quadrature of the lift against q reproduces K at random points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const auto& model : {make_monomial_gaussian({1}, {0}, Box::unit(1)),
                            make_monomial_gaussian({3}, {1}, Box::unit(1)),
                            make_monomial_gaussian({1, 2}, {0, 1}, Box::unit(2))}) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> w(model.dim());
      for (auto& wi : w) wi = unif(rng);
      double k_quad = oracle::gauss_expect([&](double x) { return model.f_lift().eval(x, w); });
      double k_closed = model.population_loss(w);
      CHECK(std::abs(k_quad - k_closed) <= 1e-10 * std::abs(k_closed) + 1e-15);
    }
  }
}

TEST_CASE("loss vanishes exactly on the coordinate hyperplanes") {
  ModelFamily m = make_monomial_gaussian({1, 2}, {0, 0}, Box::unit(2));
  for (double a : {0.0, 0.25, 0.5, 1.0})
    for (double b : {0.0, 0.25, 0.5, 1.0}) {
      double k = m.population_loss({a, b});
      if (a == 0.0 || b == 0.0)
        CHECK(k == 0.0);
      else
        CHECK(k > 0.0);
    }
}
