#include <catch2/catch_amalgamated.hpp>

#include "susc/asymptotics.hpp"
#include "susc/posterior.hpp"
#include "support/oracles.hpp"

using namespace susc;

TEST_CASE("scaling laws from (k, h, l)") {
  ScalingLaw a = scaling_law({1}, {0}, {1});
  CHECK(a.lambda == Rational(1, 2));
  CHECK(a.lambda_l == Rational(1, 1));
  CHECK(a.tau == Rational(1, 2));
  REQUIRE(a.c_theory.has_value());
  CHECK(*a.c_theory == Catch::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-12));  // ~ 0.56419

  ScalingLaw zero = scaling_law({2}, {1}, {0});
  CHECK(zero.tau == Rational(0, 1));
  CHECK(*zero.c_theory == Catch::Approx(1.0));

  // lambda = 1/2 with multiplicity 2; the moment ratio carries no log factor
  ScalingLaw multi = scaling_law({1, 1}, {0, 0}, {0, 0});
  CHECK(multi.lambda == Rational(1, 2));
  CHECK(multi.multiplicity == 2);
  CHECK(multi.log_power() == 0);

  // j = k gives sigma = 1 for any (k, h)
  for (auto [k, h] : {std::pair<MultiIndex, MultiIndex>{{1}, {0}}, {{2}, {1}}, {{3}, {0}}, {{1, 2}, {0, 1}}})
    CHECK(cutoff_sigma(k, h, k) == Rational(1, 1));
}

TEST_CASE("fit_scaling on synthetic data") {
  ScalingLaw law = scaling_law({1}, {0}, {1});
  std::vector<std::pair<double, double>> pts;
  for (double nb : {1e2, 1e3, 1e4, 1e5, 1e6}) pts.emplace_back(nb, 2.0 * std::pow(nb, -0.5));
  ScalingFit fit = fit_scaling(pts, law);
  CHECK(fit.slope_hat == Catch::Approx(-0.5).margin(1e-10));
  CHECK(fit.c_hat == Catch::Approx(2.0).margin(1e-10));
  CHECK(fit.r2 == Catch::Approx(1.0).margin(1e-12));

  // explicit log correction is subtracted before the linear fit
  ScalingLaw lawlog = law;
  lawlog.multiplicity_l = 2;
  std::vector<std::pair<double, double>> ptsl;
  for (double nb : {1e2, 1e3, 1e4, 1e5, 1e6}) ptsl.emplace_back(nb, 3.0 * std::pow(nb, -1.0) * std::log(nb));
  ScalingFit fl = fit_scaling(ptsl, lawlog);
  CHECK(fl.slope_hat == Catch::Approx(-1.0).margin(1e-10));
  CHECK(fl.c_hat == Catch::Approx(3.0).margin(1e-9));

  std::vector<std::pair<double, double>> flat;
  for (double nb : {1e2, 1e3, 1e4, 1e5, 1e6}) flat.emplace_back(nb, 7.0);
  CHECK(fit_scaling(flat, law).slope_hat == Catch::Approx(0.0).margin(1e-12));

  std::vector<std::pair<double, double>> neg{{1e2, 1.0}, {1e3, -1.0}, {1e4, 1.0}, {1e5, 1.0}, {1e6, 1.0}};
  CHECK_THROWS_AS(fit_scaling(neg, law), std::invalid_argument);
  std::vector<std::pair<double, double>> narrow{{1e2, 1.0}, {2e2, 1.0}, {3e2, 1.0}, {4e2, 1.0}, {5e2, 1.0}};
  CHECK_THROWS_AS(fit_scaling(narrow, law), std::invalid_argument);
}

TEST_CASE("posterior moments follow the predicted decay (standard form)") {
  ModelFamily m = make_monomial_gaussian({1}, {0}, Box::unit(1), 1.0);
  ScalingLaw law = scaling_law({1}, {0}, {1});
  std::vector<std::pair<double, double>> pts;
  for (double nb : {1e2, 1e3, 1e4, 1e5, 1e6}) {
    QuadratureBackend be(TemperedPosteriorSpec::population(m, nb));
    pts.emplace_back(nb, be.expect_poly(Submanifold::full(), WPoly::monomial({1}, 1.0)));
  }
  ScalingFit fit = fit_scaling(pts, law);
  CHECK(fit.slope_hat == Catch::Approx(-0.5).margin(0.02));
  CHECK(fit.c_hat == Catch::Approx(*law.c_theory).epsilon(0.05));
}

TEST_CASE("empirical moments obey the population slope in the SLT regime") {
  ModelFamily m = make_monomial_gaussian({1}, {0}, Box::unit(1), 1.0);
  ScalingLaw law = scaling_law({1}, {0}, {1});
  std::vector<std::pair<double, double>> pts;
  for (double n : {1e2, 1e3, 1e4, 1e5, 1e6}) {
    double beta = 1.0 / std::log(n);
    Dataset d = sample_data(m, static_cast<std::size_t>(n), 808 + static_cast<std::uint64_t>(n));
    QuadratureBackend be(TemperedPosteriorSpec::empirical(m, d, beta));
    pts.emplace_back(n * beta, be.expect_poly(Submanifold::full(), WPoly::monomial({1}, 1.0)));
  }
  ScalingFit fit = fit_scaling(pts, law);
  CHECK(fit.slope_hat == Catch::Approx(-0.5).margin(0.1));
}

TEST_CASE("fluctuation function: Gamma limits and independent quadrature") {
  for (double alpha : {0.25, 0.5, 1.0, 2.0, 3.7})
    CHECK(fluctuation_function(alpha, 0.0, 1e-3) == Catch::Approx(std::tgamma(alpha)).epsilon(1e-11));
  CHECK(fluctuation_function(1.0, 0.0, 1e-2) == Catch::Approx(1.0).epsilon(1e-11));

  // independent route: s = sqrt(t) substitution, fine trapezoid
  for (double alpha : {0.5, 1.0}) {
    const double a = 1.3, beta = 1e-2, ab = a * std::sqrt(beta);
    const int N = 400000;
    const double smax = 12.0, hstep = smax / N;
    double acc = 0.0;
    for (int i = 0; i <= N; ++i) {
      double s = i * hstep;
      double v = 2.0 * std::pow(s, 2.0 * alpha - 1.0) * std::exp(-s * s + ab * s);
      acc += (i == 0 || i == N) ? 0.5 * v : v;
    }
    acc *= hstep;
    CHECK(fluctuation_function(alpha, a, beta) == Catch::Approx(acc).epsilon(1e-8));
  }

  CHECK_THROWS_AS(fluctuation_function(-1.0, 0.0, 1e-3), std::invalid_argument);
}

TEST_CASE("fluctuation expansion S = Gamma(alpha)(1 + a sqrt(beta) k_alpha) + O(beta)") {
  // residual scales linearly in beta with a finite fitted constant
  std::vector<double> log_b, log_r;
  for (double beta : {1e-4, 3e-4, 1e-3, 3e-3, 1e-2}) {
    double worst = 0.0;
    for (double alpha : {0.25, 0.5, 1.0, 2.0}) {
      double kalpha = std::tgamma(alpha + 0.5) / std::tgamma(alpha);
      for (double a = -2.0; a <= 2.0001; a += 0.5) {
        double s = fluctuation_function(alpha, a, beta);
        double approx = std::tgamma(alpha) * (1.0 + a * std::sqrt(beta) * kalpha);
        worst = std::max(worst, std::abs(s - approx) / std::tgamma(alpha));
      }
    }
    log_b.push_back(std::log(beta));
    log_r.push_back(std::log(worst));
  }
  double sl = oracle::slope(log_b, log_r);
  CHECK(sl == Catch::Approx(1.0).margin(0.15));
  double c_hat = std::exp(log_r.back() - log_b.back());
  CHECK(std::isfinite(c_hat));
}
