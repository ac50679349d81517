#include <catch2/catch_amalgamated.hpp>

#include "susc/sgld.hpp"
#include "support/oracles.hpp"

using namespace susc;

TEST_CASE("ULA on a pure Gaussian target: mean exact, variance (1 - eps/4)-corrected") {
  // U = |w - mu|^2 / 2, no boundary; discrete stationary variance is 1/(1 - eps/4)
  const double mu = 1.7, eps = 0.2;
  auto grad = [&](const std::vector<double>& w, std::vector<double>& g) { g[0] = w[0] - mu; };
  ChainSamples chain = run_ula({mu}, {0}, grad, eps, 200000, 10000, 2024);

  SampleMean mw = sample_mean(chain, [](const std::vector<double>& w) { return w[0]; });
  CHECK(std::abs(mw.mean - mu) <= 3.0 * mw.mc_std_err);

  // variance via batch means of the centered square
  SampleMean mv = sample_mean(chain, [&](const std::vector<double>& w) { return (w[0] - mw.mean) * (w[0] - mw.mean); });
  double target = 1.0 / (1.0 - eps / 4.0);
  INFO("var=" << mv.mean << " target=" << target << " se=" << mv.mc_std_err);
  CHECK(std::abs(mv.mean - target) <= 3.0 * mv.mc_std_err);
}

TEST_CASE("restricted chains never move fixed coordinates") {
  ModelFamily m = make_monomial_gaussian({1, 2}, {0, 0}, Box::unit(2));
  Dataset d = sample_data(m, 200, 5);
  SgldConfig cfg;
  cfg.chain_length = 5000;
  cfg.burn_in = 100;
  cfg.seed = 9;
  TemperedPosteriorSpec spec = TemperedPosteriorSpec::empirical(m, d, 0.5, Submanifold::slice({{1, 0.5}}));
  ChainSamples chain = run_chain(m, d, spec, cfg);
  for (const auto& w : chain.samples) CHECK(w[1] == 0.5);
}

TEST_CASE("strong localization concentrates samples at the center") {
  ModelFamily m = make_monomial_gaussian({1}, {0}, Box::unit(1));
  Dataset d = sample_data(m, 100, 6);
  SgldConfig cfg;
  cfg.localization = 1e4;
  cfg.center = {0.6};
  cfg.chain_length = 50000;
  cfg.burn_in = 5000;
  cfg.seed = 12;
  TemperedPosteriorSpec spec = TemperedPosteriorSpec::empirical(m, d, 0.1);
  ChainSamples chain = run_chain(m, d, spec, cfg);
  SampleMean mw = sample_mean(chain, [](const std::vector<double>& w) { return w[0]; });
  double sigma = 1.0 / std::sqrt(cfg.localization);
  double tol = std::sqrt(chain.step_size) + 3.0 * sigma / std::sqrt(static_cast<double>(chain.samples.size()));
  CHECK(std::abs(mw.mean - 0.6) <= tol);
}

TEST_CASE("SGLD chain mean matches the quadrature-empirical posterior mean") {
  ModelFamily m = make_monomial_gaussian({1}, {0}, Box::unit(1));
  Dataset d = sample_data(m, 1000, 77);
  const double beta = 0.1;  // nbeta = 100
  QuadratureBackend qe(TemperedPosteriorSpec::empirical(m, d, beta));
  MultiIndex e{1};
  double oracle_mean = qe.expect_poly(Submanifold::full(), WPoly::monomial(e, 1.0));

  SgldConfig cfg;
  cfg.chain_length = 100000;
  cfg.burn_in = 10000;
  cfg.seed = 31;
  TemperedPosteriorSpec spec = TemperedPosteriorSpec::empirical(m, d, beta);
  ChainSamples chain = run_chain(m, d, spec, cfg);
  SampleMean mw = sample_mean(chain, [](const std::vector<double>& w) { return w[0]; });
  INFO("sgld=" << mw.mean << " quad=" << oracle_mean << " se=" << mw.mc_std_err);
  CHECK(std::abs(mw.mean - oracle_mean) <= 3.0 * mw.mc_std_err);
}

TEST_CASE("minibatch gradients target the same posterior") {
  ModelFamily m = make_monomial_gaussian({1}, {0}, Box::unit(1));
  Dataset d = sample_data(m, 1000, 42);
  SgldConfig full, mini;
  full.chain_length = mini.chain_length = 80000;
  full.burn_in = mini.burn_in = 8000;
  full.seed = mini.seed = 3;
  mini.minibatch = 32;
  TemperedPosteriorSpec spec = TemperedPosteriorSpec::empirical(m, d, 0.1);
  SampleMean a = sample_mean(run_chain(m, d, spec, full), [](const std::vector<double>& w) { return w[0]; });
  SampleMean b = sample_mean(run_chain(m, d, spec, mini), [](const std::vector<double>& w) { return w[0]; });
  CHECK(std::abs(a.mean - b.mean) <= 4.0 * std::sqrt(a.mc_std_err * a.mc_std_err + b.mc_std_err * b.mc_std_err) +
                                         0.02 * std::abs(a.mean));
}

TEST_CASE("sample_mean contracts") {
  ChainSamples chain;
  chain.samples.assign(100, {0.25});
  SampleMean c = sample_mean(chain, [](const std::vector<double>& w) { return 3.0; });
  CHECK(c.mean == 3.0);
  CHECK(c.mc_std_err == 0.0);
  SampleMean r = sample_mean(chain, [](const std::vector<double>& w) { return w[0]; });
  CHECK(r.mean == 0.25);
  CHECK(r.mc_std_err == 0.0);

  ChainSamples empty;
  CHECK_THROWS_AS(sample_mean(empty, [](const std::vector<double>&) { return 0.0; }), std::invalid_argument);
}

TEST_CASE("run_chain contract errors and divergence detection") {
  ModelFamily m = make_monomial_gaussian({1}, {0}, Box::unit(1));
  Dataset d = sample_data(m, 10, 1);
  SgldConfig bad;
  bad.chain_length = 100;
  bad.burn_in = 100;  // zero retained samples
  TemperedPosteriorSpec spec = TemperedPosteriorSpec::empirical(m, d, 0.1);
  CHECK_THROWS_AS(run_chain(m, d, spec, bad), std::invalid_argument);

  // an anti-restoring drift escapes any radius: the detector must fire
  auto explode = [](const std::vector<double>& w, std::vector<double>& g) { g[0] = -1e4 * (w[0] + 1.0); };
  CHECK_THROWS_WITH(run_ula({1.0}, {0}, explode, 0.1, 1000, 0, 8, nullptr, 50.0),
                    Catch::Matchers::ContainsSubstring("diverged"));
}

TEST_CASE("chains are deterministic given the seed") {
  ModelFamily m = make_monomial_gaussian({1}, {0}, Box::unit(1));
  Dataset d = sample_data(m, 100, 2);
  SgldConfig cfg;
  cfg.chain_length = 2000;
  cfg.burn_in = 10;
  cfg.seed = 1234;
  TemperedPosteriorSpec spec = TemperedPosteriorSpec::empirical(m, d, 0.1);
  ChainSamples a = run_chain(m, d, spec, cfg);
  ChainSamples b = run_chain(m, d, spec, cfg);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i][0] == b.samples[i][0]);
}
