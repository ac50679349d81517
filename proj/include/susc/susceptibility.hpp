#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "susc/asymptotics.hpp"
#include "susc/observable.hpp"

namespace susc {

enum class EstimatorKind { population_ren, ideal, ren, sgld };

inline std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::population_ren: return "population_ren";
    case EstimatorKind::ideal: return "ideal";
    case EstimatorKind::ren: return "ren";
    case EstimatorKind::sgld: return "sgld";
  }
  return "?";
}

struct SusceptibilityResult {
  double value = 0.0;
  EstimatorKind estimator_kind = EstimatorKind::population_ren;
  double nbeta = 0.0;
  std::size_t n = 0;
  std::string decomposition_id;
  std::optional<double> mc_std_err;
};

/// The loss-variation realization matching a backend: Delta K against the
/// population loss, Delta K_n against the empirical one.
inline WPoly realized_loss_variation(const PosteriorBackend& be, const Perturbation& xi) {
  if (be.mode() == PosteriorMode::population) return loss_variation_poly(be.model(), xi);
  return empirical_loss_variation_poly(be.model(), xi, *be.dataset());
}

namespace detail {

/// Core of every chi estimator: -sum_i pref_i [E_{S_i}(c_i dK) - E_{S_i}(c_i) E_W(dK)],
/// optionally weighted per-term by partition-function ratios Z^{S_i}/Z^W
/// (the ideal estimator), with batch-means error propagation when the
/// backend is stochastic.
inline SusceptibilityResult chi_core(const Observable& obs, const WPoly& delta_k, PosteriorBackend& be,
                                     EstimatorKind kind, bool partition_weights, bool leading_only) {
  const int M = obs.order();
  const double nb = be.nbeta();
  auto terms = prepare_terms(obs, be, leading_only);

  ExpectStat dk = be.expect_poly_stat(Submanifold::full(), delta_k);
  const std::size_t nbatch = dk.batch_means.size();

  double total = 0.0;
  std::vector<double> batch_totals(nbatch, 0.0);
  double z_full = partition_weights ? be.partition_function(Submanifold::full()) : 1.0;

  for (const auto& t : terms) {
    WPoly cdk = t.coeff * delta_k;
    be.prefetch_polys(t.support, {&cdk, &t.coeff});
    ExpectStat e_cdk = be.expect_poly_stat(t.support, cdk);
    ExpectStat e_c = be.expect_poly_stat(t.support, t.coeff);
    double pref = ((t.beta_order % 2 == 0) ? 1.0 : -1.0) * std::pow(-nb, t.rank) * std::pow(nb, -M);
    if (partition_weights) pref *= be.partition_function(t.support) / z_full;
    total += pref * (e_cdk.mean - e_c.mean * dk.mean);
    for (std::size_t b = 0; b < nbatch; ++b)
      batch_totals[b] += pref * (e_cdk.batch_means[b] - e_c.batch_means[b] * dk.batch_means[b]);
  }

  SusceptibilityResult res;
  res.value = -total;
  res.estimator_kind = kind;
  res.nbeta = nb;
  res.n = be.dataset() ? be.dataset()->size() : 0;
  res.decomposition_id = obs.decomposition_id;
  if (nbatch > 1) {
    double m = 0.0;
    for (double b : batch_totals) m += b;
    m /= static_cast<double>(nbatch);
    double s = 0.0;
    for (double b : batch_totals) s += (b - m) * (b - m);
    res.mc_std_err = std::sqrt(s / (static_cast<double>(nbatch) - 1.0) / static_cast<double>(nbatch));
  }
  return res;
}

}  // namespace detail

/// chi^{pop,ren} = -Cov^res under population posteriors, with the (nbeta)^{-M}
/// normalization for differential observables.
inline SusceptibilityResult chi_pop_ren(const Observable& obs, const Perturbation& xi, PosteriorBackend& be,
                                        bool leading_only = false) {
  if (be.mode() != PosteriorMode::population)
    throw std::invalid_argument("chi_pop_ren: population backend required");
  return detail::chi_core(obs, realized_loss_variation(be, xi), be, EstimatorKind::population_ren, false,
                          leading_only);
}

/// Renormalized susceptibility estimator: empirical lifts, empirical Leibniz
/// coefficients, Delta K_n, under the empirical posterior backend (quadrature
/// for the exact T -> infinity limit, SGLD for the sampled variant).
inline SusceptibilityResult chi_ren_hat(const Observable& obs, const Perturbation& xi, PosteriorBackend& be,
                                        bool leading_only = false) {
  if (be.mode() != PosteriorMode::empirical)
    throw std::invalid_argument("chi_ren_hat: empirical backend required");
  EstimatorKind kind = be.has_partition_function() ? EstimatorKind::ren : EstimatorKind::sgld;
  return detail::chi_core(obs, realized_loss_variation(be, xi), be, kind, false, leading_only);
}

/// Ideal estimator: renormalized summands weighted by Z^{emp,S_i}/Z^{emp}.
inline SusceptibilityResult chi_ideal_hat(const Observable& obs, const Perturbation& xi, PosteriorBackend& be,
                                          bool leading_only = false) {
  if (be.mode() != PosteriorMode::empirical)
    throw std::invalid_argument("chi_ideal_hat: empirical backend required");
  if (!be.has_partition_function())
    throw std::invalid_argument("chi_ideal_hat: backend must supply partition functions (quadrature-empirical)");
  return detail::chi_core(obs, realized_loss_variation(be, xi), be, EstimatorKind::ideal, true, leading_only);
}

/// Per-sample susceptibility chi_x = -(nbeta)^{-M} Cov^res(O, f(x,.) - K(.)).
inline double per_sample_susceptibility(const Observable& obs, double x, PosteriorBackend& be) {
  const ModelFamily& m = be.model();
  WPoly kernel(m.dim());
  const auto& coeffs = m.f_lift().coeffs();
  double xp = 1.0;
  for (const auto& c : coeffs) {
    kernel += c * xp;
    xp *= x;
  }
  kernel -= m.loss_poly();
  auto terms = prepare_terms(obs, be);
  return -restricted_covariance(terms, kernel, be, obs.order());
}

/// Hybrid coupling kernel for a single functional term g delta_S:
///   kappa(x, x') = E_{Pi^S}[g~(x,w) f(x',w)] - E_{Pi^S}[g~(x,w)] E_Pi[f(x',w)].
/// The kernel is polynomial in (x, x'); the posterior moments of the
/// coefficient products are computed once at construction.
class CouplingKernel {
 public:
  enum class Kind { population, empirical, sharp_cutoff };

  /// Tempered kernel (population or empirical according to the backend mode).
  CouplingKernel(const ObservableTerm& term, PosteriorBackend& be) {
    if (!term.functional()) throw std::invalid_argument("coupling kernel: functional observable term required");
    kind_ = (be.mode() == PosteriorMode::population) ? Kind::population : Kind::empirical;
    const Lift& g = term.lift;
    const Lift& f = be.model().f_lift();
    build(g, f, [&](const WPoly& p) { return be.expect_poly(term.support, p); },
          [&](const WPoly& p) { return be.expect_poly(Submanifold::full(), p); });
  }

  /// Sharp-cutoff kernel on the loss sublevel sets, with prefactor eps^{-sigma};
  /// sigma = lambda_{j+k} - lambda comes from the scaling laws, never from the user.
  CouplingKernel(const ObservableTerm& term, const ModelFamily& model, double eps) {
    if (!term.functional()) throw std::invalid_argument("coupling kernel: functional observable term required");
    kind_ = Kind::sharp_cutoff;
    MultiIndex j(model.dim(), 0);
    {
      // leading vanishing order of the population coefficient g = E_q[g~]
      WPoly gpop = term.lift.population_poly();
      if (gpop.empty()) throw std::invalid_argument("sharp-cutoff kernel: zero coefficient");
      MultiIndex mins = gpop.min_exponents();
      for (int i = 0; i < model.dim(); ++i) {
        if (mins[i] % 2 != 0)
          throw std::invalid_argument("sharp-cutoff kernel: coefficient is not of standard form w^{2j}");
        j[i] = mins[i] / 2;
      }
    }
    sigma_ = cutoff_sigma(model.k(), model.h(), j).value();
    prefactor_ = std::pow(eps, -sigma_);
    LevelSetMoments on_s(model, eps, term.support);
    LevelSetMoments on_w(model, eps, Submanifold::full());
    build(term.lift, model.f_lift(), [&](const WPoly& p) { return on_s.expect_poly(p); },
          [&](const WPoly& p) { return on_w.expect_poly(p); });
  }

  Kind kind() const { return kind_; }
  double sigma() const { return sigma_; }

  double operator()(double x, double xprime) const {
    double s = 0.0;
    for (std::size_t r = 0; r < kappa_.size(); ++r)
      for (std::size_t t = 0; t < kappa_[r].size(); ++t)
        if (kappa_[r][t] != 0.0) s += kappa_[r][t] * std::pow(x, static_cast<double>(r)) * std::pow(xprime, static_cast<double>(t));
    return prefactor_ * s;
  }

 private:
  template <class ExpectS, class ExpectW>
  void build(const Lift& g, const Lift& f, ExpectS&& on_support, ExpectW&& on_full) {
    const auto& gc = g.coeffs();
    const auto& fc = f.coeffs();
    kappa_.assign(gc.size(), std::vector<double>(fc.size(), 0.0));
    for (std::size_t r = 0; r < gc.size(); ++r) {
      if (gc[r].empty()) continue;
      double e_g = on_support(gc[r]);
      for (std::size_t t = 0; t < fc.size(); ++t) {
        if (fc[t].empty()) continue;
        kappa_[r][t] = on_support(gc[r] * fc[t]) - e_g * on_full(fc[t]);
      }
    }
  }

  Kind kind_ = Kind::population;
  double sigma_ = 0.0;
  double prefactor_ = 1.0;
  std::vector<std::vector<double>> kappa_;
};

/// Double-quadrature pairing int kappa(x,x') q(x) xi(x') q(x') dx dx' on a
/// Gauss-Hermite grid; reproduces the restricted covariance.
inline double kernel_pairing(const CouplingKernel& kappa, const Perturbation& xi, int nodes = 64) {
  const Rule1D& gh = gauss_hermite_prob(nodes);
  double s = 0.0;
  for (std::size_t a = 0; a < gh.x.size(); ++a) {
    double inner = 0.0;
    for (std::size_t b = 0; b < gh.x.size(); ++b)
      inner += gh.w[b] * kappa(gh.x[a], gh.x[b]) * xi.density(gh.x[b]);
    s += gh.w[a] * inner;
  }
  return s;
}

}  // namespace susc
