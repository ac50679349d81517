#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "susc/lift.hpp"
#include "susc/multiindex.hpp"

namespace susc {

/// Hermite perturbation xi = scale * He_m; zero q-mean for m >= 1 and of
/// finite fourth moment by construction.
struct Perturbation {
  int hermite_index = 1;
  double scale = 1.0;

  Perturbation() = default;
  Perturbation(int m, double s) : hermite_index(m), scale(s) {
    if (m < 1) throw std::invalid_argument("Perturbation: He_0 has nonzero mean under q");
  }

  double density(double x) const { return scale * hermite_he(hermite_index, x); }
};

/// A singular model family in standard form on an axis-aligned box:
///   K(w)   = loss_scale * w^{2k},
///   prior  ~ |w^h| on the domain,
///   data   ~ q = N(0,1),  p(x|w) = N(mu(w), 1) with mu(w) = sqrt(2 loss_scale) w^k,
/// so the log density ratio is f(x,w) = loss_scale w^{2k} - sqrt(2 loss_scale) x w^k.
class ModelFamily {
 public:
  ModelFamily(MultiIndex k, MultiIndex h, Box domain, double loss_scale = 0.5,
              std::string data_model = "gaussian_location")
      : k_(std::move(k)), h_(std::move(h)), domain_(std::move(domain)), loss_scale_(loss_scale),
        data_model_(std::move(data_model)) {
    const int d = domain_.dim();
    if (static_cast<int>(k_.size()) != d || static_cast<int>(h_.size()) != d)
      throw std::invalid_argument("ModelFamily: k/h/domain dimension mismatch");
    for (int ki : k_)
      if (ki < 1) throw std::invalid_argument("ModelFamily: loss exponents must satisfy k_i >= 1");
    for (int hi : h_)
      if (hi < 0) throw std::invalid_argument("ModelFamily: prior exponents must be nonnegative");
    if (!(loss_scale_ > 0.0)) throw std::invalid_argument("ModelFamily: loss_scale must be positive");
    if (data_model_ != "gaussian_location")
      throw std::invalid_argument("ModelFamily: unknown data_model '" + data_model_ + "'");

    MultiIndex two_k(k_);
    for (int& e : two_k) e *= 2;
    loss_poly_ = WPoly::monomial(two_k, loss_scale_);
    lift_ = Lift(d);
    lift_.set_coeff(0, loss_poly_);
    lift_.set_coeff(1, WPoly::monomial(k_, -std::sqrt(2.0 * loss_scale_)));
  }

  int dim() const { return domain_.dim(); }
  const MultiIndex& k() const { return k_; }
  const MultiIndex& h() const { return h_; }
  const Box& domain() const { return domain_; }
  double loss_scale() const { return loss_scale_; }
  const std::string& data_model() const { return data_model_; }

  /// The lift f(x,w) of the log density ratio.
  const Lift& f_lift() const { return lift_; }

  /// K(w) = E_q[f(x,w)] as an exact polynomial.
  const WPoly& loss_poly() const { return loss_poly_; }

  double population_loss(const std::vector<double>& w) const { return loss_poly_.eval(w); }

  /// min_{i : k_i > 0} |w_i|: distance to the zero locus of K inside the box.
  double distance_to_zero_locus(const std::vector<double>& w) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k_.size(); ++i)
      if (k_[i] > 0) d = std::min(d, std::abs(w[i]));
    return d;
  }

 private:
  MultiIndex k_, h_;
  Box domain_;
  double loss_scale_;
  std::string data_model_;
  WPoly loss_poly_;
  Lift lift_;
};

inline ModelFamily make_monomial_gaussian(MultiIndex k, MultiIndex h, Box domain, double loss_scale = 0.5) {
  return ModelFamily(std::move(k), std::move(h), std::move(domain), loss_scale);
}

/// n i.i.d. draws from q = N(0,1), deterministic given the seed.
inline Dataset sample_data(const ModelFamily&, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_data: n must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> pts(n);
  for (auto& x : pts) x = gauss(rng);
  return Dataset(std::move(pts), seed);
}

inline double perturbation_density(const Perturbation& xi, double x) { return xi.density(x); }

}  // namespace susc
