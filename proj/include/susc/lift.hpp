#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "susc/hermite.hpp"
#include "susc/polynomial.hpp"

namespace susc {

/// i.i.d. sample x_1..x_n from the true distribution, with seed provenance.
/// Immutable once created; caches power sums so empirical coefficients of
/// polynomial-in-x lifts cost O(1) per evaluation.
class Dataset {
 public:
  Dataset(std::vector<double> points, std::uint64_t seed) : points_(std::move(points)), seed_(seed) {
    if (points_.empty()) throw std::invalid_argument("Dataset: empty sample");
  }

  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  std::uint64_t seed() const { return seed_; }

  /// (1/n) sum_j x_j^r
  double power_mean(int r) const {
    if (r < 0) throw std::invalid_argument("Dataset::power_mean: negative power");
    while (static_cast<int>(power_means_.size()) <= r) {
      int p = static_cast<int>(power_means_.size());
      double s = 0.0;
      for (double x : points_) s += std::pow(x, p);
      power_means_.push_back(s / static_cast<double>(points_.size()));
    }
    return power_means_[r];
  }

  /// (1/n) sum_j He_m(x_j) x_j^r, the empirical counterpart of E[He_m(x) x^r].
  double hermite_power_mean(int m, int r) const {
    double s = 0.0;
    for (double x : points_) s += hermite_he(m, x) * std::pow(x, r);
    return s / static_cast<double>(points_.size());
  }

 private:
  std::vector<double> points_;
  std::uint64_t seed_;
  mutable std::vector<double> power_means_;
};

/// An L^4(q)-valued real analytic function represented exactly:
/// F(x,w) = sum_r c_r(w) x^r with polynomial coefficient functions c_r.
/// Everything downstream (population pairings, empirical counterparts,
/// w-derivatives) is exact algebra on this form.
class Lift {
 public:
  Lift() = default;
  explicit Lift(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  int max_x_degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<WPoly>& coeffs() const { return coeffs_; }

  void set_coeff(int x_degree, WPoly c) {
    if (x_degree < 0) throw std::invalid_argument("Lift::set_coeff: negative x degree");
    if (c.dim() != dim_) throw std::invalid_argument("Lift::set_coeff: dimension mismatch");
    if (static_cast<int>(coeffs_.size()) <= x_degree) coeffs_.resize(x_degree + 1, WPoly(dim_));
    coeffs_[x_degree] = std::move(c);
  }

  void add_coeff(int x_degree, const WPoly& c) {
    if (static_cast<int>(coeffs_.size()) <= x_degree) coeffs_.resize(x_degree + 1, WPoly(dim_));
    coeffs_[x_degree] += c;
  }

  double eval(double x, const std::vector<double>& w) const {
    double s = 0.0, xp = 1.0;
    for (const auto& c : coeffs_) {
      if (!c.empty()) s += c.eval(w) * xp;
      xp *= x;
    }
    return s;
  }

  /// Exact partial derivative in w.
  Lift derivative(const MultiIndex& beta) const {
    Lift out(dim_);
    out.coeffs_.reserve(coeffs_.size());
    for (const auto& c : coeffs_) out.coeffs_.push_back(c.derivative(beta));
    return out;
  }

  Lift derivative(int i) const {
    Lift out(dim_);
    out.coeffs_.reserve(coeffs_.size());
    for (const auto& c : coeffs_) out.coeffs_.push_back(c.derivative(i));
    return out;
  }

  /// Population coefficient g(w) = E_q[F(x,w)] as a polynomial in w.
  WPoly population_poly() const {
    WPoly p(dim_);
    for (std::size_t r = 0; r < coeffs_.size(); ++r) {
      double m = gaussian_moment(static_cast<int>(r));
      if (m != 0.0) p += coeffs_[r] * m;
    }
    return p;
  }

  /// Empirical coefficient g_n(w) = (1/n) sum_j F(x_j, w) as a polynomial in w.
  WPoly empirical_poly(const Dataset& data) const {
    WPoly p(dim_);
    for (std::size_t r = 0; r < coeffs_.size(); ++r)
      if (!coeffs_[r].empty()) p += coeffs_[r] * data.power_mean(static_cast<int>(r));
    return p;
  }

  /// Pairing against a Hermite perturbation: E_q[scale He_m(x) F(x,w)].
  WPoly hermite_pairing_poly(int m, double scale) const {
    WPoly p(dim_);
    for (std::size_t r = 0; r < coeffs_.size(); ++r)
      if (!coeffs_[r].empty()) p += coeffs_[r] * (scale * hermite_x_moment(m, static_cast<int>(r)));
    return p;
  }

  /// Empirical pairing: (1/n) sum_j scale He_m(x_j) F(x_j, w).
  WPoly hermite_pairing_poly(int m, double scale, const Dataset& data) const {
    WPoly p(dim_);
    for (std::size_t r = 0; r < coeffs_.size(); ++r)
      if (!coeffs_[r].empty()) p += coeffs_[r] * (scale * data.hermite_power_mean(m, static_cast<int>(r)));
    return p;
  }

  /// Product of two lifts as a function of x (convolution of x-coefficients);
  /// used for E_q[F^2] in variance checks and for kernel moments.
  friend Lift operator*(const Lift& a, const Lift& b) {
    if (a.dim_ != b.dim_) throw std::invalid_argument("Lift product: dimension mismatch");
    Lift out(a.dim_);
    for (std::size_t r = 0; r < a.coeffs_.size(); ++r) {
      if (a.coeffs_[r].empty()) continue;
      for (std::size_t s = 0; s < b.coeffs_.size(); ++s) {
        if (b.coeffs_[s].empty()) continue;
        out.add_coeff(static_cast<int>(r + s), a.coeffs_[r] * b.coeffs_[s]);
      }
    }
    return out;
  }

  friend Lift operator-(const Lift& a, const Lift& b) {
    if (a.dim_ != b.dim_) throw std::invalid_argument("Lift difference: dimension mismatch");
    Lift out = a;
    for (std::size_t s = 0; s < b.coeffs_.size(); ++s) {
      if (b.coeffs_[s].empty()) continue;
      out.add_coeff(static_cast<int>(s), WPoly(a.dim_) - b.coeffs_[s]);
    }
    return out;
  }

  /// Multiply every x-coefficient by a w-polynomial.
  friend Lift operator*(const Lift& a, const WPoly& p) {
    Lift out(a.dim_);
    for (std::size_t r = 0; r < a.coeffs_.size(); ++r)
      if (!a.coeffs_[r].empty()) out.add_coeff(static_cast<int>(r), a.coeffs_[r] * p);
    return out;
  }

  /// The lift with w pinned: x |-> F(x, w0), as a Lift with constant coefficients.
  Lift freeze_w(const std::vector<double>& w0) const {
    Lift out(dim_);
    for (std::size_t r = 0; r < coeffs_.size(); ++r)
      if (!coeffs_[r].empty()) out.set_coeff(static_cast<int>(r), WPoly::constant(dim_, coeffs_[r].eval(w0)));
    return out;
  }

  /// True when F(x,w) does not depend on x.
  bool deterministic() const {
    for (std::size_t r = 1; r < coeffs_.size(); ++r)
      if (!coeffs_[r].empty()) return false;
    return true;
  }

 private:
  int dim_ = 0;
  std::vector<WPoly> coeffs_;
};

}  // namespace susc
