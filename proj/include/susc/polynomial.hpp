#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "susc/multiindex.hpp"

namespace susc {

/// Sparse polynomial in the parameter w in R^d, exact coefficients.
/// Canonical form: map from exponent multi-index to coefficient, zeros dropped.
class WPoly {
 public:
  WPoly() : dim_(0) {}
  explicit WPoly(int dim) : dim_(dim) {}

  static WPoly constant(int dim, double c) {
    WPoly p(dim);
    if (c != 0.0) p.terms_[MultiIndex(dim, 0)] = c;
    return p;
  }

  /// c * w^e
  static WPoly monomial(MultiIndex e, double c) {
    WPoly p(static_cast<int>(e.size()));
    if (c != 0.0) p.terms_[std::move(e)] = c;
    return p;
  }

  int dim() const { return dim_; }
  bool empty() const { return terms_.empty(); }
  const std::map<MultiIndex, double>& terms() const { return terms_; }

  double eval(const std::vector<double>& w) const {
    if (static_cast<int>(w.size()) != dim_) throw std::invalid_argument("WPoly::eval: dimension mismatch");
    double s = 0.0;
    for (const auto& [e, c] : terms_) {
      double t = c;
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < e[i]; ++j) t *= w[i];
      s += t;
    }
    return s;
  }

  WPoly derivative(int i) const {
    WPoly out(dim_);
    for (const auto& [e, c] : terms_) {
      if (e[i] == 0) continue;
      MultiIndex f = e;
      f[i] -= 1;
      out.add_term(std::move(f), c * e[i]);
    }
    return out;
  }

  WPoly derivative(const MultiIndex& beta) const {
    WPoly out = *this;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < beta[i]; ++j) out = out.derivative(i);
    return out;
  }

  WPoly& operator+=(const WPoly& o) {
    check_dim(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }

  WPoly& operator-=(const WPoly& o) {
    check_dim(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }

  WPoly& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend WPoly operator+(WPoly a, const WPoly& b) { return a += b; }
  friend WPoly operator-(WPoly a, const WPoly& b) { return a -= b; }
  friend WPoly operator*(WPoly a, double s) { return a *= s; }
  friend WPoly operator*(double s, WPoly a) { return a *= s; }

  friend WPoly operator*(const WPoly& a, const WPoly& b) {
    a.check_dim(b);
    WPoly out(a.dim_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        MultiIndex e = ea;
        for (int i = 0; i < a.dim_; ++i) e[i] += eb[i];
        out.add_term(std::move(e), ca * cb);
      }
    return out;
  }

  /// Total degree in w_i across terms, 0 for the zero polynomial.
  int degree(int i) const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[i]);
    return d;
  }

  /// Componentwise-minimal exponent over the support (leading vanishing order).
  MultiIndex min_exponents() const {
    if (terms_.empty()) return MultiIndex(dim_, 0);
    MultiIndex m(dim_, 1 << 20);
    for (const auto& [e, c] : terms_)
      for (int i = 0; i < dim_; ++i) m[i] = std::min(m[i], e[i]);
    return m;
  }

  /// The polynomial on a slice: coordinates in `fixed` replaced by their values.
  WPoly restrict_coords(const std::map<int, double>& fixed) const {
    WPoly out(dim_);
    for (const auto& [e, c] : terms_) {
      double factor = c;
      MultiIndex f = e;
      for (const auto& [i, v] : fixed) {
        for (int j = 0; j < e[i]; ++j) factor *= v;
        f[i] = 0;
      }
      out.add_term(std::move(f), factor);
    }
    return out;
  }

 private:
  void check_dim(const WPoly& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("WPoly: dimension mismatch");
  }

  void add_term(MultiIndex e, double c) {
    if (c == 0.0) return;
    auto [it, inserted] = terms_.emplace(std::move(e), c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  int dim_;
  std::map<MultiIndex, double> terms_;
};

}  // namespace susc
