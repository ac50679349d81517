#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "susc/multiindex.hpp"
#include "susc/quadrature.hpp"

namespace susc {

/// Exact small fraction for the rational exponents of the scaling laws.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator<(const Rational& o) const { return num * o.den < o.num * den; }
  Rational operator-(const Rational& o) const { return Rational(num * o.den - o.num * den, den * o.den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

/// Predicted decay of a posterior moment E[w^l]:
///   value ~ C_l (nbeta)^{-tau} (log nbeta)^{m_l - m},
/// with lambda_l = min_i (l_i + h_i + 1)/(2 k_i), tau = lambda_l - lambda_0.
struct ScalingLaw {
  Rational lambda;    // RLCT, l = 0
  int multiplicity = 1;
  Rational lambda_l;
  int multiplicity_l = 1;
  Rational tau;
  std::optional<double> c_theory;  // Gamma(lambda_l)/Gamma(lambda), closed form in 1D

  int log_power() const { return multiplicity_l - multiplicity; }
};

inline ScalingLaw scaling_law(const MultiIndex& k, const MultiIndex& h, const MultiIndex& l) {
  const std::size_t d = k.size();
  if (h.size() != d || l.size() != d) throw std::invalid_argument("scaling_law: multi-index dimension mismatch");
  auto lambda_of = [&](const MultiIndex& ell) {
    Rational best(std::int64_t(1) << 40, 1);
    int mult = 0;
    for (std::size_t i = 0; i < d; ++i) {
      Rational cand(ell[i] + h[i] + 1, 2 * k[i]);
      if (cand < best) {
        best = cand;
        mult = 1;
      } else if (cand == best) {
        ++mult;
      }
    }
    return std::make_pair(best, mult);
  };
  ScalingLaw law;
  auto [lam0, m0] = lambda_of(MultiIndex(d, 0));
  auto [laml, ml] = lambda_of(l);
  law.lambda = lam0;
  law.multiplicity = m0;
  law.lambda_l = laml;
  law.multiplicity_l = ml;
  law.tau = laml - lam0;
  if (d == 1) law.c_theory = std::tgamma(laml.value()) / std::tgamma(lam0.value());
  return law;
}

/// sigma = lambda_{j+k} - lambda, the sharp-cutoff shift for the insertion w^{j+k}.
inline Rational cutoff_sigma(const MultiIndex& k, const MultiIndex& h, const MultiIndex& j) {
  MultiIndex jk(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) jk[i] = j[i] + k[i];
  ScalingLaw law = scaling_law(k, h, jk);
  return law.tau;
}

struct ScalingFit {
  double slope_hat = 0.0;
  double c_hat = 0.0;
  double r2 = 0.0;
};

/// Least-squares fit of log(moment) - log_power * log log(nbeta) against
/// log(nbeta).  slope_hat estimates -tau, exp(intercept) estimates C_l.
inline ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& values, const ScalingLaw& law) {
  if (values.size() < 5) throw std::invalid_argument("fit_scaling: need at least 5 points");
  double lo = values.front().first, hi = values.front().first;
  for (const auto& [nb, v] : values) {
    if (!(v > 0.0)) throw std::invalid_argument("fit_scaling: nonpositive moment");
    if (!(nb > 1.0)) throw std::invalid_argument("fit_scaling: nbeta must exceed 1");
    lo = std::min(lo, nb);
    hi = std::max(hi, nb);
  }
  if (hi / lo < 1e3) throw std::invalid_argument("fit_scaling: nbeta range must span >= 3 decades");

  std::vector<double> xs, ys;
  for (const auto& [nb, v] : values) {
    xs.push_back(std::log(nb));
    ys.push_back(std::log(v) - law.log_power() * std::log(std::log(nb)));
  }
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  ScalingFit fit;
  fit.slope_hat = sxy / sxx;
  fit.c_hat = std::exp(my - fit.slope_hat * mx);
  fit.r2 = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

struct FluctuationResult {
  double value = 0.0;
  double tail_bound = 0.0;
  bool converged = true;
};

/// Fluctuation function S_alpha(a) = int_0^inf t^{alpha-1} exp(-t + a sqrt(beta t)) dt.
/// Head [0, 1/2] by the double power series (the integrable t^{alpha-1}
/// singularity is handled exactly), tail by doubling Gauss-Legendre panels
/// with an explicit truncation bound.
inline FluctuationResult fluctuation_function_checked(double alpha, double a, double beta) {
  if (!(alpha > 0.0)) throw std::invalid_argument("fluctuation_function: alpha must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("fluctuation_function: beta must be positive");
  const double ab = a * std::sqrt(beta);

  const double delta = 0.5;
  double head = 0.0;
  double ci = 1.0;  // (ab)^i / i!
  for (int i = 0; i < 300; ++i) {
    double inner = 0.0;
    double jterm = 1.0;  // (-1)^j / j!
    for (int j = 0; j < 300; ++j) {
      double p = alpha + j + 0.5 * i;
      double contrib = jterm * std::pow(delta, p) / p;
      inner += contrib;
      if (j > 2 && std::abs(contrib) < 1e-22 * (std::abs(inner) + 1e-30)) break;
      jterm *= -1.0 / (j + 1.0);
    }
    head += ci * inner;
    if (i > 2 && std::abs(ci) * std::pow(delta, alpha + 0.5 * i) < 1e-22 * (std::abs(head) + 1e-30)) break;
    ci *= ab / (i + 1.0);
  }

  auto integrand = [&](double t) { return std::pow(t, alpha - 1.0) * std::exp(-t + ab * std::sqrt(t)); };
  double tail = 0.0;
  double lo = delta;
  double bound = 0.0;
  bool converged = false;
  for (int p = 0; p < 64; ++p) {
    double hi2 = 2.0 * lo;
    tail += integrate_gl(integrand, lo, hi2, 48);
    lo = hi2;
    // beyond T >= max(1, 4 (ab)^2) the exponent is <= -T/2, so the remainder
    // is below e^{-T/2} T^{alpha-1} * 4 for the scales used here
    if (lo >= std::max(1.0, 4.0 * ab * ab)) {
      bound = 4.0 * std::exp(-0.5 * lo) * std::pow(lo, std::max(alpha - 1.0, 0.0) + 1.0);
      if (bound < 1e-14 * (head + tail) || bound < 1e-300) {
        converged = true;
        break;
      }
    }
  }
  return FluctuationResult{head + tail, bound, converged && bound <= 1e-10};
}

inline double fluctuation_function(double alpha, double a, double beta) {
  FluctuationResult r = fluctuation_function_checked(alpha, a, beta);
  if (!r.converged) throw std::runtime_error("fluctuation_function: tail truncation error estimate above 1e-10");
  return r.value;
}

}  // namespace susc
