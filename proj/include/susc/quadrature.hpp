#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace susc {

struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
};

namespace detail {

/// Gauss-Legendre nodes/weights on [-1,1], Newton iteration on P_n.
inline Rule1D gauss_legendre_compute(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  Rule1D rule;
  rule.x.resize(n);
  rule.w.resize(n);
  const int mid = (n + 1) / 2;
  for (int i = 0; i < mid; ++i) {
    // Chebyshev-based initial guess for the i-th root.
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p0 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    rule.x[i] = -z;
    rule.x[n - 1 - i] = z;
    rule.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.w[n - 1 - i] = rule.w[i];
  }
  return rule;
}

/// Gauss-Hermite nodes/weights for weight e^{-t^2} (physicists'), Newton iteration.
inline Rule1D gauss_hermite_compute(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n < 1");
  Rule1D rule;
  rule.x.resize(n);
  rule.w.resize(n);
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  const int mid = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < mid; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.x[1];
    } else {
      z = 2.0 * z - rule.x[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      double p0 = pim4, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = z * std::sqrt(2.0 / (j + 1.0)) * p1 - std::sqrt(static_cast<double>(j) / (j + 1.0)) * p2;
      }
      pp = std::sqrt(2.0 * n) * p1;
      double z1 = z;
      z = z1 - p0 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    rule.x[i] = z;
    rule.x[n - 1 - i] = -z;
    rule.w[i] = 2.0 / (pp * pp);
    rule.w[n - 1 - i] = rule.w[i];
  }
  return rule;
}

}  // namespace detail

/// Cached Gauss-Legendre rule on [-1,1].
inline const Rule1D& gauss_legendre(int n) {
  static std::map<int, Rule1D> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::gauss_legendre_compute(n)).first;
  return it->second;
}

/// Cached probabilists' Gauss-Hermite rule: nodes x_i and weights w_i with
/// sum_i w_i g(x_i) ~ int g(x) e^{-x^2/2}/sqrt(2 pi) dx.
inline const Rule1D& gauss_hermite_prob(int n) {
  static std::map<int, Rule1D> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    Rule1D phys = detail::gauss_hermite_compute(n);
    Rule1D prob;
    prob.x.resize(n);
    prob.w.resize(n);
    const double sqrt2 = std::sqrt(2.0);
    const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
    for (int i = 0; i < n; ++i) {
      prob.x[i] = sqrt2 * phys.x[i];
      prob.w[i] = phys.w[i] * inv_sqrt_pi;
    }
    it = cache.emplace(n, std::move(prob)).first;
  }
  return it->second;
}

/// Pairwise summation; deterministic regardless of how terms were produced.
inline double pairwise_sum(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  std::vector<double> buf = v;
  std::size_t n = buf.size();
  while (n > 1) {
    std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) buf[i] = buf[2 * i] + buf[2 * i + 1];
    if (n % 2 == 1) {
      buf[half] = buf[n - 1];
      ++half;
    }
    n = half;
  }
  return buf[0];
}

/// Integrate fn over [a,b] with an n-node Gauss-Legendre rule.
template <class F>
double integrate_gl(F&& fn, double a, double b, int n) {
  const Rule1D& r = gauss_legendre(n);
  const double c = 0.5 * (b - a), m = 0.5 * (a + b);
  std::vector<double> terms(r.x.size());
  for (std::size_t i = 0; i < r.x.size(); ++i) terms[i] = r.w[i] * fn(m + c * r.x[i]);
  return c * pairwise_sum(terms);
}

/// Panel breakpoints on [lo,hi], dyadically graded toward `sing` (a point of
/// concentration, typically 0) with the given refinement radius and depth.
/// Outside the refined zone panels double geometrically.
inline std::vector<double> graded_breakpoints(double lo, double hi, double sing, double radius, int depth) {
  std::vector<double> pts;
  pts.push_back(lo);
  pts.push_back(hi);
  auto push_side = [&](double from, double to) {
    // from = singular endpoint, to = far end, |to-from| > 0
    double len = std::abs(to - from);
    if (len <= 0.0) return;
    double r = std::min(radius, len);
    if (r <= 0.0) return;
    double sgn = (to > from) ? 1.0 : -1.0;
    // dyadic refinement inside [from, from + r]
    for (int j = 0; j <= depth; ++j) pts.push_back(from + sgn * r * std::pow(0.5, j));
    // geometric panels from r out to the far end
    double t = r;
    while (t * 2.0 < len) {
      t *= 2.0;
      pts.push_back(from + sgn * t);
    }
  };
  if (sing > lo && sing < hi) {
    pts.push_back(sing);
    push_side(sing, hi);
    push_side(sing, lo);
  } else if (sing <= lo) {
    push_side(lo, hi);
  } else {
    push_side(hi, lo);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [&](double a, double b) { return std::abs(a - b) < 1e-15 * (std::abs(hi) + std::abs(lo) + 1.0); }),
            pts.end());
  return pts;
}

}  // namespace susc
