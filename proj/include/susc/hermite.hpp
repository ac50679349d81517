#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace susc {

/// He_m(x), probabilists' Hermite polynomial, by the three-term recurrence
/// He_{m+1} = x He_m - m He_{m-1}.
inline double hermite_he(int m, double x) {
  if (m < 0) throw std::invalid_argument("hermite_he: negative index");
  double h0 = 1.0, h1 = x;
  if (m == 0) return h0;
  if (m == 1) return h1;
  for (int j = 1; j < m; ++j) {
    double h2 = x * h1 - static_cast<double>(j) * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

/// Monomial coefficients of He_m: returns c with He_m(x) = sum_r c[r] x^r.
inline std::vector<double> hermite_coeffs(int m) {
  if (m < 0) throw std::invalid_argument("hermite_coeffs: negative index");
  std::vector<double> prev{1.0};
  if (m == 0) return prev;
  std::vector<double> cur{0.0, 1.0};
  for (int j = 1; j < m; ++j) {
    std::vector<double> next(j + 2, 0.0);
    for (int r = 0; r <= j; ++r) next[r + 1] += cur[r];       // x * He_j
    for (int r = 0; r < j; ++r) next[r] -= j * prev[r];        // - j He_{j-1}
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

/// E[x^r] under the standard Gaussian: (r-1)!! for even r, 0 for odd r.
inline double gaussian_moment(int r) {
  if (r < 0) throw std::invalid_argument("gaussian_moment: negative power");
  if (r % 2 == 1) return 0.0;
  double m = 1.0;
  for (int j = r - 1; j >= 1; j -= 2) m *= static_cast<double>(j);
  return m;
}

/// E[He_m(x) x^r] under the standard Gaussian, by expanding He_m into monomials.
inline double hermite_x_moment(int m, int r) {
  auto c = hermite_coeffs(m);
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j)
    if (c[j] != 0.0) s += c[j] * gaussian_moment(static_cast<int>(j) + r);
  return s;
}

}  // namespace susc
