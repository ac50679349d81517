// Test-only oracles, independent of the production evaluation paths:
// Gauss-Hermite x-integration, finite differences, order statistics, and a
// cyclic-Jacobi pseudoinverse used to cross-check the ridge solver.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "susc/quadrature.hpp"

namespace oracle {

/// int g(x) q(x) dx with q standard normal, by 64-node Gauss-Hermite.
inline double gauss_expect(const std::function<double(double)>& g, int nodes = 64) {
  const susc::Rule1D& r = susc::gauss_hermite_prob(nodes);
  double s = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * g(r.x[i]);
  return s;
}

/// Central finite difference d/dt f at 0, 5-point stencil, O(h^4).
inline double fd_derivative(const std::function<double(double)>& f, double h) {
  return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
}

/// Second derivative, 5-point stencil, O(h^4).
inline double fd_second(const std::function<double(double)>& f, double h) {
  return (-f(2 * h) + 16 * f(h) - 30 * f(0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h);
}

/// Third derivative, central stencil, O(h^2).
inline double fd_third(const std::function<double(double)>& f, double h) {
  return (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h * h * h);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double std_error(const std::vector<double>& v) {
  double m = mean(v), s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (static_cast<double>(v.size()) - 1.0) / static_cast<double>(v.size()));
}

/// Least-squares slope of y against x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = mean(x), my = mean(y), num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

/// Moore-Penrose pseudoinverse via cyclic-Jacobi eigendecomposition of A A^T,
/// written against plain vectors so it shares nothing with the ridge path.
/// A is H x m row-major; returns m x H row-major.  The rank cutoff must sit
/// above the Jacobi noise floor of the Gram matrix (lambda_max * eps), which a
/// sigma <= 1e-10 sigma_max rule cannot do; 1e-7 relative in sigma units works.
inline std::vector<double> jacobi_pseudoinverse(const std::vector<double>& A, int H, int m,
                                                double rel_cutoff = 1e-7) {
  // B = A A^T (H x H symmetric)
  std::vector<double> B(H * H, 0.0);
  for (int i = 0; i < H; ++i)
    for (int j = 0; j < H; ++j) {
      double s = 0.0;
      for (int l = 0; l < m; ++l) s += A[i * m + l] * A[j * m + l];
      B[i * H + j] = s;
    }
  // eigendecomposition B = V diag(lam) V^T by cyclic Jacobi rotations
  std::vector<double> V(H * H, 0.0);
  for (int i = 0; i < H; ++i) V[i * H + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < H; ++p)
      for (int q = p + 1; q < H; ++q) off += B[p * H + q] * B[p * H + q];
    if (off < 1e-30) break;
    for (int p = 0; p < H; ++p)
      for (int q = p + 1; q < H; ++q) {
        double bpq = B[p * H + q];
        if (std::abs(bpq) < 1e-300) continue;
        double theta = 0.5 * std::atan2(2.0 * bpq, B[q * H + q] - B[p * H + p]);
        double c = std::cos(theta), s = std::sin(theta);
        for (int l = 0; l < H; ++l) {
          double bpl = B[p * H + l], bql = B[q * H + l];
          B[p * H + l] = c * bpl - s * bql;
          B[q * H + l] = s * bpl + c * bql;
        }
        for (int l = 0; l < H; ++l) {
          double blp = B[l * H + p], blq = B[l * H + q];
          B[l * H + p] = c * blp - s * blq;
          B[l * H + q] = s * blp + c * blq;
        }
        for (int l = 0; l < H; ++l) {
          double vlp = V[l * H + p], vlq = V[l * H + q];
          V[l * H + p] = c * vlp - s * vlq;
          V[l * H + q] = s * vlp + c * vlq;
        }
      }
  }
  std::vector<double> lam(H);
  double lam_max = 0.0;
  for (int i = 0; i < H; ++i) {
    lam[i] = std::max(B[i * H + i], 0.0);
    lam_max = std::max(lam_max, lam[i]);
  }
  // A^+ = A^T V diag(1/lam) V^T with small eigenvalues dropped
  double cut = lam_max * rel_cutoff * rel_cutoff;  // eigenvalues of AA^T are sigma^2
  std::vector<double> P(m * H, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < H; ++j) {
      double s = 0.0;
      for (int a = 0; a < H; ++a) {
        if (lam[a] <= cut || lam[a] == 0.0) continue;
        double via = 0.0;
        for (int l = 0; l < H; ++l) via += A[l * m + i] * V[l * H + a];
        s += via * V[j * H + a] / lam[a];
      }
      P[i * H + j] = s;
    }
  return P;
}

}  // namespace oracle
