#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "susc/model.hpp"

namespace susc {

inline constexpr int kMaxDerivativeOrder = 8;

inline double population_loss(const ModelFamily& model, const std::vector<double>& w) {
  if (!model.domain().contains(w)) throw std::invalid_argument("population_loss: w outside domain");
  return model.loss_poly().eval(w);
}

/// K_n as an exact polynomial in w (the data enters through its power means).
inline WPoly empirical_loss_poly(const ModelFamily& model, const Dataset& data) {
  return model.f_lift().empirical_poly(data);
}

inline double empirical_loss(const ModelFamily& model, const Dataset& data, const std::vector<double>& w) {
  if (!model.domain().contains(w)) throw std::invalid_argument("empirical_loss: w outside domain");
  return empirical_loss_poly(model, data).eval(w);
}

/// Delta K(w) = int xi(x) f(x,w) q(x) dx, exact via Gaussian-Hermite pairings.
inline WPoly loss_variation_poly(const ModelFamily& model, const Perturbation& xi) {
  return model.f_lift().hermite_pairing_poly(xi.hermite_index, xi.scale);
}

inline double loss_variation(const ModelFamily& model, const Perturbation& xi, const std::vector<double>& w) {
  return loss_variation_poly(model, xi).eval(w);
}

/// Delta K_n(w) = (1/n) sum_j xi(x_j) f(x_j, w).
inline WPoly empirical_loss_variation_poly(const ModelFamily& model, const Perturbation& xi, const Dataset& data) {
  return model.f_lift().hermite_pairing_poly(xi.hermite_index, xi.scale, data);
}

inline double empirical_loss_variation(const ModelFamily& model, const Perturbation& xi, const Dataset& data,
                                       const std::vector<double>& w) {
  return empirical_loss_variation_poly(model, xi, data).eval(w);
}

/// Exact w-derivative of a lift, evaluated at (x, w).
inline double lift_derivative(const Lift& lift, const MultiIndex& beta, double x, const std::vector<double>& w,
                              int max_order = kMaxDerivativeOrder) {
  if (static_cast<int>(beta.size()) != lift.dim()) throw std::invalid_argument("lift_derivative: beta dimension mismatch");
  if (order(beta) > max_order) throw std::invalid_argument("lift_derivative: derivative order exceeds cap");
  return lift.derivative(beta).eval(x, w);
}

struct RfvReport {
  bool holds = false;
  double c0_hat = 0.0;
  std::optional<std::vector<double>> violation_point;  // E_q[psi] = 0 but E_q[psi^2] > 0
};

/// Relatively-finite-variance check on a grid away from the minimum locus of K:
/// E_q[psi^2] <= c0 |E_q[psi]|. Both moments are exact Gaussian integrals of
/// the polynomial-in-x lift.
inline RfvReport check_rfv(const Lift& lift, const ModelFamily& model, const std::vector<std::vector<double>>& grid,
                           double c0_max, double tube_radius = 1e-3) {
  WPoly mean = lift.population_poly();
  WPoly second = (lift * lift).population_poly();
  RfvReport rep;
  double worst = 0.0;
  for (const auto& w : grid) {
    if (model.distance_to_zero_locus(w) < tube_radius) continue;
    double m1 = mean.eval(w);
    double m2 = second.eval(w);
    if (std::abs(m1) < 1e-14) {
      if (m2 > 1e-12) {
        rep.holds = false;
        rep.c0_hat = std::numeric_limits<double>::infinity();
        rep.violation_point = w;
        return rep;
      }
      continue;
    }
    worst = std::max(worst, m2 / std::abs(m1));
  }
  rep.c0_hat = worst;
  rep.holds = worst <= c0_max;
  return rep;
}

/// Uniform grid over the domain for RFV checks (tube exclusion happens inside
/// check_rfv).
inline std::vector<std::vector<double>> domain_grid(const Box& box, int per_dim) {
  const int d = box.dim();
  std::vector<std::vector<double>> pts;
  std::vector<int> idx(d, 0);
  for (;;) {
    std::vector<double> w(d);
    for (int i = 0; i < d; ++i)
      w[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * (idx[i] + 0.5) / per_dim;
    pts.push_back(std::move(w));
    int i = 0;
    while (i < d && ++idx[i] == per_dim) idx[i++] = 0;
    if (i == d) break;
  }
  return pts;
}

}  // namespace susc
