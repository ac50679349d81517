#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "susc/posterior.hpp"

namespace susc {

inline constexpr int kMaxLeibnizOrder = 4;

/// One summand of an observable: the lift of a coefficient, a support slice,
/// normal derivative orders (on fixed coordinates) and tangential derivative
/// orders (on free coordinates, removed by reduce_tangential before any
/// evaluation).  The term pairs with a smooth F as
///   int_S g(v) (d^tangential_v d^normal_u F)|_S dv.
struct ObservableTerm {
  Lift lift;
  Submanifold support;
  MultiIndex normal;
  MultiIndex tangential;

  ObservableTerm(Lift g, Submanifold s, MultiIndex norm = {}, MultiIndex tang = {})
      : lift(std::move(g)), support(std::move(s)), normal(std::move(norm)), tangential(std::move(tang)) {
    const int d = lift.dim();
    if (normal.empty()) normal.assign(d, 0);
    if (tangential.empty()) tangential.assign(d, 0);
    if (static_cast<int>(normal.size()) != d || static_cast<int>(tangential.size()) != d)
      throw std::invalid_argument("observable term: multi-index dimension mismatch");
    for (int i = 0; i < d; ++i) {
      if (normal[i] > 0 && !support.fixed.count(i))
        throw std::invalid_argument("observable term: normal derivative on a free coordinate");
      if (tangential[i] > 0 && support.fixed.count(i))
        throw std::invalid_argument("observable term: tangential derivative on a fixed coordinate");
    }
  }

  int order() const { return susc::order(normal) + susc::order(tangential); }
  bool functional() const { return order() == 0; }
};

struct Observable {
  std::vector<ObservableTerm> terms;
  std::string decomposition_id;

  Observable() = default;
  Observable(std::vector<ObservableTerm> t, std::string id = "") : terms(std::move(t)), decomposition_id(std::move(id)) {}

  static Observable functional(Lift g, Submanifold s, std::string id = "") {
    return Observable({ObservableTerm(std::move(g), std::move(s))}, std::move(id));
  }

  /// Global order M of the differential operator.
  int order() const {
    int m = 0;
    for (const auto& t : terms) m = std::max(m, t.order());
    return m;
  }

  bool functional() const { return order() == 0; }
};

/// Integration by parts in the free coordinates of the support.  A term
/// carrying a tangential derivative d_{v_j} becomes a bulk term with
/// coefficient -d_{v_j} g on S plus face terms g * nu_j on the box faces
/// {v_j = lo}, {v_j = hi} with outward-normal signs nu_j = -1, +1.
/// Recurses until every term is purely normal.
inline std::vector<ObservableTerm> reduce_tangential(const ObservableTerm& term, const Box& box) {
  if (is_zero(term.tangential)) return {term};
  const int d = term.lift.dim();
  int j = -1;
  for (int i = 0; i < d; ++i)
    if (term.tangential[i] > 0) {
      j = i;
      break;
    }
  MultiIndex rest = term.tangential;
  rest[j] -= 1;

  std::vector<ObservableTerm> pieces;
  // bulk: sign-flipped tangential derivative of the lift
  {
    Lift dl = term.lift.derivative(j) * WPoly::constant(d, -1.0);
    pieces.emplace_back(std::move(dl), term.support, term.normal, rest);
  }
  // faces: fix v_j at the box ends with the outward-normal sign
  for (int side = 0; side < 2; ++side) {
    double v = (side == 0) ? box.lo[j] : box.hi[j];
    double sign = (side == 0) ? -1.0 : 1.0;
    Submanifold face = term.support;
    face.fixed[j] = v;
    MultiIndex face_rest = rest;  // tangential orders on other free coords survive on the face
    pieces.emplace_back(term.lift * WPoly::constant(d, sign), std::move(face), term.normal, face_rest);
  }

  std::vector<ObservableTerm> out;
  for (const auto& p : pieces) {
    auto sub = reduce_tangential(p, box);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

inline std::vector<ObservableTerm> reduce_tangential(const Observable& obs, const Box& box) {
  std::vector<ObservableTerm> out;
  for (const auto& t : obs.terms) {
    auto r = reduce_tangential(t, box);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

/// Symbolic Leibniz expansion of d^beta e^{-nbeta G + log phi}: a sum of
/// monomials in normal derivatives of G and of log phi, graded by the count
/// r of G-derivative factors (each of which carries one factor -nbeta).
struct LeibnizMonomial {
  std::vector<MultiIndex> g_factors;
  std::vector<MultiIndex> phi_factors;
  double coeff = 1.0;

  int rank() const { return static_cast<int>(g_factors.size()); }

  void canonicalize() {
    std::sort(g_factors.begin(), g_factors.end());
    std::sort(phi_factors.begin(), phi_factors.end());
  }

  bool same_shape(const LeibnizMonomial& o) const {
    return g_factors == o.g_factors && phi_factors == o.phi_factors;
  }
};

struct LeibnizExpansion {
  MultiIndex beta;
  std::vector<LeibnizMonomial> monomials;

  int max_rank() const {
    int r = 0;
    for (const auto& m : monomials) r = std::max(r, m.rank());
    return r;
  }
};

inline LeibnizExpansion leibniz_expand(const MultiIndex& beta) {
  if (order(beta) > kMaxLeibnizOrder) throw std::invalid_argument("leibniz_expand: order cap exceeded");
  const int d = static_cast<int>(beta.size());
  LeibnizExpansion exp;
  exp.beta = beta;
  exp.monomials = {LeibnizMonomial{}};  // d^0 e^h = e^h * 1
  for (int u = 0; u < d; ++u) {
    for (int rep = 0; rep < beta[u]; ++rep) {
      std::vector<LeibnizMonomial> next;
      for (const auto& mono : exp.monomials) {
        // product rule on existing factors
        for (std::size_t i = 0; i < mono.g_factors.size(); ++i) {
          LeibnizMonomial m = mono;
          m.g_factors[i][u] += 1;
          next.push_back(std::move(m));
        }
        for (std::size_t i = 0; i < mono.phi_factors.size(); ++i) {
          LeibnizMonomial m = mono;
          m.phi_factors[i][u] += 1;
          next.push_back(std::move(m));
        }
        // d_u h appended: h = -nbeta G + log phi, the G factor carries -nbeta
        MultiIndex e(d, 0);
        e[u] = 1;
        LeibnizMonomial mg = mono;
        mg.g_factors.push_back(e);
        next.push_back(std::move(mg));
        LeibnizMonomial mp = mono;
        mp.phi_factors.push_back(e);
        next.push_back(std::move(mp));
      }
      // merge identical shapes
      for (auto& m : next) m.canonicalize();
      std::vector<LeibnizMonomial> merged;
      for (auto& m : next) {
        bool found = false;
        for (auto& g : merged)
          if (g.same_shape(m)) {
            g.coeff += m.coeff;
            found = true;
            break;
          }
        if (!found) merged.push_back(std::move(m));
      }
      exp.monomials = std::move(merged);
    }
  }
  return exp;
}

/// d^delta log phi on the support for the prior |w^h|: nonzero only for pure
/// single-coordinate derivatives, where d^p_u log|u|^h = h (-1)^{p-1} (p-1)! / u^p.
inline double log_prior_derivative(const MultiIndex& delta, const MultiIndex& h, const Submanifold& sub) {
  int coord = -1;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (delta[i] == 0) continue;
    if (coord >= 0) return 0.0;  // mixed derivative of a separable log prior
    coord = static_cast<int>(i);
  }
  if (coord < 0) return 0.0;
  int p = delta[coord];
  if (h[coord] == 0) return 0.0;
  auto it = sub.fixed.find(coord);
  if (it == sub.fixed.end()) throw std::invalid_argument("log_prior_derivative: derivative on a free coordinate");
  double u = it->second;
  if (u == 0.0) throw std::runtime_error("log prior singular at a pinned zero coordinate");
  double fact = 1.0;
  for (int j = 1; j < p; ++j) fact *= j;
  return h[coord] * ((p % 2 == 1) ? 1.0 : -1.0) * fact / std::pow(u, p);
}

/// Realized Leibniz coefficients on a support: pairs (r_j, Q_j) with Q_j a
/// polynomial in w (G-derivatives stay polynomial; log-phi derivatives are
/// constants once the normal coordinates are pinned).
inline std::vector<std::pair<int, WPoly>> leibniz_coefficients(const LeibnizExpansion& exp, const WPoly& loss,
                                                               const MultiIndex& h, const Submanifold& sub) {
  const int d = loss.dim();
  std::vector<std::pair<int, WPoly>> by_rank;
  for (const auto& mono : exp.monomials) {
    double c = mono.coeff;
    for (const auto& delta : mono.phi_factors) {
      c *= log_prior_derivative(delta, h, sub);
      if (c == 0.0) break;
    }
    if (c == 0.0) continue;
    WPoly q = WPoly::constant(d, c);
    for (const auto& gamma : mono.g_factors) q = q * loss.derivative(gamma);
    int r = mono.rank();
    bool found = false;
    for (auto& [rr, poly] : by_rank)
      if (rr == r) {
        poly += q;
        found = true;
        break;
      }
    if (!found) by_rank.emplace_back(r, std::move(q));
  }
  std::sort(by_rank.begin(), by_rank.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  return by_rank;
}

/// A fully reduced, realized summand: a polynomial coefficient on a support
/// with the sign and rank data entering the restricted covariance.
struct PreparedTerm {
  WPoly coeff;
  Submanifold support;
  int beta_order = 0;  // |beta| of the normal operator this term came from
  int rank = 0;        // r_j, the count of G-derivative factors
};

/// Reduce an observable to functional form against a backend's loss
/// realization: tangential integration by parts, then Leibniz expansion of
/// the normal derivatives.  Coefficients use the population or empirical
/// realization of each lift according to the backend mode.
inline std::vector<PreparedTerm> prepare_terms(const Observable& obs, PosteriorBackend& be, bool leading_only = false) {
  const ModelFamily& m = be.model();
  if (be.mode() == PosteriorMode::empirical && !be.dataset())
    throw std::invalid_argument("prepare_terms: empirical backend without a dataset");
  std::vector<PreparedTerm> out;
  for (const ObservableTerm& raw : obs.terms) {
    for (const ObservableTerm& red : reduce_tangential(raw, m.domain())) {
      WPoly c = (be.mode() == PosteriorMode::population) ? red.lift.population_poly()
                                                         : red.lift.empirical_poly(*be.dataset());
      if (is_zero(red.normal)) {
        out.push_back(PreparedTerm{std::move(c), red.support, 0, 0});
        continue;
      }
      LeibnizExpansion exp = leibniz_expand(red.normal);
      int border = order(red.normal);
      for (auto& [r, q] : leibniz_coefficients(exp, be.loss_realization(), m.h(), red.support)) {
        if (leading_only && r != border) continue;
        out.push_back(PreparedTerm{c * q, red.support, border, r});
      }
    }
  }
  return out;
}

/// Restricted covariance of prepared functional terms against a loss
/// variation: sum_i pref_i [E_{Pi^{S_i}}(c_i dK) - E_{Pi^{S_i}}(c_i) E_Pi(dK)]
/// with pref_i = (-1)^{|beta_i|} (-nbeta)^{r_i} (nbeta)^{-M}.
inline double restricted_covariance(const std::vector<PreparedTerm>& terms, const WPoly& delta_k,
                                    PosteriorBackend& be, int global_order) {
  const double nb = be.nbeta();
  const Submanifold full = Submanifold::full();
  double e_dk = be.expect_poly(full, delta_k);
  double total = 0.0;
  for (const auto& t : terms) {
    WPoly cdk = t.coeff * delta_k;
    be.prefetch_polys(t.support, {&cdk, &t.coeff});
    double e_cdk = be.expect_poly(t.support, cdk);
    double e_c = be.expect_poly(t.support, t.coeff);
    double pref = ((t.beta_order % 2 == 0) ? 1.0 : -1.0) * std::pow(-nb, t.rank) * std::pow(nb, -global_order);
    total += pref * (e_cdk - e_c * e_dk);
  }
  return total;
}

/// Convenience wrapper for a functional observable (the general pipeline when
/// reduction and expansion are trivial).
inline double restricted_covariance(const Observable& obs, const WPoly& delta_k, PosteriorBackend& be) {
  auto terms = prepare_terms(obs, be);
  return restricted_covariance(terms, delta_k, be, obs.order());
}

/// Empirical counterpart: every lift's population x-moments replaced by
/// dataset averages; deterministic lifts are unchanged.
inline Observable empirical_observable(const Observable& obs, const Dataset& data) {
  Observable out;
  out.decomposition_id = obs.decomposition_id;
  for (const auto& t : obs.terms) {
    Lift emp(t.lift.dim());
    emp.set_coeff(0, t.lift.empirical_poly(data));
    out.terms.emplace_back(std::move(emp), t.support, t.normal, t.tangential);
  }
  return out;
}

}  // namespace susc
