#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "susc/loss.hpp"
#include "susc/model.hpp"
#include "susc/quadrature.hpp"

namespace susc {

/// Axis-aligned affine slice of the box W: some coordinates pinned, the rest free.
struct Submanifold {
  std::map<int, double> fixed;

  static Submanifold full() { return Submanifold{}; }

  static Submanifold slice(std::map<int, double> fixed_coords) { return Submanifold{std::move(fixed_coords)}; }

  static Submanifold point(const std::vector<double>& w) {
    Submanifold s;
    for (std::size_t i = 0; i < w.size(); ++i) s.fixed[static_cast<int>(i)] = w[i];
    return s;
  }

  std::vector<int> free_coords(int d) const {
    std::vector<int> out;
    for (int i = 0; i < d; ++i)
      if (!fixed.count(i)) out.push_back(i);
    return out;
  }

  bool is_full() const { return fixed.empty(); }
  bool is_point(int d) const { return static_cast<int>(fixed.size()) == d; }

  std::string key() const {
    std::string s;
    for (const auto& [i, v] : fixed) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%d:%.17g;", i, v);
      s += buf;
    }
    return s;
  }

  bool operator==(const Submanifold& o) const { return fixed == o.fixed; }
};

enum class PosteriorMode { population, empirical };

struct QuadratureConfig {
  int nodes = 128;        // Gauss-Legendre nodes per panel per free dimension
  int refine_depth = 4;   // dyadic halvings inside the concentration radius
  double underflow_threshold = 1e-290;
};

/// Tempered posterior specification. Population mode depends on (n, beta) only
/// through the product n*beta.
struct TemperedPosteriorSpec {
  const ModelFamily* model = nullptr;
  PosteriorMode mode = PosteriorMode::population;
  const Dataset* data = nullptr;
  double n = 1.0;
  double beta = 1.0;
  Submanifold support;

  TemperedPosteriorSpec() = default;

  static TemperedPosteriorSpec population(const ModelFamily& m, double nbeta, Submanifold sub = {}) {
    TemperedPosteriorSpec s;
    s.model = &m;
    s.mode = PosteriorMode::population;
    s.n = 1.0;
    s.beta = nbeta;
    s.support = std::move(sub);
    return s;
  }

  static TemperedPosteriorSpec empirical(const ModelFamily& m, const Dataset& d, double beta, Submanifold sub = {}) {
    TemperedPosteriorSpec s;
    s.model = &m;
    s.mode = PosteriorMode::empirical;
    s.data = &d;
    s.n = static_cast<double>(d.size());
    s.beta = beta;
    s.support = std::move(sub);
    return s;
  }

  double nbeta() const { return n * beta; }

  void validate() const {
    if (!model) throw std::invalid_argument("posterior spec: missing model");
    if (beta < 0.0) throw std::invalid_argument("posterior spec: negative inverse temperature");
    if (mode == PosteriorMode::empirical && !data)
      throw std::invalid_argument("posterior spec: empirical mode requires a dataset");
    for (const auto& [i, v] : support.fixed) {
      if (i < 0 || i >= model->dim()) throw std::invalid_argument("posterior spec: fixed coordinate out of range");
      if (v < model->domain().lo[i] - 1e-12 || v > model->domain().hi[i] + 1e-12)
        throw std::invalid_argument("posterior spec: fixed coordinate outside box");
    }
  }
};

/// Expectation with Monte Carlo batch information (empty for deterministic backends).
struct ExpectStat {
  double mean = 0.0;
  double mc_std_err = 0.0;
  std::vector<double> batch_means;
};

/// Evaluates expectations under full/restricted tempered posteriors.
class PosteriorBackend {
 public:
  virtual ~PosteriorBackend() = default;

  virtual const ModelFamily& model() const = 0;
  virtual PosteriorMode mode() const = 0;
  virtual double nbeta() const = 0;

  /// E_{Pi^sub}[p(w)] for a polynomial integrand.
  virtual double expect_poly(const Submanifold& sub, const WPoly& p) = 0;

  /// Same with sampling-error information when the backend is stochastic.
  virtual ExpectStat expect_poly_stat(const Submanifold& sub, const WPoly& p) {
    return ExpectStat{expect_poly(sub, p), 0.0, {}};
  }

  /// The loss realization G targeted by this backend (K or K_n) as a polynomial;
  /// Leibniz coefficients differentiate this.
  virtual const WPoly& loss_realization() const = 0;

  /// The dataset behind an empirical backend, nullptr in population mode.
  virtual const Dataset* dataset() const { return nullptr; }

  /// Hint that several polynomial integrands will be evaluated on a support;
  /// deterministic backends batch the underlying sweeps.
  virtual void prefetch_polys(const Submanifold&, const std::vector<const WPoly*>&) {}

  virtual bool has_partition_function() const { return false; }
  virtual double partition_function(const Submanifold&) {
    throw std::runtime_error("posterior backend: partition function unavailable");
  }
};

/// Deterministic tensor Gauss-Legendre backend with graded panels near the
/// zero locus of the loss and log-space weight accumulation.
class QuadratureBackend : public PosteriorBackend {
 public:
  QuadratureBackend(TemperedPosteriorSpec spec, QuadratureConfig cfg = {}, WPoly loss_tilt = {})
      : spec_(std::move(spec)), cfg_(cfg) {
    spec_.validate();
    const ModelFamily& m = *spec_.model;
    loss_ = (spec_.mode == PosteriorMode::population) ? m.loss_poly() : empirical_loss_poly(m, *spec_.data);
    if (!loss_tilt.empty()) {
      if (loss_tilt.dim() != m.dim()) throw std::invalid_argument("loss tilt: dimension mismatch");
      loss_ += loss_tilt;
    }
    // normalization of the prior |w^h| over the full box, exact monomial integrals
    log_prior_norm_ = 0.0;
    for (int i = 0; i < m.dim(); ++i)
      log_prior_norm_ += std::log(abs_power_integral(m.domain().lo[i], m.domain().hi[i], m.h()[i]));
  }

  const ModelFamily& model() const override { return *spec_.model; }
  PosteriorMode mode() const override { return spec_.mode; }
  double nbeta() const override { return spec_.nbeta(); }
  const WPoly& loss_realization() const override { return loss_; }
  const Dataset* dataset() const override { return spec_.data; }
  const TemperedPosteriorSpec& spec() const { return spec_; }
  const QuadratureConfig& config() const { return cfg_; }

  /// Batched moment computation for several integrands at once.
  void prefetch_many(const Submanifold& sub, const std::vector<const WPoly*>& ps) {
    auto& cache = moments_[sub.key()];
    std::vector<MultiIndex> missing;
    std::set<MultiIndex> seen;
    MultiIndex zero(model().dim(), 0);
    if (!cache.count(zero)) {
      missing.push_back(zero);
      seen.insert(zero);
    }
    for (const WPoly* p : ps)
      for (const auto& [e, c] : p->terms())
        if (!cache.count(e) && seen.insert(e).second) missing.push_back(e);
    if (!missing.empty()) compute_moments(sub, missing, cache);
  }

  double expect_poly(const Submanifold& sub, const WPoly& p) override {
    prefetch(sub, p);
    double z = moment(sub, MultiIndex(model().dim(), 0));
    if (z < cfg_.underflow_threshold)
      throw std::runtime_error("posterior mass underflow; increase resolution or reduce nbeta");
    double num = 0.0;
    for (const auto& [e, c] : p.terms()) num += c * moment(sub, e);
    return num / z;
  }

  void prefetch_polys(const Submanifold& sub, const std::vector<const WPoly*>& ps) override {
    prefetch_many(sub, ps);
  }

  /// Expectation of a general integrand on the default support of the spec.
  double expect(const std::function<double(const std::vector<double>&)>& fn) { return expect(spec_.support, fn); }

  double expect(const Submanifold& sub, const std::function<double(const std::vector<double>&)>& fn) {
    double z = raw_integral(sub, [](const std::vector<double>&) { return 1.0; });
    if (z < cfg_.underflow_threshold)
      throw std::runtime_error("posterior mass underflow; increase resolution or reduce nbeta");
    return raw_integral(sub, fn) / z;
  }

  bool has_partition_function() const override { return true; }

  /// Z^sub = int_sub exp(-nbeta G) phi dvol with the prior normalized over W.
  double partition_function(const Submanifold& sub) override {
    double z = moment(sub, MultiIndex(model().dim(), 0));
    if (z < cfg_.underflow_threshold)
      throw std::runtime_error("posterior mass underflow; increase resolution or reduce nbeta");
    return z;
  }

  double partition_function() { return partition_function(spec_.support); }

  /// Raw moment int_sub w^e exp(-nbeta G) phi dvol, cached per support.
  double moment(const Submanifold& sub, const MultiIndex& e) {
    auto& cache = moments_[sub.key()];
    auto it = cache.find(e);
    if (it != cache.end()) return it->second;
    compute_moments(sub, {e}, cache);
    return cache.at(e);
  }

  /// Batched variant: one tensor sweep for all missing exponents of p.
  void prefetch(const Submanifold& sub, const WPoly& p) {
    auto& cache = moments_[sub.key()];
    std::vector<MultiIndex> missing;
    MultiIndex zero(model().dim(), 0);
    if (!cache.count(zero)) missing.push_back(zero);
    for (const auto& [e, c] : p.terms())
      if (!cache.count(e)) missing.push_back(e);
    if (!missing.empty()) compute_moments(sub, missing, cache);
  }

 private:
  static double abs_power_integral(double a, double b, int h) {
    // int_a^b |t|^h dt
    auto prim = [h](double t) { return std::pow(std::abs(t), h + 1) / (h + 1) * (t < 0 ? -1.0 : 1.0); };
    return prim(b) - prim(a);
  }

  struct DimMesh {
    int coord = 0;
    std::vector<double> breaks;
    std::vector<double> x;    // node coordinates, panel-ordered
    std::vector<double> qw;   // node quadrature weights
    std::vector<double> lp;   // h_i * log|x| per node
  };

  DimMesh build_mesh(int coord) const {
    const ModelFamily& m = *spec_.model;
    DimMesh mesh;
    mesh.coord = coord;
    double lo = m.domain().lo[coord], hi = m.domain().hi[coord];
    double nb = spec_.nbeta() * m.loss_scale();
    double radius = (nb > 1.0) ? 2.0 * std::pow(nb, -1.0 / (2.0 * m.k()[coord])) : (hi - lo);
    mesh.breaks = graded_breakpoints(lo, hi, 0.0, radius, cfg_.refine_depth);
    const Rule1D& gl = gauss_legendre(cfg_.nodes);
    for (std::size_t p = 0; p + 1 < mesh.breaks.size(); ++p) {
      double a = mesh.breaks[p], b = mesh.breaks[p + 1];
      double c = 0.5 * (b - a), mid = 0.5 * (a + b);
      for (int j = 0; j < cfg_.nodes; ++j) {
        double x = mid + c * gl.x[j];
        mesh.x.push_back(x);
        mesh.qw.push_back(c * gl.w[j]);
        mesh.lp.push_back(m.h()[coord] > 0 ? m.h()[coord] * std::log(std::abs(x)) : 0.0);
      }
    }
    return mesh;
  }

  void compute_moments(const Submanifold& sub, const std::vector<MultiIndex>& targets,
                       std::map<MultiIndex, double>& cache) {
    const ModelFamily& m = *spec_.model;
    const int d = m.dim();
    std::vector<int> free = sub.free_coords(d);
    if (static_cast<int>(free.size()) > 3)
      throw std::invalid_argument("quadrature backend: dimension capped at 3 free coordinates; use sgld");

    // constant factors from fixed coordinates
    double log_fixed = -log_prior_norm_;
    for (const auto& [i, v] : sub.fixed) {
      if (m.h()[i] > 0) {
        if (v == 0.0) throw std::runtime_error("restricted support has zero prior mass (|w|^h vanishes)");
        log_fixed += m.h()[i] * std::log(std::abs(v));
      }
    }
    WPoly loss_here = sub.fixed.empty() ? loss_ : loss_.restrict_coords(sub.fixed);

    if (free.empty()) {
      // point support: the "integral" is the density value at the point
      std::vector<double> w(d, 0.0);
      for (const auto& [i, v] : sub.fixed) w[i] = v;
      double lw = -spec_.nbeta() * loss_here.eval(w) + log_fixed;
      for (const auto& e : targets) {
        double mono = 1.0;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < e[i]; ++j) mono *= w[i];
        cache[e] = mono * std::exp(lw);
      }
      return;
    }

    std::vector<DimMesh> mesh;
    for (int c : free) mesh.push_back(build_mesh(c));

    // per-dim power tables up to the max exponent appearing in loss or targets
    std::vector<int> maxexp(free.size(), 0);
    auto bump = [&](const MultiIndex& e) {
      for (std::size_t fi = 0; fi < free.size(); ++fi) maxexp[fi] = std::max(maxexp[fi], e[free[fi]]);
    };
    for (const auto& [e, c] : loss_here.terms()) bump(e);
    for (const auto& e : targets) bump(e);
    std::vector<std::vector<double>> pow_tab(free.size());
    for (std::size_t fi = 0; fi < free.size(); ++fi) {
      const auto& xs = mesh[fi].x;
      pow_tab[fi].assign(xs.size() * (maxexp[fi] + 1), 1.0);
      for (std::size_t j = 0; j < xs.size(); ++j)
        for (int p = 1; p <= maxexp[fi]; ++p) pow_tab[fi][j * (maxexp[fi] + 1) + p] = pow_tab[fi][j * (maxexp[fi] + 1) + p - 1] * xs[j];
    }

    // flatten loss terms for fast per-node evaluation over free dims
    struct FlatTerm {
      double c;
      std::vector<int> exp;  // per free dim
    };
    std::vector<FlatTerm> lt;
    for (const auto& [e, c] : loss_here.terms()) {
      FlatTerm t;
      t.c = c;
      for (int fc : free) t.exp.push_back(e[fc]);
      lt.push_back(std::move(t));
    }
    std::vector<std::vector<int>> texp(targets.size(), std::vector<int>(free.size()));
    std::vector<double> tfix(targets.size(), 1.0);
    for (std::size_t t = 0; t < targets.size(); ++t) {
      for (std::size_t fi = 0; fi < free.size(); ++fi) texp[t][fi] = targets[t][free[fi]];
      for (const auto& [i, v] : sub.fixed)
        for (int j = 0; j < targets[t][i]; ++j) tfix[t] *= v;
    }

    const double nb = spec_.nbeta();
    const std::size_t nfree = free.size();
    std::vector<std::size_t> sizes(nfree);
    for (std::size_t fi = 0; fi < nfree; ++fi) sizes[fi] = mesh[fi].x.size();

    auto node_logweight = [&](const std::vector<std::size_t>& idx) {
      double g = 0.0;
      for (const auto& t : lt) {
        double v = t.c;
        for (std::size_t fi = 0; fi < nfree; ++fi) v *= pow_tab[fi][idx[fi] * (maxexp[fi] + 1) + t.exp[fi]];
        g += v;
      }
      double lw = -nb * g;
      for (std::size_t fi = 0; fi < nfree; ++fi) lw += mesh[fi].lp[idx[fi]];
      return lw;
    };

    // pass 1: max log-weight for the stabilizing shift
    double lw_max = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(nfree, 0);
    for (;;) {
      lw_max = std::max(lw_max, node_logweight(idx));
      std::size_t fi = 0;
      while (fi < nfree && ++idx[fi] == sizes[fi]) idx[fi++] = 0;
      if (fi == nfree) break;
    }

    // pass 2: accumulate row sums (innermost dimension), pairwise-reduce rows
    std::vector<std::vector<double>> rows(targets.size());
    std::fill(idx.begin(), idx.end(), 0);
    std::vector<double> rowacc(targets.size());
    for (;;) {
      std::fill(rowacc.begin(), rowacc.end(), 0.0);
      for (idx[0] = 0; idx[0] < sizes[0]; ++idx[0]) {
        double lw = node_logweight(idx);
        double qw = std::exp(lw - lw_max);
        for (std::size_t fi = 0; fi < nfree; ++fi) qw *= mesh[fi].qw[idx[fi]];
        for (std::size_t t = 0; t < targets.size(); ++t) {
          double v = qw;
          for (std::size_t fi = 0; fi < nfree; ++fi) v *= pow_tab[fi][idx[fi] * (maxexp[fi] + 1) + texp[t][fi]];
          rowacc[t] += v;
        }
      }
      for (std::size_t t = 0; t < targets.size(); ++t) rows[t].push_back(rowacc[t]);
      std::size_t fi = 1;
      idx[0] = 0;
      while (fi < nfree && ++idx[fi] == sizes[fi]) idx[fi++] = 0;
      if (fi >= nfree && nfree > 1) break;
      if (nfree == 1) break;
    }

    const double scale = std::exp(lw_max + log_fixed);
    for (std::size_t t = 0; t < targets.size(); ++t) cache[targets[t]] = scale * tfix[t] * pairwise_sum(rows[t]);
  }

  double raw_integral(const Submanifold& sub, const std::function<double(const std::vector<double>&)>& fn) {
    const ModelFamily& m = *spec_.model;
    const int d = m.dim();
    std::vector<int> free = sub.free_coords(d);
    if (static_cast<int>(free.size()) > 3)
      throw std::invalid_argument("quadrature backend: dimension capped at 3 free coordinates; use sgld");

    double log_fixed = -log_prior_norm_;
    for (const auto& [i, v] : sub.fixed) {
      if (m.h()[i] > 0) {
        if (v == 0.0) throw std::runtime_error("restricted support has zero prior mass (|w|^h vanishes)");
        log_fixed += m.h()[i] * std::log(std::abs(v));
      }
    }
    std::vector<double> w(d, 0.0);
    for (const auto& [i, v] : sub.fixed) w[i] = v;

    if (free.empty()) return std::exp(-spec_.nbeta() * loss_.eval(w) + log_fixed) * fn(w);

    std::vector<DimMesh> mesh;
    for (int c : free) mesh.push_back(build_mesh(c));
    const std::size_t nfree = free.size();
    std::vector<std::size_t> sizes(nfree);
    for (std::size_t fi = 0; fi < nfree; ++fi) sizes[fi] = mesh[fi].x.size();

    // pass 1: max log-weight
    double lw_max = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(nfree, 0);
    auto set_point = [&]() {
      for (std::size_t fi = 0; fi < nfree; ++fi) w[free[fi]] = mesh[fi].x[idx[fi]];
    };
    auto lw_at = [&]() {
      double lw = -spec_.nbeta() * loss_.eval(w);
      for (std::size_t fi = 0; fi < nfree; ++fi) lw += mesh[fi].lp[idx[fi]];
      return lw;
    };
    for (;;) {
      set_point();
      lw_max = std::max(lw_max, lw_at());
      std::size_t fi = 0;
      while (fi < nfree && ++idx[fi] == sizes[fi]) idx[fi++] = 0;
      if (fi == nfree) break;
    }

    std::vector<double> rows;
    std::fill(idx.begin(), idx.end(), 0);
    for (;;) {
      double rowacc = 0.0;
      for (idx[0] = 0; idx[0] < sizes[0]; ++idx[0]) {
        set_point();
        double qw = std::exp(lw_at() - lw_max);
        for (std::size_t fi = 0; fi < nfree; ++fi) qw *= mesh[fi].qw[idx[fi]];
        rowacc += qw * fn(w);
      }
      rows.push_back(rowacc);
      std::size_t fi = 1;
      idx[0] = 0;
      while (fi < nfree && ++idx[fi] == sizes[fi]) idx[fi++] = 0;
      if (fi >= nfree && nfree > 1) break;
      if (nfree == 1) break;
    }
    return std::exp(lw_max + log_fixed) * pairwise_sum(rows);
  }

  TemperedPosteriorSpec spec_;
  QuadratureConfig cfg_;
  WPoly loss_;
  double log_prior_norm_ = 0.0;
  std::map<std::string, std::map<MultiIndex, double>> moments_;
};

namespace detail {

/// int_alpha^beta t^e dt
inline double monomial_integral(double alpha, double beta, int e) {
  auto prim = [e](double t) { return std::pow(t, e + 1) / (e + 1); };
  return prim(beta) - prim(alpha);
}

struct LevelSetDim {
  double lo, hi;
  int two_k;  // 2 k_i
  int exp;    // integrand exponent on this coordinate
};

/// Recursive integral of prod w^exp over {prod w^{2k} <= budget} intersected
/// with the box slices.  The innermost dimension is handled with the exact
/// constraint boundary; outer dimensions split panels where the inner bound
/// saturates.
inline double level_set_integral(const std::vector<LevelSetDim>& dims, std::size_t j, double budget, int nodes) {
  if (budget <= 0.0) return 0.0;
  const LevelSetDim& d = dims[j];
  const double L = std::pow(budget, 1.0 / d.two_k);  // |w| <= L
  if (j + 1 == dims.size()) {
    double a = std::max(d.lo, -L), b = std::min(d.hi, L);
    if (a >= b) return 0.0;
    return monomial_integral(a, b, d.exp);
  }
  // smallest attainable value of prod_{i>j} w^{2k} over the inner box
  double min_inner = 1.0;
  for (std::size_t i = j + 1; i < dims.size(); ++i) {
    double mlo = (dims[i].lo > 0.0) ? dims[i].lo : ((dims[i].hi < 0.0) ? -dims[i].hi : 0.0);
    min_inner *= std::pow(mlo, dims[i].two_k);
  }
  double a = d.lo, b = d.hi;
  if (min_inner > 0.0) {
    double Lj = std::pow(budget / min_inner, 1.0 / d.two_k);
    a = std::max(a, -Lj);
    b = std::min(b, Lj);
  }
  if (a >= b) return 0.0;
  // breakpoints where the next dimension's bound crosses its box ends
  std::vector<double> brk{0.0};
  const LevelSetDim& nx = dims[j + 1];
  double min_rest = 1.0;  // min attainable product over dims after the next one
  for (std::size_t i = j + 2; i < dims.size(); ++i) {
    double mlo = (dims[i].lo > 0.0) ? dims[i].lo : ((dims[i].hi < 0.0) ? -dims[i].hi : 0.0);
    min_rest *= std::pow(mlo, dims[i].two_k);
  }
  for (double endpt : {std::abs(nx.lo), std::abs(nx.hi)}) {
    if (endpt <= 0.0 || min_rest <= 0.0) continue;
    double denom = std::pow(endpt, nx.two_k) * min_rest;
    double ws = std::pow(budget / denom, 1.0 / d.two_k);
    brk.push_back(ws);
    brk.push_back(-ws);
  }
  std::sort(brk.begin(), brk.end());
  brk.erase(std::remove_if(brk.begin(), brk.end(), [&](double t) { return t < a - 1e-15 || t > b + 1e-15; }), brk.end());
  brk.insert(brk.begin(), a);
  brk.push_back(b);
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end(), [](double x, double y) { return std::abs(x - y) < 1e-14; }), brk.end());

  const Rule1D& gl = gauss_legendre(nodes);
  std::vector<double> panel_sums;
  for (std::size_t p = 0; p + 1 < brk.size(); ++p) {
    double c = 0.5 * (brk[p + 1] - brk[p]), mid = 0.5 * (brk[p] + brk[p + 1]);
    if (c <= 0.0) continue;
    double s = 0.0;
    for (int q = 0; q < nodes; ++q) {
      double w = mid + c * gl.x[q];
      double mono = std::pow(w, d.exp);
      double inner_budget = budget / std::pow(std::abs(w), d.two_k);
      s += gl.w[q] * mono * level_set_integral(dims, j + 1, inner_budget, nodes);
    }
    panel_sums.push_back(c * s);
  }
  return pairwise_sum(panel_sums);
}

}  // namespace detail

/// Moments of the uniform distribution on {K <= eps} intersected with an
/// axis-aligned support slice.
class LevelSetMoments {
 public:
  LevelSetMoments(const ModelFamily& model, double eps, Submanifold sub = {}, int nodes = 64)
      : model_(&model), eps_(eps), sub_(std::move(sub)), nodes_(nodes) {
    if (!(eps > 0.0)) throw std::invalid_argument("level set: eps must be positive");
    c0_ = model.loss_scale();
    for (const auto& [i, v] : sub_.fixed) c0_ *= std::pow(v, 2 * model.k()[i]);
  }

  /// int over the level set of prod w^e (fixed coords contribute constants).
  double integral(const MultiIndex& e) const {
    const int d = model_->dim();
    double fixed_factor = 1.0;
    for (const auto& [i, v] : sub_.fixed)
      for (int j = 0; j < e[i]; ++j) fixed_factor *= v;
    std::vector<int> free = sub_.free_coords(d);
    if (free.empty()) return fixed_factor * (c0_ <= eps_ ? 1.0 : 0.0);
    if (c0_ == 0.0) {
      // a pinned coordinate kills the loss; the level set is the whole slice
      double vol = fixed_factor;
      for (int i : free) vol *= detail::monomial_integral(model_->domain().lo[i], model_->domain().hi[i], e[i]);
      return vol;
    }
    std::vector<detail::LevelSetDim> dims;
    for (int i : free)
      dims.push_back({model_->domain().lo[i], model_->domain().hi[i], 2 * model_->k()[i], e[i]});
    return fixed_factor * detail::level_set_integral(dims, 0, eps_ / c0_, nodes_);
  }

  double volume() const { return integral(MultiIndex(model_->dim(), 0)); }

  double expect_poly(const WPoly& p) const {
    double vol = volume();
    if (!(vol > 0.0)) throw std::runtime_error("level set is empty on the support");
    double num = 0.0;
    for (const auto& [e, c] : p.terms()) num += c * integral(e);
    return num / vol;
  }

 private:
  const ModelFamily* model_;
  double eps_;
  Submanifold sub_;
  int nodes_;
  double c0_;
};

/// Expectation of a polynomial integrand under the uniform distribution on
/// {K <= eps} intersected with the support.
inline double level_set_expect(const ModelFamily& model, double eps, const Submanifold& support, const WPoly& integrand) {
  return LevelSetMoments(model, eps, support).expect_poly(integrand);
}

}  // namespace susc
