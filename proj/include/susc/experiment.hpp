#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include <json.hpp>

#include "susc/config.hpp"
#include "susc/patterning.hpp"
#include "susc/sgld.hpp"
#include "susc/susceptibility.hpp"

namespace susc {

struct NamedObservable {
  std::string id;
  Observable observable;
};

struct NamedPerturbation {
  std::string id;
  Perturbation perturbation;
};

enum class BetaRule { fixed, one_over_log_n };

enum class BackendKind { quadrature, sgld };

struct ExperimentConfig {
  std::string model_id = "model";
  MultiIndex k, h;
  Box domain;
  double loss_scale = 0.5;

  std::vector<NamedObservable> observables;
  std::vector<NamedPerturbation> perturbations;

  std::vector<std::size_t> schedule;
  BetaRule beta_rule = BetaRule::one_over_log_n;
  double fixed_beta = 0.1;
  int replicates = 1;
  BackendKind backend = BackendKind::quadrature;
  bool practice_mode = false;  // keep only leading-order Leibniz terms

  QuadratureConfig quad;
  SgldConfig sgld;

  std::uint64_t master_seed = 1;
  int threads = 1;

  ConfigDoc doc;        // raw parsed config for run-specific tables
  std::string raw_text; // original bytes, hashed into the sidecar

  ModelFamily make_model() const { return ModelFamily(k, h, domain, loss_scale); }

  double beta_for(std::size_t n) const {
    if (beta_rule == BetaRule::fixed) return fixed_beta;
    if (n < 2) throw ConfigError("one_over_log_n rule needs n >= 2");
    return 1.0 / std::log(static_cast<double>(n));
  }
};

namespace detail {

inline Box parse_domain(const ConfigTable& t, int dim) {
  if (!t.has("domain")) return Box::unit(dim);
  const auto& rows = t.require("domain").as_array("domain");
  std::vector<double> lo, hi;
  for (const auto& r : rows) {
    const auto& pair = r.as_array("domain");
    if (pair.size() != 2) throw ConfigError("domain entries must be [lo, hi]", t.line);
    lo.push_back(pair[0].as_number("domain"));
    hi.push_back(pair[1].as_number("domain"));
  }
  return Box(lo, hi);
}

inline Submanifold parse_support(const ConfigTable& t, int dim) {
  Submanifold s;
  if (t.has("fixed")) {
    for (const auto& entry : t.require("fixed").as_array("fixed")) {
      const auto& pair = entry.as_array("fixed");
      if (pair.size() != 2) throw ConfigError("fixed entries must be [coord, value]", t.line);
      int c = static_cast<int>(pair[0].as_number("fixed"));
      if (c < 0 || c >= dim) throw ConfigError("fixed coordinate out of range", t.line);
      s.fixed[c] = pair[1].as_number("fixed");
    }
  }
  return s;
}

inline Observable parse_observable(const ConfigTable& t, const ModelFamily& model, const std::string& id) {
  const int d = model.dim();
  std::string kind = t.string_or("lift", "poly");
  Lift lift(d);
  if (kind == "poly") {
    for (const auto& term : t.require("terms").as_array("terms")) {
      const auto& row = term.as_array("terms");
      if (static_cast<int>(row.size()) != 2 + d)
        throw ConfigError("poly terms must be [x_degree, coeff, e_1..e_d]", t.line);
      int xdeg = static_cast<int>(row[0].as_number("terms"));
      double coeff = row[1].as_number("terms");
      MultiIndex e(d);
      for (int i = 0; i < d; ++i) e[i] = static_cast<int>(row[2 + i].as_number("terms"));
      lift.add_coeff(xdeg, WPoly::monomial(e, coeff));
    }
  } else if (kind == "component") {
    std::vector<double> wstar = t.number_list("w_star");
    if (static_cast<int>(wstar.size()) != d) throw ConfigError("w_star dimension mismatch", t.line);
    lift = model.f_lift() - model.f_lift().freeze_w(wstar);
  } else if (kind == "loss") {
    lift = model.f_lift();
  } else {
    throw ConfigError("unknown lift kind '" + kind + "'", t.line);
  }
  Submanifold support = parse_support(t, d);
  MultiIndex normal(d, 0), tangential(d, 0);
  if (t.has("normal")) normal = t.int_list("normal");
  if (t.has("tangential")) tangential = t.int_list("tangential");
  Observable obs({ObservableTerm(std::move(lift), std::move(support), normal, tangential)}, id);
  return obs;
}

}  // namespace detail

inline ExperimentConfig load_experiment(const ConfigDoc& doc, const std::string& raw_text = "") {
  ExperimentConfig cfg;
  cfg.doc = doc;
  cfg.raw_text = raw_text;

  const ConfigTable& m = doc.table("model");
  cfg.model_id = m.string_or("id", "model");
  cfg.k = m.int_list("k");
  cfg.h = m.int_list("h");
  for (int ki : cfg.k)
    if (ki < 1) throw ConfigError("model.k entries must be >= 1", m.line);
  cfg.domain = detail::parse_domain(m, static_cast<int>(cfg.k.size()));
  cfg.loss_scale = m.number_or("loss_scale", 0.5);

  ModelFamily model = cfg.make_model();
  int idx = 0;
  for (const auto& t : doc.array("observable")) {
    std::string id = t.string_or("id", "obs" + std::to_string(idx));
    cfg.observables.push_back({id, detail::parse_observable(t, model, id)});
    ++idx;
  }
  idx = 0;
  for (const auto& t : doc.array("perturbation")) {
    std::string id = t.string_or("id", "xi" + std::to_string(idx));
    Perturbation xi(static_cast<int>(t.number("hermite_index")), t.number_or("scale", 1.0));
    cfg.perturbations.push_back({id, xi});
    ++idx;
  }

  ConfigTable run = doc.table_or_empty("run");
  if (run.has("schedule"))
    for (double n : run.number_list("schedule")) {
      if (n < 1) throw ConfigError("run.schedule entries must be positive", run.line);
      cfg.schedule.push_back(static_cast<std::size_t>(n));
    }
  std::string rule = run.string_or("beta_rule", "one_over_log_n");
  if (rule == "fixed") cfg.beta_rule = BetaRule::fixed;
  else if (rule == "one_over_log_n") cfg.beta_rule = BetaRule::one_over_log_n;
  else throw ConfigError("run.beta_rule must be 'fixed' or 'one_over_log_n'", run.line);
  cfg.fixed_beta = run.number_or("beta", 0.1);
  cfg.replicates = static_cast<int>(run.number_or("replicates", 1));
  if (cfg.replicates < 1) throw ConfigError("run.replicates must be >= 1", run.line);
  std::string be = run.string_or("backend", "quadrature");
  if (be == "quadrature") cfg.backend = BackendKind::quadrature;
  else if (be == "sgld") cfg.backend = BackendKind::sgld;
  else throw ConfigError("run.backend must be 'quadrature' or 'sgld'", run.line);
  cfg.practice_mode = run.bool_or("practice_mode", false);
  cfg.master_seed = static_cast<std::uint64_t>(run.number_or("seed", 1));
  cfg.threads = static_cast<int>(run.number_or("threads", 1));

  ConfigTable quad = doc.table_or_empty("quad");
  cfg.quad.nodes = static_cast<int>(quad.number_or("nodes", 128));
  cfg.quad.refine_depth = static_cast<int>(quad.number_or("refine_depth", 4));

  ConfigTable sg = doc.table_or_empty("sgld");
  cfg.sgld.step_size = sg.number_or("step_size", 0.0);
  cfg.sgld.stability_constant = sg.number_or("stability_constant", 0.05);
  cfg.sgld.chain_length = static_cast<std::size_t>(sg.number_or("chain_length", 100000));
  cfg.sgld.burn_in = static_cast<std::size_t>(sg.number_or("burn_in", 10000));
  cfg.sgld.localization = sg.number_or("localization", 0.0);
  if (sg.has("center")) cfg.sgld.center = sg.number_list("center");
  cfg.sgld.minibatch = static_cast<std::size_t>(sg.number_or("minibatch", 0));
  return cfg;
}

inline ExperimentConfig load_experiment_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return load_experiment(parse_config_string(buf.str()), buf.str());
}

// ---------------------------------------------------------------------------
// run infrastructure

namespace detail {

inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  int nworkers = std::min(threads, count);
  std::vector<std::exception_ptr> errors(nworkers);
  for (int t = 0; t < nworkers; ++t)
    pool.emplace_back([&, t]() {
      try {
        for (;;) {
          int i = next.fetch_add(1);
          if (i >= count) break;
          fn(i);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ull;
  return h;
}

class RunEmitter {
 public:
  RunEmitter(std::string out_dir, std::string run_name, const ExperimentConfig& cfg)
      : dir_(std::move(out_dir)), run_(std::move(run_name)), cfg_(&cfg),
        t0_(std::chrono::steady_clock::now()) {
    std::filesystem::create_directories(dir_);
  }

  std::ofstream open_file(const std::string& name) {
    std::string path = dir_ + "/" + name;
    files_.push_back(name);
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
    return f;
  }

  std::ofstream open_csv(const std::string& name, const std::string& header) {
    std::ofstream f = open_file(name);
    f << header << "\n";
    return f;
  }

  /// One JSONL line per run: config hash, git revision, wall time, outputs.
  void finish() {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0_).count();
    nlohmann::json j;
    j["run"] = run_;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(fnv1a(cfg_->raw_text)));
    j["config_hash"] = hash;
#ifdef SUSC_GIT_REV
    j["git_rev"] = SUSC_GIT_REV;
#else
    j["git_rev"] = "unknown";
#endif
    j["wall_ms"] = ms;
    j["seed"] = cfg_->master_seed;
    j["files"] = files_;
    std::ofstream side(dir_ + "/run.jsonl", std::ios::app);
    side << j.dump() << "\n";
  }

 private:
  std::string dir_, run_;
  const ExperimentConfig* cfg_;
  std::vector<std::string> files_;
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

inline constexpr const char* kConvergeHeader =
    "model_id,obs_id,xi_id,n,beta,nbeta,replicate,seed,chi_ren_hat,chi_pop_ren,difference";
inline constexpr const char* kConvergeSummaryHeader =
    "model_id,obs_id,xi_id,n,nbeta,replicates,median_abs_diff,mean_diff,replicate_se";
inline constexpr const char* kResultsHeader = "model_id,obs_id,xi_id,estimator,n,beta,nbeta,value,mc_se,seed";
inline constexpr const char* kMomentsHeader = "k,h,l,lambda_l,tau,m_l,slope_hat,C_hat,C_theory,r2";
inline constexpr const char* kPatternHeader = "n,beta,nbeta,replicate,seed,h_err,residual_norm";
inline constexpr const char* kPatternSummaryHeader = "n,nbeta,replicates,median_h_err,lambda";
inline constexpr const char* kKernelHeader = "kind,x,xprime,kappa";
inline constexpr const char* kSgldCheckHeader =
    "model_id,obs_id,xi_id,n,beta,nbeta,value_sgld,mc_se,value_quad,abs_diff,sigmas";

/// Consistency experiment: per (n, replicate) the renormalized estimator, its
/// population counterpart, and their difference; medians and replicate SEs in
/// the summary file.
inline void run_converge(const ExperimentConfig& cfg, const std::string& out_dir) {
  if (cfg.schedule.empty()) throw ConfigError("run.schedule must be nonempty");
  if (cfg.observables.empty() || cfg.perturbations.empty())
    throw ConfigError("converge run needs at least one [[observable]] and [[perturbation]]");
  ModelFamily model = cfg.make_model();
  detail::RunEmitter emit(out_dir, "converge", cfg);
  auto csv = emit.open_csv("converge.csv", kConvergeHeader);
  auto summary = emit.open_csv("converge_summary.csv", kConvergeSummaryHeader);
  auto results = emit.open_csv("results.csv", kResultsHeader);

  struct Row {
    double hat = 0.0, pop = 0.0;
    std::optional<double> mc_se;
    std::uint64_t seed = 0;
  };

  for (std::size_t ni = 0; ni < cfg.schedule.size(); ++ni) {
    const std::size_t n = cfg.schedule[ni];
    const double beta = cfg.beta_for(n);
    const double nbeta = beta * static_cast<double>(n);

    // population values are replicate-independent
    std::vector<double> pop_vals;
    {
      QuadratureBackend pop_be(TemperedPosteriorSpec::population(model, nbeta), cfg.quad);
      for (const auto& o : cfg.observables)
        for (const auto& xi : cfg.perturbations)
          pop_vals.push_back(chi_pop_ren(o.observable, xi.perturbation, pop_be, cfg.practice_mode).value);
    }

    const int pairs = static_cast<int>(cfg.observables.size() * cfg.perturbations.size());
    std::vector<std::vector<Row>> rows(cfg.replicates, std::vector<Row>(pairs));
    detail::parallel_for(cfg.replicates, cfg.threads, [&](int rep) {
      std::uint64_t seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(rep), ni);
      Dataset data = sample_data(model, n, seed);
      std::unique_ptr<PosteriorBackend> be;
      if (cfg.backend == BackendKind::quadrature) {
        be = std::make_unique<QuadratureBackend>(TemperedPosteriorSpec::empirical(model, data, beta), cfg.quad);
      } else {
        SgldConfig sc = cfg.sgld;
        sc.seed = derive_seed(seed, 0, 1);
        be = std::make_unique<SgldBackend>(model, data, beta, sc);
      }
      int p = 0;
      for (const auto& o : cfg.observables)
        for (const auto& xi : cfg.perturbations) {
          SusceptibilityResult r = chi_ren_hat(o.observable, xi.perturbation, *be, cfg.practice_mode);
          rows[rep][p] = Row{r.value, pop_vals[p], r.mc_std_err, seed};
          ++p;
        }
    });

    int p = 0;
    for (const auto& o : cfg.observables)
      for (const auto& xi : cfg.perturbations) {
        std::vector<double> diffs, absdiffs;
        for (int rep = 0; rep < cfg.replicates; ++rep) {
          const Row& r = rows[rep][p];
          double diff = r.hat - r.pop;
          diffs.push_back(diff);
          absdiffs.push_back(std::abs(diff));
          csv << cfg.model_id << "," << o.id << "," << xi.id << "," << n << "," << detail::fmt(beta) << ","
              << detail::fmt(nbeta) << "," << rep << "," << r.seed << "," << detail::fmt(r.hat) << ","
              << detail::fmt(r.pop) << "," << detail::fmt(diff) << "\n";
          results << cfg.model_id << "," << o.id << "," << xi.id << ","
                  << (cfg.backend == BackendKind::quadrature ? "ren" : "sgld") << "," << n << ","
                  << detail::fmt(beta) << "," << detail::fmt(nbeta) << "," << detail::fmt(r.hat) << ","
                  << (r.mc_se ? detail::fmt(*r.mc_se) : "") << "," << r.seed << "\n";
        }
        results << cfg.model_id << "," << o.id << "," << xi.id << ",population_ren," << n << ","
                << detail::fmt(beta) << "," << detail::fmt(nbeta) << "," << detail::fmt(rows[0][p].pop) << ",,"
                << cfg.master_seed << "\n";

        std::sort(absdiffs.begin(), absdiffs.end());
        double med = absdiffs[absdiffs.size() / 2];
        if (absdiffs.size() % 2 == 0) med = 0.5 * (med + absdiffs[absdiffs.size() / 2 - 1]);
        double mean = 0.0;
        for (double d2 : diffs) mean += d2;
        mean /= diffs.size();
        double se = 0.0;
        if (diffs.size() > 1) {
          for (double d2 : diffs) se += (d2 - mean) * (d2 - mean);
          se = std::sqrt(se / (diffs.size() - 1.0) / diffs.size());
        }
        summary << cfg.model_id << "," << o.id << "," << xi.id << "," << n << "," << detail::fmt(nbeta) << ","
                << cfg.replicates << "," << detail::fmt(med) << "," << detail::fmt(mean) << "," << detail::fmt(se)
                << "\n";
        ++p;
      }
  }
  emit.finish();
}

/// Moment-scaling experiment over a (k, h, l) sweep: fitted slopes and
/// constants against the predicted laws.
inline void run_moments(const ExperimentConfig& cfg, const std::string& out_dir) {
  const ConfigTable& mo = cfg.doc.table("moments");
  std::vector<int> ks = mo.int_list("k_values");
  std::vector<int> hs = mo.int_list("h_values");
  std::vector<int> ls = mo.int_list("l_values");
  std::vector<double> grid = mo.number_list("nbeta_grid");
  double scale = mo.number_or("loss_scale", 1.0);

  detail::RunEmitter emit(out_dir, "moments", cfg);
  auto csv = emit.open_csv("moments.csv", kMomentsHeader);
  for (int k : ks)
    for (int h : hs) {
      ModelFamily model({k}, {h}, Box::unit(1), scale);
      for (int l : ls) {
        ScalingLaw law = scaling_law({k}, {h}, {l});
        std::vector<std::pair<double, double>> pts;
        for (double nb : grid) {
          QuadratureBackend be(TemperedPosteriorSpec::population(model, nb), cfg.quad);
          pts.emplace_back(nb, be.expect_poly(Submanifold::full(), WPoly::monomial({l}, 1.0)));
        }
        ScalingFit fit = fit_scaling(pts, law);
        csv << k << "," << h << "," << l << "," << law.lambda_l.str() << "," << law.tau.str() << ","
            << law.multiplicity_l << "," << detail::fmt(fit.slope_hat) << "," << detail::fmt(fit.c_hat) << ","
            << (law.c_theory ? detail::fmt(*law.c_theory) : "") << "," << detail::fmt(fit.r2) << "\n";
      }
    }
  emit.finish();
}

/// Patterning experiment: population matrix and ridge solution once, then
/// replicate empirical matrices; reports |h_hat - h_pop|.
inline void run_pattern(const ExperimentConfig& cfg, const std::string& out_dir) {
  const ConfigTable& pt = cfg.doc.table("pattern");
  double lambda = pt.number("lambda");
  std::vector<double> bvec = pt.number_list("b");
  if (bvec.size() != cfg.observables.size())
    throw ConfigError("pattern.b length must match the number of observables", pt.line);
  if (cfg.schedule.empty()) throw ConfigError("run.schedule must be nonempty");

  ModelFamily model = cfg.make_model();
  std::vector<Observable> obs;
  std::vector<Perturbation> xis;
  for (const auto& o : cfg.observables) obs.push_back(o.observable);
  for (const auto& x : cfg.perturbations) xis.push_back(x.perturbation);
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(bvec.data(), bvec.size());

  detail::RunEmitter emit(out_dir, "pattern", cfg);
  auto csv = emit.open_csv("pattern.csv", kPatternHeader);
  auto summary = emit.open_csv("pattern_summary.csv", kPatternSummaryHeader);

  for (std::size_t ni = 0; ni < cfg.schedule.size(); ++ni) {
    const std::size_t n = cfg.schedule[ni];
    const double beta = cfg.beta_for(n);
    const double nbeta = beta * static_cast<double>(n);

    QuadratureBackend pop_be(TemperedPosteriorSpec::population(model, nbeta), cfg.quad);
    SusceptibilityMatrix pop = assemble_matrix(obs, xis, EstimatorKind::population_ren, pop_be);
    RidgeSolution h_pop = pattern(pop.entries, b, lambda);
    if (ni == 0) {
      auto mcsv = emit.open_file("pop_matrix.csv");
      write_matrix_csv(pop, mcsv);
    }

    std::vector<std::pair<double, double>> rows(cfg.replicates);
    std::vector<std::uint64_t> seeds(cfg.replicates);
    detail::parallel_for(cfg.replicates, cfg.threads, [&](int rep) {
      std::uint64_t seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(rep), 100 + ni);
      seeds[rep] = seed;
      Dataset data = sample_data(model, n, seed);
      QuadratureBackend be(TemperedPosteriorSpec::empirical(model, data, beta), cfg.quad);
      SusceptibilityMatrix emp = assemble_matrix(obs, xis, EstimatorKind::ren, be);
      RidgeSolution h_hat = pattern(emp.entries, b, lambda);
      rows[rep] = {(h_hat.h_vector - h_pop.h_vector).norm(), h_hat.residual_norm};
    });

    std::vector<double> errs;
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      csv << n << "," << detail::fmt(beta) << "," << detail::fmt(nbeta) << "," << rep << "," << seeds[rep] << ","
          << detail::fmt(rows[rep].first) << "," << detail::fmt(rows[rep].second) << "\n";
      errs.push_back(rows[rep].first);
    }
    std::sort(errs.begin(), errs.end());
    double med = errs[errs.size() / 2];
    if (errs.size() % 2 == 0) med = 0.5 * (med + errs[errs.size() / 2 - 1]);
    summary << n << "," << detail::fmt(nbeta) << "," << cfg.replicates << "," << detail::fmt(med) << ","
            << detail::fmt(lambda) << "\n";
  }
  emit.finish();
}

/// Coupling-kernel grids kappa(x, x') for the configured kinds.
inline void run_kernel(const ExperimentConfig& cfg, const std::string& out_dir) {
  const ConfigTable& kt = cfg.doc.table("kernel");
  if (cfg.observables.empty()) throw ConfigError("kernel run needs an [[observable]]");
  ModelFamily model = cfg.make_model();
  const ObservableTerm& term = cfg.observables.front().observable.terms.front();

  double x_min = kt.number_or("x_min", -3.0), x_max = kt.number_or("x_max", 3.0);
  int points = static_cast<int>(kt.number_or("points", 33));
  double nbeta = kt.number_or("nbeta", 100.0);

  detail::RunEmitter emit(out_dir, "kernel", cfg);
  auto csv = emit.open_csv("kernel.csv", kKernelHeader);
  auto write_grid = [&](const std::string& kind, const CouplingKernel& kappa) {
    for (int i = 0; i < points; ++i)
      for (int j = 0; j < points; ++j) {
        double x = x_min + (x_max - x_min) * i / (points - 1.0);
        double xp = x_min + (x_max - x_min) * j / (points - 1.0);
        csv << kind << "," << detail::fmt(x) << "," << detail::fmt(xp) << "," << detail::fmt(kappa(x, xp)) << "\n";
      }
  };

  std::string kinds = kt.string_or("kinds", "population");
  std::istringstream ks(kinds);
  std::string kind;
  while (std::getline(ks, kind, ',')) {
    if (kind == "population") {
      QuadratureBackend be(TemperedPosteriorSpec::population(model, nbeta), cfg.quad);
      write_grid(kind, CouplingKernel(term, be));
    } else if (kind == "empirical") {
      std::size_t n = static_cast<std::size_t>(kt.number_or("n", 1000));
      Dataset data = sample_data(model, n, derive_seed(cfg.master_seed, 0, 7));
      QuadratureBackend be(TemperedPosteriorSpec::empirical(model, data, nbeta / static_cast<double>(n)), cfg.quad);
      write_grid(kind, CouplingKernel(term, be));
    } else if (kind == "sharp_cutoff") {
      double eps = kt.number_or("eps", 0.01);
      write_grid(kind, CouplingKernel(term, model, eps));
    } else {
      throw ConfigError("kernel.kinds: unknown kind '" + kind + "'", kt.line);
    }
  }
  emit.finish();
}

/// SGLD sanity run: the SGLD estimator against the quadrature-empirical
/// estimator on the same dataset.
inline void run_sgld_check(const ExperimentConfig& cfg, const std::string& out_dir) {
  if (cfg.observables.empty() || cfg.perturbations.empty())
    throw ConfigError("sgld-check needs [[observable]] and [[perturbation]]");
  if (cfg.schedule.empty()) throw ConfigError("run.schedule must be nonempty");
  ModelFamily model = cfg.make_model();

  detail::RunEmitter emit(out_dir, "sgld-check", cfg);
  auto csv = emit.open_csv("sgld_check.csv", kSgldCheckHeader);
  for (std::size_t n : cfg.schedule) {
    double beta = cfg.beta_for(n);
    Dataset data = sample_data(model, n, derive_seed(cfg.master_seed, 0, 11));
    QuadratureBackend qe(TemperedPosteriorSpec::empirical(model, data, beta), cfg.quad);
    SgldConfig sc = cfg.sgld;
    sc.seed = derive_seed(cfg.master_seed, 1, 11);
    SgldBackend sg(model, data, beta, sc);
    for (const auto& o : cfg.observables)
      for (const auto& xi : cfg.perturbations) {
        SusceptibilityResult exact = chi_ren_hat(o.observable, xi.perturbation, qe);
        SusceptibilityResult mc = chi_ren_hat(o.observable, xi.perturbation, sg);
        double se = mc.mc_std_err.value_or(0.0);
        double diff = std::abs(mc.value - exact.value);
        csv << cfg.model_id << "," << o.id << "," << xi.id << "," << n << "," << detail::fmt(beta) << ","
            << detail::fmt(beta * n) << "," << detail::fmt(mc.value) << "," << detail::fmt(se) << ","
            << detail::fmt(exact.value) << "," << detail::fmt(diff) << ","
            << detail::fmt(se > 0.0 ? diff / se : 0.0) << "\n";
      }
  }
  emit.finish();
}

}  // namespace susc
