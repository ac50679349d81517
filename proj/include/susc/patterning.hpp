#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "susc/susceptibility.hpp"

namespace susc {

struct SusceptibilityMatrix {
  Eigen::MatrixXd entries;          // H x m, (i,j) = chi(O_i, xi_j)
  Eigen::MatrixXd mc_std_err;       // same shape; zero for deterministic backends
  EstimatorKind estimator_kind = EstimatorKind::population_ren;
  std::string provenance;
};

/// chi(O_i, xi_j) over an observable family and a perturbation family.
/// Entry failures are reported with their (i, j) position.
inline SusceptibilityMatrix assemble_matrix(const std::vector<Observable>& observables,
                                            const std::vector<Perturbation>& perturbations,
                                            EstimatorKind kind, PosteriorBackend& be) {
  if (observables.empty() || perturbations.empty())
    throw std::invalid_argument("assemble_matrix: need at least one observable and one perturbation");
  const int H = static_cast<int>(observables.size());
  const int m = static_cast<int>(perturbations.size());
  SusceptibilityMatrix out;
  out.entries.resize(H, m);
  out.mc_std_err = Eigen::MatrixXd::Zero(H, m);
  out.estimator_kind = kind;
  for (int i = 0; i < H; ++i)
    for (int j = 0; j < m; ++j) {
      try {
        SusceptibilityResult r;
        switch (kind) {
          case EstimatorKind::population_ren: r = chi_pop_ren(observables[i], perturbations[j], be); break;
          case EstimatorKind::ideal: r = chi_ideal_hat(observables[i], perturbations[j], be); break;
          case EstimatorKind::ren:
          case EstimatorKind::sgld: r = chi_ren_hat(observables[i], perturbations[j], be); break;
        }
        out.entries(i, j) = r.value;
        if (r.mc_std_err) out.mc_std_err(i, j) = *r.mc_std_err;
      } catch (const std::exception& e) {
        throw std::runtime_error("assemble_matrix: entry (" + std::to_string(i) + "," + std::to_string(j) +
                                 ") failed: " + e.what());
      }
    }
  return out;
}

/// Operator norm by power iteration on A^T A (deterministic start).
inline double operator_norm(const Eigen::MatrixXd& a, int iters = 200) {
  if (a.size() == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.cols());
  v.normalize();
  double s = 0.0;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd u = a.transpose() * (a * v);
    double norm = u.norm();
    if (norm == 0.0) return 0.0;
    v = u / norm;
    s = norm;
  }
  return std::sqrt(s);
}

/// Ridge-regularized inverse R_lambda(A) = A^T (A A^T + lambda I)^{-1},
/// defined for every A; computed through the Cholesky factorization of the
/// always-positive-definite Gram matrix.
inline Eigen::MatrixXd ridge_inverse(const Eigen::MatrixXd& a, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("ridge_inverse: lambda must be positive");
  const int H = static_cast<int>(a.rows());
  Eigen::MatrixXd gram = a * a.transpose() + lambda * Eigen::MatrixXd::Identity(H, H);
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  return a.transpose() * llt.solve(Eigen::MatrixXd::Identity(H, H));
}

/// Moore-Penrose pseudoinverse via SVD with a relative rank cutoff.
inline Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& a, double rel_cutoff = 1e-10) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double cut = sv.size() > 0 ? sv(0) * rel_cutoff : 0.0;
  Eigen::VectorXd inv = sv;
  for (int i = 0; i < sv.size(); ++i) inv(i) = (sv(i) > cut && sv(i) > 0.0) ? 1.0 / sv(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

struct RidgeSolution {
  double lambda = 0.0;
  Eigen::VectorXd h_vector;
  double residual_norm = 0.0;
};

/// lambda-regularized patterning perturbation h = R_lambda(A) b.
inline RidgeSolution pattern(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double lambda) {
  if (b.size() != a.rows()) throw std::invalid_argument("pattern: dimension mismatch between A and b");
  RidgeSolution sol;
  sol.lambda = lambda;
  sol.h_vector = ridge_inverse(a, lambda) * b;
  sol.residual_norm = (a * sol.h_vector - b).norm();
  return sol;
}

/// ||R_lambda(A) - A^+||_op; for full-rank A this equals
/// lambda / (sigma_min (sigma_min^2 + lambda)).
inline double ridge_error(const Eigen::MatrixXd& a, double lambda) {
  if (a.size() == 0 || a.isZero(0.0)) throw std::invalid_argument("ridge_error: zero matrix");
  return operator_norm(ridge_inverse(a, lambda) - pseudoinverse(a));
}

inline void write_matrix_csv(const SusceptibilityMatrix& mat, std::ostream& os) {
  os << mat.entries.rows() << "," << mat.entries.cols() << "," << to_string(mat.estimator_kind) << "\n";
  for (int i = 0; i < mat.entries.rows(); ++i) {
    for (int j = 0; j < mat.entries.cols(); ++j) {
      if (j) os << ",";
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", mat.entries(i, j));
      os << buf;
    }
    os << "\n";
  }
}

inline SusceptibilityMatrix read_matrix_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("matrix csv: missing header");
  std::istringstream hs(header);
  std::string hstr, mstr, kind;
  std::getline(hs, hstr, ',');
  std::getline(hs, mstr, ',');
  std::getline(hs, kind, ',');
  int H = std::stoi(hstr), m = std::stoi(mstr);
  SusceptibilityMatrix out;
  out.entries.resize(H, m);
  out.mc_std_err = Eigen::MatrixXd::Zero(H, m);
  if (kind == "population_ren") out.estimator_kind = EstimatorKind::population_ren;
  else if (kind == "ideal") out.estimator_kind = EstimatorKind::ideal;
  else if (kind == "ren") out.estimator_kind = EstimatorKind::ren;
  else if (kind == "sgld") out.estimator_kind = EstimatorKind::sgld;
  else throw std::runtime_error("matrix csv: unknown estimator kind '" + kind + "'");
  for (int i = 0; i < H; ++i) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("matrix csv: truncated");
    std::istringstream ls(line);
    std::string cell;
    for (int j = 0; j < m; ++j) {
      if (!std::getline(ls, cell, ',')) throw std::runtime_error("matrix csv: short row");
      out.entries(i, j) = std::stod(cell);
    }
  }
  return out;
}

}  // namespace susc
