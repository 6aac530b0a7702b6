#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "condgen/errors.hpp"

namespace condgen {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd symmetrized(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

inline double max_abs(const MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const MatrixXd& m) { return m.allFinite(); }

/// Largest absolute eigenvalue of a (not necessarily symmetric) square matrix.
inline double spectral_radius(const MatrixXd& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("spectral_radius needs a square matrix");
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Inverse (or Moore-Penrose pseudo-inverse) of a symmetric PSD matrix.
///
/// Tries a pivoted LDL^T factorization first; on rank deficiency relative to
/// the cutoff it falls back to an eigendecomposition-based pseudo-inverse.
/// log_det is the (pseudo-)log-determinant over the retained spectrum.
struct PsdInverse {
  MatrixXd inverse;
  double log_det = 0.0;
  Index rank = 0;
  bool full_rank = true;
};

inline PsdInverse psd_inverse(const MatrixXd& s, double rel_tol = 1e-12) {
  if (s.rows() != s.cols()) throw DimensionMismatch("psd_inverse needs a square matrix");
  const Index n = s.rows();
  PsdInverse out;
  if (n == 0) {
    out.inverse = MatrixXd(0, 0);
    return out;
  }
  Eigen::LDLT<MatrixXd> ldlt(symmetrized(s));
  if (ldlt.info() == Eigen::Success) {
    const VectorXd d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (dmax > 0 && d.minCoeff() > rel_tol * dmax) {
      out.inverse = ldlt.solve(MatrixXd::Identity(n, n));
      out.log_det = d.array().log().sum();
      out.rank = n;
      out.full_rank = true;
      return out;
    }
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(s));
  const VectorXd ev = es.eigenvalues();
  const double cutoff = rel_tol * std::max(ev.cwiseAbs().maxCoeff(), 0.0);
  VectorXd inv_ev = VectorXd::Zero(n);
  for (Index i = 0; i < n; ++i) {
    if (ev(i) > cutoff && ev(i) > 0.0) {
      inv_ev(i) = 1.0 / ev(i);
      out.log_det += std::log(ev(i));
      ++out.rank;
    }
  }
  out.inverse = es.eigenvectors() * inv_ev.asDiagonal() * es.eigenvectors().transpose();
  out.full_rank = (out.rank == n);
  return out;
}

/// Rectangular factor L with L L^T = s, column count equal to the numerical
/// rank. Negative eigenvalues below -neg_tol*max(1,|lambda|_max) raise NotPsd;
/// smaller negatives are clipped to zero. pad_to >= rank appends zero columns.
inline MatrixXd psd_sqrt_factor(const MatrixXd& s, double neg_tol = 1e-9, Index pad_to = -1) {
  if (s.rows() != s.cols()) throw DimensionMismatch("psd_sqrt_factor needs a square matrix");
  const Index n = s.rows();
  if (n == 0) return MatrixXd(0, pad_to < 0 ? 0 : pad_to);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(s));
  const VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -neg_tol * scale) {
    throw NotPsd("matrix has eigenvalue " + std::to_string(ev.minCoeff()));
  }
  const double cutoff = 1e-12 * scale;
  Index rank = 0;
  for (Index i = 0; i < n; ++i)
    if (ev(i) > cutoff) ++rank;
  MatrixXd factor(n, rank);
  Index c = 0;
  // eigenvalues come back ascending; emit dominant columns first
  for (Index i = n - 1; i >= 0; --i) {
    if (ev(i) > cutoff) factor.col(c++) = es.eigenvectors().col(i) * std::sqrt(ev(i));
  }
  if (pad_to >= 0) {
    if (pad_to < rank) throw DimensionMismatch("psd_sqrt_factor pad_to below rank");
    MatrixXd padded = MatrixXd::Zero(n, pad_to);
    padded.leftCols(rank) = factor;
    return padded;
  }
  return factor;
}

/// Solves P = A P A^T + Q for symmetric PSD P by iterated squaring.
///
/// Requires the spectral radius of A to be strictly inside the unit circle;
/// the accumulated sum sum_k A^k Q (A^T)^k then converges quadratically.
inline MatrixXd solve_discrete_lyapunov(const MatrixXd& a, const MatrixXd& q) {
  if (a.rows() != a.cols() || q.rows() != q.cols() || a.rows() != q.rows())
    throw DimensionMismatch("solve_discrete_lyapunov: A and Q must be square and same size");
  if (!a.allFinite() || !q.allFinite()) throw NonFiniteInput("solve_discrete_lyapunov");
  const Index n = a.rows();
  if (n == 0) return MatrixXd(0, 0);
  const double rho = spectral_radius(a);
  if (rho >= 1.0 - 1e-9) {
    throw NonStationary("spectral radius " + std::to_string(rho) + " >= 1 - 1e-9");
  }
  MatrixXd p = symmetrized(q);
  MatrixXd ak = a;
  const double qscale = 1.0 + max_abs(q);
  for (int iter = 0; iter < 200; ++iter) {
    const MatrixXd incr = ak * p * ak.transpose();
    p = symmetrized(p + incr);
    ak = ak * ak;
    if (max_abs(incr) <= 1e-16 * qscale && max_abs(ak) <= 1e-16) break;
  }
  return p;
}

/// Log-density of N(mean, cov) at x; cov may be given pre-factored via psd_inverse.
inline double gaussian_log_density(const VectorXd& x, const VectorXd& mean, const PsdInverse& cov_inv) {
  static const double kLog2Pi = std::log(2.0 * M_PI);
  const VectorXd d = x - mean;
  return -0.5 * (static_cast<double>(cov_inv.rank) * kLog2Pi + cov_inv.log_det +
                 d.dot(cov_inv.inverse * d));
}

}  // namespace condgen
