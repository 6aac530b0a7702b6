#pragma once

#include <Eigen/Dense>
#include <string>

#include "condgen/errors.hpp"
#include "condgen/linalg.hpp"

namespace condgen {

struct ThetaDims {
  int n_x = 0;       // latent macro states
  int n_y = 0;       // macro observables
  int n_f = 0;       // financial factors
  int n_eps_p = 0;   // macro shocks (eps')
  int n_eps_pp = 0;  // factor-specific shocks (eps'')
};

/// Estimated model parameters: macro block (A, B, G, H, x_bar, y_bar) plus
/// the macro-financial link (Gamma, F', F'', f_bar).
///
/// Macro dynamics in deviation form:
///   x~_{t+1} = A x~_t + G eps'_t
///   y~_t     = B x~_t + H eps'_t
/// Factor returns:
///   f_t = f_bar + Gamma x~_t + F' eps'_t + F'' eps''_t
struct ThetaBundle {
  MatrixXd A, B, Gamma, G, H, Fp, Fpp;
  VectorXd x_bar, y_bar, f_bar;

  ThetaDims dims() const {
    ThetaDims d;
    d.n_x = static_cast<int>(A.rows());
    d.n_y = static_cast<int>(B.rows());
    d.n_f = static_cast<int>(Gamma.rows());
    d.n_eps_p = static_cast<int>(G.cols());
    d.n_eps_pp = static_cast<int>(Fpp.cols());
    return d;
  }

  MatrixXd sigma_f() const { return Fp * Fp.transpose() + Fpp * Fpp.transpose(); }

  void validate() const {
    const ThetaDims d = dims();
    auto expect = [](bool ok, const std::string& what) {
      if (!ok) throw DimensionMismatch("ThetaBundle: " + what);
    };
    expect(A.rows() == d.n_x && A.cols() == d.n_x, "A must be n_x x n_x");
    expect(B.cols() == d.n_x, "B columns must equal n_x");
    expect(G.rows() == d.n_x, "G rows must equal n_x");
    expect(H.rows() == d.n_y && H.cols() == d.n_eps_p, "H must be n_y x n_eps'");
    expect(Gamma.cols() == d.n_x, "Gamma columns must equal n_x");
    expect(Fp.rows() == d.n_f && Fp.cols() == d.n_eps_p, "F' must be n_f x n_eps'");
    expect(Fpp.rows() == d.n_f, "F'' rows must equal n_f");
    expect(x_bar.size() == d.n_x, "x_bar length");
    expect(y_bar.size() == d.n_y, "y_bar length");
    expect(f_bar.size() == d.n_f, "f_bar length");
    for (const MatrixXd* m : {&A, &B, &Gamma, &G, &H, &Fp, &Fpp})
      if (!m->allFinite()) throw NonFiniteInput("ThetaBundle matrix");
  }

  /// Default F'/F'' partition when only the total factor covariance is known:
  /// no shared channel with the macro shocks, F'' a PSD factor of sigma_f.
  static ThetaBundle with_default_partition(MatrixXd a, MatrixXd b, MatrixXd gamma, MatrixXd g,
                                            MatrixXd h, const MatrixXd& sigma_f_total,
                                            VectorXd x_bar, VectorXd y_bar, VectorXd f_bar) {
    ThetaBundle theta;
    theta.A = std::move(a);
    theta.B = std::move(b);
    theta.Gamma = std::move(gamma);
    theta.G = std::move(g);
    theta.H = std::move(h);
    const int n_f = static_cast<int>(theta.Gamma.rows());
    theta.Fp = MatrixXd::Zero(n_f, theta.G.cols());
    theta.Fpp = psd_sqrt_factor(sigma_f_total, 1e-9, n_f);
    theta.x_bar = std::move(x_bar);
    theta.y_bar = std::move(y_bar);
    theta.f_bar = std::move(f_bar);
    theta.validate();
    return theta;
  }
};

}  // namespace condgen
