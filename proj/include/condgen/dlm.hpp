#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "condgen/errors.hpp"
#include "condgen/linalg.hpp"

namespace condgen {

/// Per-time matrix storage with a shared-storage shortcut for
/// time-homogeneous specifications.
template <class M>
class TimeArray {
 public:
  TimeArray() = default;
  TimeArray(M shared, int length) : shared_(std::move(shared)), length_(length), homogeneous_(true) {}
  explicit TimeArray(std::vector<M> per_time)
      : per_time_(std::move(per_time)), length_(static_cast<int>(per_time_.size())), homogeneous_(false) {}

  const M& at(int t) const {
    if (t < 0 || t >= length_) throw TimeOutOfHorizon("TimeArray index " + std::to_string(t));
    return homogeneous_ ? shared_ : per_time_[static_cast<std::size_t>(t)];
  }
  int length() const { return length_; }
  bool homogeneous() const { return homogeneous_; }

 private:
  M shared_;
  std::vector<M> per_time_;
  int length_ = 0;
  bool homogeneous_ = true;
};

/// Gaussian state belief x_t | information up to time s.
struct GaussianBelief {
  VectorXd mean;
  MatrixXd cov;
  int time = 0;
  std::string label;  // e.g. "t|t" or "t|T"
};

/// Linear-Gaussian state-space model
///
///   x_{t+1} = A_t x_t + G_t e_t,        x_1 ~ N(init_mean, init_cov)
///   y_t     = C_t x_t + H_t e_t,        e_t ~ iid N(0, I)
///
/// The same shock vector e_t drives the transition into t+1 and the
/// measurement at t, so state and measurement noise are correlated with
/// cross-covariance G_t H_t^T. The measurement dimension may vary by time;
/// the shock dimension is fixed.
class DlmSpec {
 public:
  DlmSpec() = default;

  static DlmSpec homogeneous(MatrixXd a, MatrixXd c, MatrixXd g, MatrixXd h,
                             VectorXd init_mean, MatrixXd init_cov, int horizon) {
    DlmSpec s;
    s.transition_ = TimeArray<MatrixXd>(std::move(a), horizon);
    s.measurement_ = TimeArray<MatrixXd>(std::move(c), horizon);
    s.state_noise_ = TimeArray<MatrixXd>(std::move(g), horizon);
    s.meas_noise_ = TimeArray<MatrixXd>(std::move(h), horizon);
    s.init(std::move(init_mean), std::move(init_cov), horizon);
    return s;
  }

  static DlmSpec time_varying(std::vector<MatrixXd> a, std::vector<MatrixXd> c,
                              std::vector<MatrixXd> g, std::vector<MatrixXd> h,
                              VectorXd init_mean, MatrixXd init_cov) {
    const int horizon = static_cast<int>(a.size());
    if (static_cast<int>(c.size()) != horizon || static_cast<int>(g.size()) != horizon ||
        static_cast<int>(h.size()) != horizon)
      throw DimensionMismatch("DlmSpec: per-time arrays must share one length");
    DlmSpec s;
    s.transition_ = TimeArray<MatrixXd>(std::move(a));
    s.measurement_ = TimeArray<MatrixXd>(std::move(c));
    s.state_noise_ = TimeArray<MatrixXd>(std::move(g));
    s.meas_noise_ = TimeArray<MatrixXd>(std::move(h));
    s.init(std::move(init_mean), std::move(init_cov), horizon);
    return s;
  }

  const MatrixXd& transition(int t) const { return transition_.at(t); }
  const MatrixXd& measurement(int t) const { return measurement_.at(t); }
  const MatrixXd& state_noise(int t) const { return state_noise_.at(t); }
  const MatrixXd& meas_noise(int t) const { return meas_noise_.at(t); }
  const VectorXd& init_mean() const { return init_mean_; }
  const MatrixXd& init_cov() const { return init_cov_; }

  int horizon() const { return horizon_; }
  int n_states() const { return n_states_; }
  int n_shocks() const { return n_shocks_; }
  int n_obs(int t) const { return static_cast<int>(measurement_.at(t).rows()); }

 private:
  void init(VectorXd init_mean, MatrixXd init_cov, int horizon) {
    horizon_ = horizon;
    if (horizon_ <= 0) throw DimensionMismatch("DlmSpec: horizon must be positive");
    init_mean_ = std::move(init_mean);
    n_states_ = static_cast<int>(init_mean_.size());
    if (init_cov.rows() != n_states_ || init_cov.cols() != n_states_)
      throw DimensionMismatch("DlmSpec: init_cov size != state dimension");
    if (max_abs(init_cov - init_cov.transpose()) > 1e-8 * (1.0 + max_abs(init_cov)))
      throw NotPsd("DlmSpec: init_cov is not symmetric");
    init_cov_ = symmetrized(std::move(init_cov));
    n_shocks_ = static_cast<int>(state_noise_.at(0).cols());
    for (int t = 0; t < horizon_; ++t) {
      const auto& a = transition_.at(t);
      const auto& c = measurement_.at(t);
      const auto& g = state_noise_.at(t);
      const auto& h = meas_noise_.at(t);
      if (a.rows() != n_states_ || a.cols() != n_states_)
        throw DimensionMismatch("DlmSpec: transition at t=" + std::to_string(t));
      if (g.rows() != n_states_ || g.cols() != n_shocks_)
        throw DimensionMismatch("DlmSpec: state noise at t=" + std::to_string(t));
      if (c.cols() != n_states_ || h.rows() != c.rows() || h.cols() != n_shocks_)
        throw DimensionMismatch("DlmSpec: measurement block at t=" + std::to_string(t));
      if (!a.allFinite() || !c.allFinite() || !g.allFinite() || !h.allFinite())
        throw NonFiniteInput("DlmSpec matrices at t=" + std::to_string(t));
    }
    if (!init_mean_.allFinite() || !init_cov_.allFinite()) throw NonFiniteInput("DlmSpec init");
  }

  TimeArray<MatrixXd> transition_, measurement_, state_noise_, meas_noise_;
  VectorXd init_mean_;
  MatrixXd init_cov_;
  int horizon_ = 0;
  int n_states_ = 0;
  int n_shocks_ = 0;
};

/// Observations with per-entry missing markers (NaN = missing). Row t must
/// match the spec's measurement dimension at t; all-missing rows are legal.
class ObservationPanel {
 public:
  ObservationPanel() = default;
  explicit ObservationPanel(std::vector<VectorXd> rows) : rows_(std::move(rows)) {}

  /// Columns of `values` are series; NaN marks a missing entry.
  static ObservationPanel from_matrix(const MatrixXd& values) {
    std::vector<VectorXd> rows(static_cast<std::size_t>(values.rows()));
    for (Index t = 0; t < values.rows(); ++t) rows[static_cast<std::size_t>(t)] = values.row(t);
    return ObservationPanel(std::move(rows));
  }

  static ObservationPanel all_missing(const DlmSpec& spec) {
    std::vector<VectorXd> rows(static_cast<std::size_t>(spec.horizon()));
    for (int t = 0; t < spec.horizon(); ++t)
      rows[static_cast<std::size_t>(t)] =
          VectorXd::Constant(spec.n_obs(t), std::numeric_limits<double>::quiet_NaN());
    return ObservationPanel(std::move(rows));
  }

  int length() const { return static_cast<int>(rows_.size()); }
  const VectorXd& row(int t) const { return rows_[static_cast<std::size_t>(t)]; }

  std::vector<Index> observed_indices(int t) const {
    std::vector<Index> idx;
    const VectorXd& r = row(t);
    for (Index i = 0; i < r.size(); ++i) {
      const double v = r(i);
      if (std::isnan(v)) continue;
      if (std::isinf(v)) throw NonFiniteInput("observation at t=" + std::to_string(t));
      idx.push_back(i);
    }
    return idx;
  }

 private:
  std::vector<VectorXd> rows_;
};

struct FilterOptions {
  /// When false, a rank-deficient innovation covariance raises
  /// SingularInnovation instead of switching to the pseudo-inverse.
  bool allow_singular_innovation = true;
};

/// Data-independent pieces of one filter step, kept so that additional data
/// vectors (simulation-smoother pseudo paths) can be filtered with mean-only
/// recursions.
struct FilterStep {
  std::vector<Index> observed;  // surviving measurement rows at this time
  MatrixXd c_red, h_red;        // reduced C_t, H_t
  MatrixXd innovation_inv;      // F_t^+ on observed rows
  MatrixXd gain;                // K_t = (A P C^T + G H^T) F^+
  MatrixXd lmat;                // L_t = A_t - K_t C_t
  MatrixXd jmat;                // J_t = G_t - K_t H_t
  MatrixXd ctfic, htfih, ctfih; // C^T F^+ C, H^T F^+ H, C^T F^+ H
  Index innovation_rank = 0;
  bool innovation_full_rank = true;
};

struct FilterResult {
  std::vector<VectorXd> pred_mean, filt_mean;  // x_{t|t-1}, x_{t|t}
  std::vector<MatrixXd> pred_cov, filt_cov;
  std::vector<VectorXd> innovation;            // v_t on observed rows
  std::vector<FilterStep> steps;
  double log_likelihood = 0.0;

  GaussianBelief predicted(int t) const {
    return {pred_mean[static_cast<std::size_t>(t)], pred_cov[static_cast<std::size_t>(t)], t,
            std::to_string(t) + "|" + std::to_string(t - 1)};
  }
  GaussianBelief filtered(int t) const {
    return {filt_mean[static_cast<std::size_t>(t)], filt_cov[static_cast<std::size_t>(t)], t,
            std::to_string(t) + "|" + std::to_string(t)};
  }
};

struct SmoothResult {
  std::vector<VectorXd> state_mean;     // x_{t|T}
  std::vector<MatrixXd> state_cov;
  std::vector<VectorXd> shock_mean;     // e_{t|T}
  std::vector<MatrixXd> shock_cov;
  std::vector<MatrixXd> state_shock_cov;  // Cov(x_t, e_t | all data)
  std::vector<MatrixXd> lag_one_cov;      // Cov(x_t, x_{t+1} | all data), size T-1
  double log_likelihood = 0.0;

  GaussianBelief smoothed(int t) const {
    return {state_mean[static_cast<std::size_t>(t)], state_cov[static_cast<std::size_t>(t)], t,
            std::to_string(t) + "|T"};
  }
};

namespace detail {

inline MatrixXd select_rows(const MatrixXd& m, const std::vector<Index>& idx) {
  MatrixXd out(static_cast<Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = m.row(idx[i]);
  return out;
}

inline VectorXd select_entries(const VectorXd& v, const std::vector<Index>& idx) {
  VectorXd out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = v(idx[i]);
  return out;
}

}  // namespace detail

/// Kalman filter handling missing observations (row deletion) and the
/// state/measurement noise correlation G_t H_t^T.
inline FilterResult kalman_filter(const DlmSpec& spec, const ObservationPanel& obs,
                                  const FilterOptions& options = {}) {
  if (obs.length() != spec.horizon())
    throw DimensionMismatch("kalman_filter: panel length != spec horizon");
  const int horizon = spec.horizon();
  const int n_x = spec.n_states();
  static const double kLog2Pi = std::log(2.0 * M_PI);

  FilterResult out;
  out.pred_mean.resize(horizon);
  out.pred_cov.resize(horizon);
  out.filt_mean.resize(horizon);
  out.filt_cov.resize(horizon);
  out.innovation.resize(horizon);
  out.steps.resize(horizon);

  VectorXd a = spec.init_mean();
  MatrixXd p = spec.init_cov();
  for (int t = 0; t < horizon; ++t) {
    if (obs.row(t).size() != spec.n_obs(t))
      throw DimensionMismatch("kalman_filter: observation size at t=" + std::to_string(t));
    FilterStep& step = out.steps[static_cast<std::size_t>(t)];
    step.observed = obs.observed_indices(t);
    const auto& amat = spec.transition(t);
    const auto& gmat = spec.state_noise(t);
    step.c_red = detail::select_rows(spec.measurement(t), step.observed);
    step.h_red = detail::select_rows(spec.meas_noise(t), step.observed);
    const VectorXd y = detail::select_entries(obs.row(t), step.observed);

    out.pred_mean[static_cast<std::size_t>(t)] = a;
    out.pred_cov[static_cast<std::size_t>(t)] = p;

    const MatrixXd pct = p * step.c_red.transpose();
    const MatrixXd f = symmetrized(step.c_red * pct + step.h_red * step.h_red.transpose());
    const PsdInverse finv = psd_inverse(f);
    if (!finv.full_rank && !options.allow_singular_innovation)
      throw SingularInnovation("rank " + std::to_string(finv.rank) + " of " +
                               std::to_string(f.rows()) + " at t=" + std::to_string(t));
    step.innovation_inv = finv.inverse;
    step.innovation_rank = finv.rank;
    step.innovation_full_rank = finv.full_rank;

    const VectorXd v = y - step.c_red * a;
    out.innovation[static_cast<std::size_t>(t)] = v;
    if (v.size() > 0) {
      out.log_likelihood +=
          -0.5 * (static_cast<double>(finv.rank) * kLog2Pi + finv.log_det + v.dot(finv.inverse * v));
    }

    // filtered moments; the measurement shock is independent of x_t so the
    // cross term does not enter here
    out.filt_mean[static_cast<std::size_t>(t)] = a + pct * (finv.inverse * v);
    out.filt_cov[static_cast<std::size_t>(t)] = symmetrized(p - pct * finv.inverse * pct.transpose());

    // one-step prediction with the correlated-noise gain
    step.gain = (amat * pct + gmat * step.h_red.transpose()) * finv.inverse;
    step.lmat = amat - step.gain * step.c_red;
    step.jmat = gmat - step.gain * step.h_red;
    step.ctfic = step.c_red.transpose() * finv.inverse * step.c_red;
    step.htfih = step.h_red.transpose() * finv.inverse * step.h_red;
    step.ctfih = step.c_red.transpose() * finv.inverse * step.h_red;

    a = amat * a + step.gain * v;
    p = symmetrized(amat * p * amat.transpose() + gmat * gmat.transpose() -
                    step.gain * f * step.gain.transpose());
  }
  (void)n_x;
  return out;
}

/// Backward smoothing pass: state and disturbance posteriors given all
/// observations, their per-time cross-covariance, and lag-one state
/// cross-covariances.
inline SmoothResult kalman_smoother(const DlmSpec& spec, const FilterResult& fr) {
  const int horizon = spec.horizon();
  if (static_cast<int>(fr.steps.size()) != horizon)
    throw DimensionMismatch("kalman_smoother: filter result length mismatch");
  const int n_x = spec.n_states();
  const int n_e = spec.n_shocks();

  SmoothResult out;
  out.state_mean.resize(horizon);
  out.state_cov.resize(horizon);
  out.shock_mean.resize(horizon);
  out.shock_cov.resize(horizon);
  out.state_shock_cov.resize(horizon);
  if (horizon > 1) out.lag_one_cov.resize(horizon - 1);
  out.log_likelihood = fr.log_likelihood;

  VectorXd r = VectorXd::Zero(n_x);
  MatrixXd nmat = MatrixXd::Zero(n_x, n_x);
  for (int t = horizon - 1; t >= 0; --t) {
    const FilterStep& step = fr.steps[static_cast<std::size_t>(t)];
    const VectorXd& v = fr.innovation[static_cast<std::size_t>(t)];
    const MatrixXd& p = fr.pred_cov[static_cast<std::size_t>(t)];
    const VectorXd fiv = step.innovation_inv * v;

    // disturbance posterior uses the r/N values accumulated from times > t
    out.shock_mean[static_cast<std::size_t>(t)] = step.h_red.transpose() * fiv + step.jmat.transpose() * r;
    out.shock_cov[static_cast<std::size_t>(t)] = symmetrized(
        MatrixXd::Identity(n_e, n_e) - step.htfih - step.jmat.transpose() * nmat * step.jmat);
    out.state_shock_cov[static_cast<std::size_t>(t)] =
        -p * (step.ctfih + step.lmat.transpose() * nmat * step.jmat);

    if (t < horizon - 1) {
      out.lag_one_cov[static_cast<std::size_t>(t)] =
          p * step.lmat.transpose() *
          (MatrixXd::Identity(n_x, n_x) - nmat * fr.pred_cov[static_cast<std::size_t>(t + 1)]);
    }

    r = step.c_red.transpose() * fiv + step.lmat.transpose() * r;
    nmat = symmetrized(step.ctfic + step.lmat.transpose() * nmat * step.lmat);
    out.state_mean[static_cast<std::size_t>(t)] = fr.pred_mean[static_cast<std::size_t>(t)] + p * r;
    out.state_cov[static_cast<std::size_t>(t)] = symmetrized(p - p * nmat * p);
  }
  return out;
}

/// Zero-mean stationary belief of x_{t+1} = A x_t + G e_t.
inline GaussianBelief stationary_init(const MatrixXd& a, const MatrixXd& g) {
  if (g.rows() != a.rows()) throw DimensionMismatch("stationary_init: G rows != state dim");
  MatrixXd cov = solve_discrete_lyapunov(a, g * g.transpose());
  return {VectorXd::Zero(a.rows()), std::move(cov), 0, "1|0"};
}

}  // namespace condgen
