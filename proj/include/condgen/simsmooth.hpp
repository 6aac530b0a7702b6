#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "condgen/dlm.hpp"
#include "condgen/parallel.hpp"
#include "condgen/rng.hpp"

namespace condgen {

/// One sampled trajectory: states row t = x_t, shocks row t = e_t.
struct PathDraw {
  MatrixXd states;  // horizon x n_states
  MatrixXd shocks;  // horizon x n_shocks
};

using PathSink = std::function<void(long path_index, const PathDraw&)>;

namespace detail {

/// Mean-only filter + smoother over a fixed gain schedule. The covariance
/// recursions depend only on the spec and missing pattern, so per-path work
/// reduces to vector updates.
struct MeanSmoother {
  const DlmSpec* spec;
  const FilterResult* schedule;

  PathDraw smooth_means(const std::vector<VectorXd>& obs_rows) const {
    const int horizon = spec->horizon();
    const int n_x = spec->n_states();
    const int n_e = spec->n_shocks();
    std::vector<VectorXd> pred(static_cast<std::size_t>(horizon));
    std::vector<VectorXd> innov(static_cast<std::size_t>(horizon));
    VectorXd a = spec->init_mean();
    for (int t = 0; t < horizon; ++t) {
      const FilterStep& step = schedule->steps[static_cast<std::size_t>(t)];
      pred[static_cast<std::size_t>(t)] = a;
      const VectorXd v = obs_rows[static_cast<std::size_t>(t)] - step.c_red * a;
      innov[static_cast<std::size_t>(t)] = v;
      a = spec->transition(t) * a + step.gain * v;
    }
    PathDraw out;
    out.states.resize(horizon, n_x);
    out.shocks.resize(horizon, n_e);
    VectorXd r = VectorXd::Zero(n_x);
    for (int t = horizon - 1; t >= 0; --t) {
      const FilterStep& step = schedule->steps[static_cast<std::size_t>(t)];
      const VectorXd fiv = step.innovation_inv * innov[static_cast<std::size_t>(t)];
      out.shocks.row(t) = (step.h_red.transpose() * fiv + step.jmat.transpose() * r).transpose();
      r = step.c_red.transpose() * fiv + step.lmat.transpose() * r;
      out.states.row(t) =
          (pred[static_cast<std::size_t>(t)] +
           schedule->pred_cov[static_cast<std::size_t>(t)] * r)
              .transpose();
    }
    return out;
  }
};

}  // namespace detail

/// Draws exact joint posterior paths of states and shocks given the
/// observations, by mean correction: simulate an unconditional pseudo path,
/// smooth the real and the pseudo data, and recombine. Path i is driven by
/// the (seed, i) substream, so results are independent of threading.
inline void simulation_smoother_stream(const DlmSpec& spec, const ObservationPanel& obs,
                                       long n_paths, std::uint64_t seed, const PathSink& sink,
                                       const FilterOptions& options = {}) {
  if (n_paths < 1) throw EmptySample("simulation_smoother: n_paths must be >= 1");
  const FilterResult schedule = kalman_filter(spec, obs, options);
  const SmoothResult analytic = kalman_smoother(spec, schedule);
  const int horizon = spec.horizon();
  const int n_x = spec.n_states();
  const int n_e = spec.n_shocks();
  const detail::MeanSmoother means{&spec, &schedule};

  PathDraw base;
  base.states.resize(horizon, n_x);
  base.shocks.resize(horizon, n_e);
  for (int t = 0; t < horizon; ++t) {
    base.states.row(t) = analytic.state_mean[static_cast<std::size_t>(t)].transpose();
    base.shocks.row(t) = analytic.shock_mean[static_cast<std::size_t>(t)].transpose();
  }

  const MatrixXd init_factor = psd_sqrt_factor(spec.init_cov());

  parallel_chunks(n_paths, 64, [&](long begin, long end, long) {
    for (long i = begin; i < end; ++i) {
      SubstreamRng rng(seed, static_cast<std::uint64_t>(i));
      // unconditional pseudo path with the same missing pattern
      PathDraw pseudo;
      pseudo.states.resize(horizon, n_x);
      pseudo.shocks.resize(horizon, n_e);
      std::vector<VectorXd> pseudo_obs(static_cast<std::size_t>(horizon));
      VectorXd x = spec.init_mean() + init_factor * rng.normal_vector(init_factor.cols());
      for (int t = 0; t < horizon; ++t) {
        const VectorXd e = rng.normal_vector(n_e);
        pseudo.states.row(t) = x.transpose();
        pseudo.shocks.row(t) = e.transpose();
        const FilterStep& step = schedule.steps[static_cast<std::size_t>(t)];
        pseudo_obs[static_cast<std::size_t>(t)] = step.c_red * x + step.h_red * e;
        x = spec.transition(t) * x + spec.state_noise(t) * e;
      }
      const PathDraw pseudo_smoothed = means.smooth_means(pseudo_obs);
      PathDraw draw;
      draw.states = base.states + pseudo.states - pseudo_smoothed.states;
      draw.shocks = base.shocks + pseudo.shocks - pseudo_smoothed.shocks;
      sink(i, draw);
    }
  });
}

inline std::vector<PathDraw> simulation_smoother(const DlmSpec& spec, const ObservationPanel& obs,
                                                 long n_paths, std::uint64_t seed,
                                                 const FilterOptions& options = {}) {
  std::vector<PathDraw> out(static_cast<std::size_t>(n_paths));
  simulation_smoother_stream(
      spec, obs, n_paths, seed,
      [&](long i, const PathDraw& draw) { out[static_cast<std::size_t>(i)] = draw; }, options);
  return out;
}

}  // namespace condgen
