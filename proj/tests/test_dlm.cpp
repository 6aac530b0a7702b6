#include <catch2/catch_amalgamated.hpp>

#include "condgen/dlm.hpp"
#include "support/dense_oracle.hpp"
#include "support/generators.hpp"

using namespace condgen;
using condgen::testing::DenseDlm;
using condgen::testing::random_dlm_instance;
using condgen::testing::random_psd;
using condgen::testing::random_stable_matrix;

namespace {

void check_against_oracle(const DlmSpec& spec, const ObservationPanel& obs, double tol) {
  const DenseDlm oracle(spec);
  const auto post = oracle.condition(obs);
  const FilterResult fr = kalman_filter(spec, obs);
  const SmoothResult sm = kalman_smoother(spec, fr);

  // likelihood equality is only defined when every innovation covariance is
  // nonsingular; degenerate instances still have to match in moments
  const bool regular = std::all_of(fr.steps.begin(), fr.steps.end(),
                                   [](const FilterStep& s) { return s.innovation_full_rank; });
  if (regular) REQUIRE(std::abs(fr.log_likelihood - post.log_likelihood) <= tol);

  for (int t = 0; t < spec.horizon(); ++t) {
    // filtered state vs oracle conditioned on data up to t
    ObservationPanel partial = [&] {
      std::vector<VectorXd> rows;
      for (int s = 0; s < spec.horizon(); ++s) {
        if (s <= t)
          rows.push_back(obs.row(s));
        else
          rows.push_back(VectorXd::Constant(spec.n_obs(s), std::numeric_limits<double>::quiet_NaN()));
      }
      return ObservationPanel(std::move(rows));
    }();
    const auto part_post = oracle.condition(partial);
    const auto [fm, fc] = DenseDlm::functional(part_post, oracle.state_map(t));
    REQUIRE(max_abs(fr.filt_mean[t] - fm) <= tol);
    REQUIRE(max_abs(fr.filt_cov[t] - fc) <= tol);

    // smoothed state, shocks, and cross-covariance vs full conditioning
    const auto [sm_mean, sm_cov] = DenseDlm::functional(post, oracle.state_map(t));
    REQUIRE(max_abs(sm.state_mean[t] - sm_mean) <= tol);
    REQUIRE(max_abs(sm.state_cov[t] - sm_cov) <= tol);

    const auto [e_mean, e_cov] = DenseDlm::functional(post, oracle.shock_map(t));
    REQUIRE(max_abs(sm.shock_mean[t] - e_mean) <= tol);
    REQUIRE(max_abs(sm.shock_cov[t] - e_cov) <= tol);

    const MatrixXd joint_map = [&] {
      MatrixXd m(spec.n_states() + spec.n_shocks(), oracle.dim());
      m.topRows(spec.n_states()) = oracle.state_map(t);
      m.bottomRows(spec.n_shocks()) = oracle.shock_map(t);
      return m;
    }();
    const auto [jm, jc] = DenseDlm::functional(post, joint_map);
    REQUIRE(max_abs(sm.state_shock_cov[t] -
                    jc.topRightCorner(spec.n_states(), spec.n_shocks())) <= tol);

    if (t + 1 < spec.horizon()) {
      MatrixXd pair_map(2 * spec.n_states(), oracle.dim());
      pair_map.topRows(spec.n_states()) = oracle.state_map(t);
      pair_map.bottomRows(spec.n_states()) = oracle.state_map(t + 1);
      const auto [pm, pc] = DenseDlm::functional(post, pair_map);
      REQUIRE(max_abs(sm.lag_one_cov[t] -
                      pc.topRightCorner(spec.n_states(), spec.n_states())) <= tol);
    }
  }
}

}  // namespace

TEST_CASE("stationary_init closed forms") {
  SECTION("zero dynamics with identity loading") {
    const GaussianBelief b = stationary_init(MatrixXd::Zero(3, 3), MatrixXd::Identity(3, 3));
    REQUIRE(max_abs(b.mean) == 0.0);
    REQUIRE(max_abs(b.cov - MatrixXd::Identity(3, 3)) <= 1e-14);
  }
  SECTION("scalar a=0.9") {
    MatrixXd a(1, 1), g(1, 1);
    a << 0.9;
    g << 1.0;
    const GaussianBelief b = stationary_init(a, g);
    REQUIRE(b.cov(0, 0) == Catch::Approx(1.0 / (1.0 - 0.81)).epsilon(1e-10));
    REQUIRE(b.cov(0, 0) == Catch::Approx(5.2632).epsilon(1e-4));
  }
  SECTION("diagonal per-coordinate closed form") {
    MatrixXd a = MatrixXd::Zero(2, 2);
    a(0, 0) = 0.5;
    a(1, 1) = 0.2;
    const GaussianBelief b = stationary_init(a, MatrixXd::Identity(2, 2));
    REQUIRE(b.cov(0, 0) == Catch::Approx(4.0 / 3.0).epsilon(1e-12));
    REQUIRE(b.cov(1, 1) == Catch::Approx(25.0 / 24.0).epsilon(1e-12));
    REQUIRE(std::abs(b.cov(0, 1)) <= 1e-14);
  }
  SECTION("unstable dynamics propagate NonStationary") {
    REQUIRE_THROWS_AS(stationary_init(MatrixXd::Identity(1, 1), MatrixXd::Identity(1, 1)),
                      NonStationary);
  }
}

TEST_CASE("DlmSpec construction invariants") {
  SubstreamRng rng(7);
  const MatrixXd a = random_stable_matrix(rng, 2, 0.5);
  MatrixXd p0 = random_psd(rng, 2);
  p0(0, 1) += 1e-10;  // small asymmetry is symmetrized away
  const DlmSpec spec = DlmSpec::homogeneous(a, MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2),
                                            MatrixXd::Zero(2, 2), VectorXd::Zero(2), p0, 3);
  REQUIRE(max_abs(spec.init_cov() - spec.init_cov().transpose()) <= 1e-12);
  REQUIRE(spec.n_obs(1) == 2);

  REQUIRE_THROWS_AS(DlmSpec::homogeneous(a, MatrixXd::Identity(3, 2), MatrixXd::Identity(2, 2),
                                         MatrixXd::Zero(2, 2), VectorXd::Zero(2),
                                         MatrixXd::Identity(2, 2), 3),
                    DimensionMismatch);  // H rows != C rows
}

TEST_CASE("filter with all observations missing reduces to prediction") {
  SubstreamRng rng(43);
  const MatrixXd a = random_stable_matrix(rng, 3, 0.8);
  const MatrixXd g = rng.normal_matrix(3, 3);
  const VectorXd m0 = rng.normal_vector(3);
  const MatrixXd p0 = random_psd(rng, 3);
  const DlmSpec spec = DlmSpec::homogeneous(a, MatrixXd::Identity(2, 3).eval(),
                                            g, MatrixXd::Zero(2, 3), m0, p0, 5);
  const FilterResult fr = kalman_filter(spec, ObservationPanel::all_missing(spec));

  VectorXd m = m0;
  MatrixXd p = p0;
  for (int t = 0; t < 5; ++t) {
    REQUIRE(max_abs(fr.pred_mean[t] - m) <= 1e-12);
    REQUIRE(max_abs(fr.pred_cov[t] - p) <= 1e-12);
    REQUIRE(max_abs(fr.filt_mean[t] - m) <= 1e-12);
    m = a * m;
    p = a * p * a.transpose() + g * g.transpose();
  }
  REQUIRE(fr.log_likelihood == 0.0);

  const SmoothResult sm = kalman_smoother(spec, fr);
  for (int t = 0; t < 5; ++t) {
    REQUIRE(max_abs(sm.state_mean[t] - fr.pred_mean[t]) <= 1e-12);
    REQUIRE(max_abs(sm.state_cov[t] - fr.pred_cov[t]) <= 1e-12);
    REQUIRE(max_abs(sm.shock_mean[t]) <= 1e-12);
  }
}

TEST_CASE("filter matches dense conditioning on a correlated-noise instance") {
  SubstreamRng rng(47);
  const int n_x = 2, n_m = 1, horizon = 5;
  const MatrixXd a = random_stable_matrix(rng, n_x, 0.7);
  const MatrixXd c = rng.normal_matrix(n_m, n_x);
  const MatrixXd g = rng.normal_matrix(n_x, 3);
  const MatrixXd h = rng.normal_matrix(n_m, 3);
  REQUIRE(max_abs(g * h.transpose()) > 0.0);
  const DlmSpec spec = DlmSpec::homogeneous(a, c, g, h, rng.normal_vector(n_x),
                                            random_psd(rng, n_x), horizon);
  MatrixXd values = rng.normal_matrix(horizon, n_m);
  check_against_oracle(spec, ObservationPanel::from_matrix(values), 1e-8);
}

TEST_CASE("row deletion equals filtering the reduced spec") {
  SubstreamRng rng(53);
  const MatrixXd a = random_stable_matrix(rng, 2, 0.6);
  const MatrixXd c = rng.normal_matrix(3, 2);
  const MatrixXd g = rng.normal_matrix(2, 4);
  const MatrixXd h = rng.normal_matrix(3, 4);
  const VectorXd m0 = rng.normal_vector(2);
  const MatrixXd p0 = random_psd(rng, 2);
  const int horizon = 4;

  MatrixXd values = rng.normal_matrix(horizon, 3);
  values(2, 1) = std::numeric_limits<double>::quiet_NaN();

  const DlmSpec full = DlmSpec::homogeneous(a, c, g, h, m0, p0, horizon);
  const FilterResult fr_full = kalman_filter(full, ObservationPanel::from_matrix(values));

  // reduced spec drops row 1 of C and H at t=2 physically
  std::vector<MatrixXd> cs, hs, as, gs;
  std::vector<VectorXd> rows;
  for (int t = 0; t < horizon; ++t) {
    as.push_back(a);
    gs.push_back(g);
    if (t == 2) {
      MatrixXd c_red(2, 2), h_red(2, 4);
      c_red << c.row(0), c.row(2);
      h_red << h.row(0), h.row(2);
      cs.push_back(c_red);
      hs.push_back(h_red);
      VectorXd r(2);
      r << values(t, 0), values(t, 2);
      rows.push_back(r);
    } else {
      cs.push_back(c);
      hs.push_back(h);
      rows.push_back(values.row(t));
    }
  }
  const DlmSpec reduced = DlmSpec::time_varying(as, cs, gs, hs, m0, p0);
  const FilterResult fr_red = kalman_filter(reduced, ObservationPanel(rows));

  for (int t = 0; t < horizon; ++t) {
    REQUIRE(max_abs(fr_full.filt_mean[t] - fr_red.filt_mean[t]) <= 1e-13);
    REQUIRE(max_abs(fr_full.filt_cov[t] - fr_red.filt_cov[t]) <= 1e-13);
  }
  REQUIRE(fr_full.log_likelihood == Catch::Approx(fr_red.log_likelihood).epsilon(1e-13));
}

TEST_CASE("smoothed equals filtered at the final time") {
  SubstreamRng rng(59);
  const auto inst = random_dlm_instance(rng);
  const FilterResult fr = kalman_filter(inst.spec, inst.obs);
  const SmoothResult sm = kalman_smoother(inst.spec, fr);
  const int last = inst.spec.horizon() - 1;
  REQUIRE(max_abs(sm.state_mean[last] - fr.filt_mean[last]) <= 1e-12);
  REQUIRE(max_abs(sm.state_cov[last] - fr.filt_cov[last]) <= 1e-12);
}

TEST_CASE("property: filter/smoother match dense conditioning on 200 random instances") {
  SubstreamRng rng(61);
  for (int i = 0; i < 200; ++i) {
    const auto inst = random_dlm_instance(rng);
    check_against_oracle(inst.spec, inst.obs, 1e-8);
  }
}

TEST_CASE("property: covariances symmetric, PSD, and dominated by prediction") {
  SubstreamRng rng(67);
  for (int i = 0; i < 50; ++i) {
    const auto inst = random_dlm_instance(rng);
    const FilterResult fr = kalman_filter(inst.spec, inst.obs);
    const SmoothResult sm = kalman_smoother(inst.spec, fr);
    for (int t = 0; t < inst.spec.horizon(); ++t) {
      for (const MatrixXd* m : {&fr.pred_cov[t], &fr.filt_cov[t], &sm.state_cov[t], &sm.shock_cov[t]}) {
        REQUIRE(max_abs(*m - m->transpose()) <= 1e-12);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(*m);
        REQUIRE(es.eigenvalues().minCoeff() >= -1e-9);
      }
      Eigen::SelfAdjointEigenSolver<MatrixXd> gap(fr.pred_cov[t] - sm.state_cov[t]);
      REQUIRE(gap.eigenvalues().minCoeff() >= -1e-9);
    }
  }
}

TEST_CASE("singular innovation covariance honours the option switch") {
  // two identical exact measurement rows make F rank-deficient
  MatrixXd c(2, 1);
  c << 1.0, 1.0;
  const DlmSpec spec = DlmSpec::homogeneous(MatrixXd::Zero(1, 1), c, MatrixXd::Identity(1, 1),
                                            MatrixXd::Zero(2, 1), VectorXd::Zero(1),
                                            MatrixXd::Identity(1, 1), 1);
  MatrixXd values(1, 2);
  values << 0.3, 0.3;
  const ObservationPanel obs = ObservationPanel::from_matrix(values);
  REQUIRE_NOTHROW(kalman_filter(spec, obs));
  FilterOptions strict;
  strict.allow_singular_innovation = false;
  REQUIRE_THROWS_AS(kalman_filter(spec, obs, strict), SingularInnovation);

  const FilterResult fr = kalman_filter(spec, obs);
  REQUIRE(max_abs(fr.filt_mean[0] - VectorXd::Constant(1, 0.3)) <= 1e-12);
  REQUIRE(max_abs(fr.filt_cov[0]) <= 1e-12);
}
