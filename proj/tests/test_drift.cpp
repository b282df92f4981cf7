#include <cmath>
#include <vector>

#include <doctest.h>

#include "gprl/drift.hpp"
#include "gprl/rng.hpp"

using namespace gprl;

namespace {

PopulationScores scores_from_columns(
    const std::vector<std::vector<double>>& cols) {
  PopulationScores p;
  p.k = cols.size();
  p.g = cols[0].size();
  p.s_hat.assign(p.g, std::vector<double>(p.k, 0.0));
  for (std::size_t l = 0; l < p.k; ++l) {
    for (std::size_t i = 0; i < p.g; ++i) p.s_hat[i][l] = cols[l][i];
  }
  return p;
}

VarianceProfile profile_of(std::vector<double> alpha) {
  VarianceProfile p;
  p.alpha = std::move(alpha);
  return p;
}

}  // namespace

TEST_CASE("variance_profile pools per-group variances") {
  // Per-dimension population variances (3, 1): column (0,2,4) has variance
  // 8/3, column (0,2/sqrt(3)*...) -- use exact columns with variances 3,1.
  // Column (-2,1,1) has mean 0, variance 2; scale columns for (3, 1).
  const double s3 = std::sqrt(3.0 / 2.0);
  const double s1 = std::sqrt(1.0 / 2.0);
  const PopulationScores p = scores_from_columns(
      {{-2.0 * s3, 1.0 * s3, 1.0 * s3}, {-2.0 * s1, 1.0 * s1, 1.0 * s1}});
  const VarianceProfile profile = variance_profile({p});
  CHECK(profile.alpha[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(profile.alpha[1] == doctest::Approx(0.25).epsilon(1e-12));

  // Degenerate all-constant batch yields the uniform profile.
  const PopulationScores c =
      scores_from_columns({{0.25, 0.25, 0.25}, {-0.5, -0.5, -0.5}});
  const VarianceProfile u = variance_profile({c});
  CHECK(u.alpha[0] == 0.5);
  CHECK(u.alpha[1] == 0.5);

  // Permuting dimension labels permutes alpha.
  const PopulationScores swapped = scores_from_columns(
      {{-2.0 * s1, 1.0 * s1, 1.0 * s1}, {-2.0 * s3, 1.0 * s3, 1.0 * s3}});
  const VarianceProfile sp = variance_profile({swapped});
  CHECK(sp.alpha[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(sp.alpha[1] == doctest::Approx(0.75).epsilon(1e-12));

  CHECK_THROWS_AS(variance_profile({}), std::invalid_argument);

  // Pooling across a batch sums variances before normalizing.
  const VarianceProfile pooled = variance_profile({p, swapped});
  CHECK(pooled.alpha[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("drift_metric is a smoothed KL divergence") {
  const VarianceProfile uniform = profile_of({1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(drift_metric(uniform, uniform, 1e-6) <= 1e-12);

  // Hand value at eps -> 0: KL((0.8,0.1,0.1) || uniform) = 0.4596...
  const VarianceProfile skewed = profile_of({0.8, 0.1, 0.1});
  const double expected = 0.8 * std::log(0.8 * 3.0) +
                          0.1 * std::log(0.1 * 3.0) +
                          0.1 * std::log(0.1 * 3.0);
  CHECK(drift_metric(skewed, uniform, 1e-12) ==
        doctest::Approx(expected).epsilon(1e-9));
  CHECK(drift_metric(skewed, uniform, 1e-12) ==
        doctest::Approx(0.4596).epsilon(1e-3));

  // Asymmetry of KL on the same pair.
  CHECK(drift_metric(skewed, uniform, 1e-6) !=
        drift_metric(uniform, skewed, 1e-6));

  // Finite even when the reference has a zero entry.
  const VarianceProfile corner = profile_of({1.0, 0.0, 0.0});
  CHECK(std::isfinite(drift_metric(skewed, corner, 1e-6)));
  CHECK(drift_metric(skewed, corner, 1e-6) >= 0.0);

  CHECK_THROWS_AS(drift_metric(skewed, profile_of({0.5, 0.5}), 1e-6),
                  std::invalid_argument);
  CHECK_THROWS_AS(drift_metric(skewed, uniform, 0.0), std::invalid_argument);
}

TEST_CASE("controller tighten matches the hand-evaluated rule") {
  ControllerConfig cfg;  // defaults: tau 0.2, gamma 0.5, kappa 1.5, ...
  cfg.eps_profile = 1e-12;
  const VarianceProfile uniform = profile_of({1.0 / 3, 1.0 / 3, 1.0 / 3});
  DriftState state = DriftState::init(uniform, cfg);
  const VarianceProfile drifted = profile_of({0.8, 0.1, 0.1});

  const DriftState next = controller_step(state, drifted);
  CHECK(next.engaged);
  CHECK(next.step == 1);
  // Raw factors ((1/3)/alpha)^0.5 = (0.6455, 1.8257, 1.8257); renormalized
  // to mean 1: (0.4507, 1.2747, 1.2747).
  CHECK(next.multipliers[0] == doctest::Approx(0.4507).epsilon(1e-3));
  CHECK(next.multipliers[1] == doctest::Approx(1.2747).epsilon(1e-3));
  CHECK(next.multipliers[2] == doctest::Approx(1.2747).epsilon(1e-3));
  CHECK(next.beta == doctest::Approx(0.015).epsilon(1e-12));

  // Mean of multipliers is 1 after the tighten.
  const double mean =
      (next.multipliers[0] + next.multipliers[1] + next.multipliers[2]) / 3.0;
  CHECK(std::abs(mean - 1.0) <= 1e-9);

  // Direction: over-grown axes shrink, stagnated axes grow (pre-renorm
  // factor direction shows through at this separation).
  CHECK(next.multipliers[0] < 1.0);
  CHECK(next.multipliers[1] > 1.0);

  // Beta saturates at beta_max under repeated tighten.
  DriftState s = next;
  for (int t = 0; t < 50; ++t) s = controller_step(s, drifted);
  CHECK(s.beta == cfg.beta_max);
  CHECK(s.beta <= cfg.beta_max);
  CHECK(s.beta >= cfg.beta_0);
}

TEST_CASE("controller relaxation converges geometrically") {
  ControllerConfig cfg;
  const VarianceProfile uniform = profile_of({1.0 / 3, 1.0 / 3, 1.0 / 3});
  DriftState state = DriftState::init(uniform, cfg);
  state.multipliers = {0.5, 1.5, 1.0};
  state.beta = 0.1;

  const DriftState next = controller_step(state, uniform);  // D = 0 <= tau
  CHECK_FALSE(next.engaged);
  CHECK(next.multipliers[0] == doctest::Approx(0.505).epsilon(1e-12));
  CHECK(next.multipliers[1] == doctest::Approx(1.495).epsilon(1e-12));
  CHECK(next.multipliers[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(next.beta == doctest::Approx(0.099).epsilon(1e-12));

  // Closed form after n relaxations: m = 1 + delta^n (m0 - 1).
  DriftState s = state;
  const int n = 40;
  for (int t = 0; t < n; ++t) s = controller_step(s, uniform);
  const double decay = std::pow(cfg.delta, n);
  for (std::size_t l = 0; l < 3; ++l) {
    const double closed = 1.0 + decay * (state.multipliers[l] - 1.0);
    CHECK(std::abs(s.multipliers[l] - closed) <= 1e-12);
  }
  // Beta floors at beta_0.
  for (int t = 0; t < 500; ++t) s = controller_step(s, uniform);
  CHECK(s.beta == cfg.beta_0);
}

TEST_CASE("controller_step is deterministic") {
  ControllerConfig cfg;
  const VarianceProfile uniform = profile_of({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const VarianceProfile drifted = profile_of({0.7, 0.2, 0.1});
  const DriftState state = DriftState::init(uniform, cfg);
  const DriftState a = controller_step(state, drifted);
  const DriftState b = controller_step(state, drifted);
  CHECK(a.beta == b.beta);
  CHECK(a.engaged == b.engaged);
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(a.multipliers[l] == b.multipliers[l]);
  }
}

TEST_CASE("effective_weights multiplies elementwise") {
  ControllerConfig cfg;
  DriftState state = DriftState::init(profile_of({0.5, 0.5}), cfg);
  const SubspaceWeights lambdas({2.0, 2.0});
  const std::vector<double> identity = effective_weights(state, lambdas);
  CHECK(identity[0] == 2.0);
  CHECK(identity[1] == 2.0);

  state.multipliers = {0.5, 1.5};
  const std::vector<double> scaled = effective_weights(state, lambdas);
  CHECK(scaled[0] == 1.0);
  CHECK(scaled[1] == 3.0);

  const std::vector<double> zero =
      effective_weights(state, SubspaceWeights({0.0, 0.0}));
  CHECK(zero[0] == 0.0);
  CHECK(zero[1] == 0.0);

  CHECK_THROWS_AS(effective_weights(state, SubspaceWeights({1.0})),
                  std::invalid_argument);
}

TEST_CASE("ControllerConfig validation") {
  ControllerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  ControllerConfig bad = cfg;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.kappa = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.delta = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.beta_0 = 0.5;  // above beta_max
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
