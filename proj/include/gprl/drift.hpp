#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gprl/advantage.hpp"

namespace gprl {

// Point on the k-simplex: per-dimension shares of between-response score
// variance.
struct VarianceProfile {
  std::vector<double> alpha;

  std::size_t k() const { return alpha.size(); }
};

// Controller hyperparameters.  Defaults follow the reference implementation
// settings (see README).
struct ControllerConfig {
  double tau = 0.20;       // drift threshold
  double gamma = 0.5;      // redistribution strength, in (0, 1]
  double kappa = 1.5;      // KL multiplier, > 1
  double beta_max = 0.20;  // KL ceiling
  double delta = 0.99;     // relaxation rate, in (0, 1)
  double beta_0 = 0.01;    // baseline KL coefficient
  double eps_profile = 1e-6;  // smoothing epsilon for tighten rule and KL

  // Throws std::invalid_argument if any range constraint is violated.
  void validate() const;
};

// Mutable controller state owned by a single training run.
struct DriftState {
  VarianceProfile alpha_ref;        // reference profile alpha^(0)
  std::vector<double> multipliers;  // m_l, mean 1 after every tighten
  double beta = 0.01;
  ControllerConfig config;
  bool engaged = false;  // D > tau at the last controller step
  std::uint64_t step = 0;

  // Fresh state with unit multipliers and beta = config.beta_0.
  static DriftState init(VarianceProfile reference, ControllerConfig config);
};

// Pooled variance profile of a batch: per dimension, population variances of
// s_hat within each group are summed over the batch, then normalized across
// dimensions.  A zero total yields the uniform profile 1/k.  Throws
// std::invalid_argument on an empty batch, G < 2, or mixed k.
VarianceProfile variance_profile(const std::vector<PopulationScores>& batch);

// D = KL(current || reference) on eps-smoothed, renormalized profiles.
// Throws std::invalid_argument on k mismatch or nonpositive eps.
double drift_metric(const VarianceProfile& current,
                    const VarianceProfile& reference, double eps);

// One controller transition.  If D = drift_metric(current, alpha_ref,
// eps_profile) exceeds tau, tighten:
//   m_l <- N[ m_l * (alpha_ref_l / (current_l + eps))^gamma ],  N = mean-1
//   renormalization; beta <- min(kappa*beta, beta_max); engaged = true.
// Otherwise relax: m_l <- delta*m_l + (1-delta); beta <- max(beta_0,
// beta*delta); engaged = false.  Increments step.
DriftState controller_step(const DriftState& state,
                           const VarianceProfile& current);

// Elementwise effective weights m_l * lambda_l.  Throws
// std::invalid_argument on length mismatch.
std::vector<double> effective_weights(const DriftState& state,
                                      const SubspaceWeights& lambdas);

}  // namespace gprl
