#include "gprl/drift.hpp"

#include <cmath>
#include <stdexcept>

namespace gprl {

void ControllerConfig::validate() const {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("ControllerConfig: tau must be positive");
  }
  if (!(gamma > 0.0) || !(gamma <= 1.0)) {
    throw std::invalid_argument("ControllerConfig: gamma must be in (0,1]");
  }
  if (!(kappa > 1.0)) {
    throw std::invalid_argument("ControllerConfig: kappa must exceed 1");
  }
  if (!(beta_max > 0.0)) {
    throw std::invalid_argument("ControllerConfig: beta_max must be positive");
  }
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("ControllerConfig: delta must be in (0,1)");
  }
  if (!(beta_0 > 0.0) || !(beta_0 <= beta_max)) {
    throw std::invalid_argument(
        "ControllerConfig: beta_0 must be in (0, beta_max]");
  }
  if (!(eps_profile > 0.0)) {
    throw std::invalid_argument(
        "ControllerConfig: eps_profile must be positive");
  }
}

DriftState DriftState::init(VarianceProfile reference,
                            ControllerConfig config) {
  config.validate();
  DriftState state;
  state.multipliers.assign(reference.k(), 1.0);
  state.alpha_ref = std::move(reference);
  state.beta = config.beta_0;
  state.config = config;
  return state;
}

VarianceProfile variance_profile(const std::vector<PopulationScores>& batch) {
  if (batch.empty()) {
    throw std::invalid_argument("variance_profile: empty batch");
  }
  const std::size_t k = batch[0].k;
  std::vector<double> pooled(k, 0.0);
  for (const PopulationScores& p : batch) {
    if (p.g < 2) {
      throw std::invalid_argument("variance_profile: group size must be >= 2");
    }
    if (p.k != k) {
      throw std::invalid_argument("variance_profile: mixed k in batch");
    }
    const double g = static_cast<double>(p.g);
    for (std::size_t l = 0; l < k; ++l) {
      double sum = 0.0;
      for (std::size_t i = 0; i < p.g; ++i) sum += p.s_hat[i][l];
      const double mu = sum / g;
      double sq = 0.0;
      for (std::size_t i = 0; i < p.g; ++i) {
        const double d = p.s_hat[i][l] - mu;
        sq += d * d;
      }
      pooled[l] += sq / g;  // population variance
    }
  }
  double total = 0.0;
  for (double v : pooled) total += v;
  VarianceProfile profile;
  profile.alpha.assign(k, 0.0);
  if (total == 0.0) {
    const double uniform = 1.0 / static_cast<double>(k);
    for (std::size_t l = 0; l < k; ++l) profile.alpha[l] = uniform;
  } else {
    for (std::size_t l = 0; l < k; ++l) profile.alpha[l] = pooled[l] / total;
  }
  return profile;
}

double drift_metric(const VarianceProfile& current,
                    const VarianceProfile& reference, double eps) {
  const std::size_t k = current.k();
  if (reference.k() != k) {
    throw std::invalid_argument("drift_metric: profile k mismatch");
  }
  if (!(eps > 0.0)) {
    throw std::invalid_argument("drift_metric: eps must be positive");
  }
  // Smooth both profiles with eps and renormalize before the KL sum so the
  // metric stays finite when a reference entry is 0.
  const double denom = 1.0 + eps * static_cast<double>(k);
  double d = 0.0;
  for (std::size_t l = 0; l < k; ++l) {
    const double p = (current.alpha[l] + eps) / denom;
    const double q = (reference.alpha[l] + eps) / denom;
    d += p * std::log(p / q);
  }
  return d;
}

DriftState controller_step(const DriftState& state,
                           const VarianceProfile& current) {
  if (current.k() != state.alpha_ref.k()) {
    throw std::invalid_argument("controller_step: profile k mismatch");
  }
  const ControllerConfig& cfg = state.config;
  const std::size_t k = current.k();
  DriftState next = state;
  const double d = drift_metric(current, state.alpha_ref, cfg.eps_profile);
  if (d > cfg.tau) {
    // Tighten: shrink multipliers on over-grown axes, grow them on stagnated
    // ones, then renormalize to mean 1.
    double sum = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
      const double factor = std::pow(
          state.alpha_ref.alpha[l] / (current.alpha[l] + cfg.eps_profile),
          cfg.gamma);
      next.multipliers[l] = state.multipliers[l] * factor;
      sum += next.multipliers[l];
    }
    const double mean = sum / static_cast<double>(k);
    for (std::size_t l = 0; l < k; ++l) next.multipliers[l] /= mean;
    next.beta = std::min(cfg.kappa * state.beta, cfg.beta_max);
    next.engaged = true;
  } else {
    // Relax: geometric decay of multipliers toward 1 and beta toward beta_0.
    for (std::size_t l = 0; l < k; ++l) {
      next.multipliers[l] = cfg.delta * state.multipliers[l] + (1.0 - cfg.delta);
    }
    next.beta = std::max(cfg.beta_0, state.beta * cfg.delta);
    next.engaged = false;
  }
  next.step = state.step + 1;
  return next;
}

std::vector<double> effective_weights(const DriftState& state,
                                      const SubspaceWeights& lambdas) {
  if (lambdas.k() != state.multipliers.size()) {
    throw std::invalid_argument("effective_weights: length mismatch");
  }
  std::vector<double> out(lambdas.k());
  for (std::size_t l = 0; l < lambdas.k(); ++l) {
    out[l] = state.multipliers[l] * lambdas[l];
  }
  return out;
}

}  // namespace gprl
