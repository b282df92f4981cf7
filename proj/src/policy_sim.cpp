#include "gprl/policy_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace gprl {

std::vector<double> SoftmaxPolicy::probabilities() const {
  std::vector<double> probs(logits.size());
  double max_logit = logits[0];
  for (double x : logits) max_logit = std::max(max_logit, x);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp((logits[i] - max_logit) / temperature);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return probs;
}

void ScenarioConfig::validate() const {
  if (k < 1) throw std::invalid_argument("config field k: must be >= 1");
  if (g < 2) throw std::invalid_argument("config field g: must be >= 2");
  if (m < 2) throw std::invalid_argument("config field m: must be >= 2");
  if (steps < 1) {
    throw std::invalid_argument("config field steps: must be >= 1");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument(
        "config field learning_rate: must be finite and >= 0");
  }
  if (!(clip_epsilon > 0.0) || !(clip_epsilon < 1.0)) {
    throw std::invalid_argument(
        "config field clip_epsilon: must lie in (0,1)");
  }
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("config field temperature: must be positive");
  }
  if (!(angle_scale > 0.0)) {
    throw std::invalid_argument("config field angle_scale: must be positive");
  }
  if (exploit_axis >= k) {
    throw std::invalid_argument(
        "config field exploit_axis: must be in [1, k]");
  }
  if (kind == ScenarioKind::corrected && !controller_enabled) {
    throw std::invalid_argument(
        "config field controller: corrected scenario requires controller=on");
  }
  if (kind == ScenarioKind::hacked && controller_enabled) {
    throw std::invalid_argument(
        "config field controller: hacked scenario requires controller=off");
  }
  if (scalar_weights && scalar_weights->size() != k) {
    throw std::invalid_argument(
        "config field scalar_weights: length must equal k");
  }
  if (drift_window < 1) {
    throw std::invalid_argument("config field drift_window: must be >= 1");
  }
  controller.validate();
}

RolloutGroup sample_group(const SoftmaxPolicy& policy, std::size_t g,
                          Rng& rng) {
  if (g < 2) {
    throw std::invalid_argument("sample_group: group size must be >= 2");
  }
  const std::vector<double> probs = policy.probabilities();
  RolloutGroup group;
  group.indices.resize(g);
  group.old_probs.resize(g);
  group.ratios.assign(g, 1.0);
  for (std::size_t i = 0; i < g; ++i) {
    const std::size_t idx = rng.categorical(probs);
    group.indices[i] = idx;
    group.old_probs[i] = probs[idx];
  }
  return group;
}

double policy_kl(const SoftmaxPolicy& policy, const SoftmaxPolicy& reference) {
  if (policy.logits.size() != reference.logits.size()) {
    throw std::invalid_argument("policy_kl: policy size mismatch");
  }
  const std::vector<double> p = policy.probabilities();
  const std::vector<double> q = reference.probabilities();
  double kl = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    kl += p[a] * std::log(p[a] / q[a]);
  }
  return kl;
}

std::vector<double> surrogate_gradient(const SoftmaxPolicy& policy,
                                       const SoftmaxPolicy& reference,
                                       const RolloutGroup& group,
                                       const std::vector<double>& advantages,
                                       double clip_epsilon, double beta) {
  const std::size_t m = policy.logits.size();
  const std::size_t g = group.indices.size();
  if (reference.logits.size() != m) {
    throw std::invalid_argument("surrogate_gradient: reference size mismatch");
  }
  if (advantages.size() != g || group.old_probs.size() != g) {
    throw std::invalid_argument("surrogate_gradient: group size mismatch");
  }
  const std::vector<double> probs = policy.probabilities();
  const std::vector<double> ref_probs = reference.probabilities();
  const double inv_t = 1.0 / policy.temperature;
  const double lo = 1.0 - clip_epsilon;
  const double hi = 1.0 + clip_epsilon;

  std::vector<double> grad(m, 0.0);
  // Policy term: for each group member on the unclipped branch,
  // d(r_i A_i)/dlogit_b = A_i r_i (delta_{a_i b} - pi(b)) / T; clipped-and-
  // saturated members contribute zero.
  double coef_total = 0.0;
  const double inv_g = 1.0 / static_cast<double>(g);
  for (std::size_t i = 0; i < g; ++i) {
    const double r = probs[group.indices[i]] / group.old_probs[i];
    const double a = advantages[i];
    const double clipped = std::min(std::max(r, lo), hi);
    const bool unclipped = r * a <= clipped * a;
    const bool saturated = (r < lo) || (r > hi);
    if (!unclipped && saturated) continue;  // active branch is flat
    const double coef = a * r * inv_g;
    grad[group.indices[i]] -= coef * inv_t;
    coef_total += coef;
  }
  // KL term: dKL/dlogit_b = pi(b) (ln(pi(b)/pi_ref(b)) - KL) / T.
  const double kl = policy_kl(policy, reference);
  for (std::size_t b = 0; b < m; ++b) {
    grad[b] += coef_total * probs[b] * inv_t;
    grad[b] += beta * probs[b] * (std::log(probs[b] / ref_probs[b]) - kl) *
               inv_t;
  }
  return grad;
}

Catalog make_catalog(const ScenarioConfig& config, Rng& rng) {
  Catalog catalog;
  catalog.angle_scale = config.angle_scale;
  catalog.responses.resize(config.m);
  for (std::size_t i = 0; i < config.m; ++i) {
    CatalogResponse& r = catalog.responses[i];
    r.quality.resize(config.k);
    for (std::size_t l = 0; l < config.k; ++l) r.quality[l] = rng.normal();
  }
  if (config.kind != ScenarioKind::healthy) {
    const std::size_t e = (config.m + 7) / 8;
    for (std::size_t n = 0; n < e; ++n) {
      const std::size_t i = config.m - e + n;
      CatalogResponse& r = catalog.responses[i];
      for (std::size_t l = 0; l < config.k; ++l) {
        r.quality[l] = config.offaxis_quality;
      }
      const double span = config.exploit_quality_high - config.exploit_quality_low;
      r.quality[config.exploit_axis] =
          e == 1 ? config.exploit_quality_low
                 : config.exploit_quality_low +
                       span * static_cast<double>(n) /
                           static_cast<double>(e - 1);
      catalog.exploit_indices.push_back(i);
    }
  }
  char buf[32];
  for (std::size_t i = 0; i < config.m; ++i) {
    CatalogResponse& r = catalog.responses[i];
    const bool exploit =
        !catalog.exploit_indices.empty() && i >= catalog.exploit_indices[0];
    std::snprintf(buf, sizeof(buf), "%s%03zu", exploit ? "exploit" : "r", i);
    r.id = buf;
    double norm_sq = 0.0;
    for (double q : r.quality) norm_sq += q * q;
    r.length_proxy = 1.0 + std::sqrt(norm_sq);
    catalog.embeddings.push_back(
        phase_embed(r.quality, catalog.angle_scale));
  }
  return catalog;
}

SimState SimState::init(const ScenarioConfig& config) {
  config.validate();
  SimState state{config,
                 Catalog{},
                 SoftmaxPolicy{},
                 SoftmaxPolicy{},
                 SubspaceWeights(std::vector<double>(config.k, 1.0)),
                 DriftState{},
                 {},
                 {},
                 Rng(config.seed)};
  state.catalog = make_catalog(config, state.rng);
  state.policy.logits.assign(config.m, 0.0);
  state.policy.temperature = config.temperature;
  for (std::size_t i : state.catalog.exploit_indices) {
    state.policy.logits[i] = config.exploit_logit;
  }
  state.reference = state.policy;
  std::vector<double> lambdas(config.k, 1.0);
  if (config.kind != ScenarioKind::healthy) {
    // Scenario constant: the preference model is over-sensitive to the
    // exploited axis, which is what lets a single-axis exploit pay off.
    lambdas[config.exploit_axis] = config.exploit_eigenvalue;
  }
  state.lambdas = SubspaceWeights(std::move(lambdas));
  VarianceProfile uniform;
  uniform.alpha.assign(config.k, 1.0 / static_cast<double>(config.k));
  state.drift = DriftState::init(uniform, config.controller);
  return state;
}

StepRecord train_step(SimState& state) {
  const ScenarioConfig& cfg = state.config;
  RolloutGroup group = sample_group(state.policy, cfg.g, state.rng);

  // Score the group through the frozen preference model.
  std::vector<PreferenceEmbedding> members;
  members.reserve(cfg.g);
  for (std::size_t idx : group.indices) {
    members.push_back(state.catalog.embeddings[idx]);
  }
  const ScoreTensor tensor = score_tensor(members);
  const PopulationScores scores = population_scores(tensor);

  // Advantages: GPRL pipeline or the scalar GRPO baseline.
  std::vector<double> advantages;
  if (cfg.baseline == BaselineMode::gprl) {
    AdvantageProfile profile = cfg.normalization == Normalization::per_dim
                                   ? normalize_per_dimension(scores)
                                   : normalize_global(scores);
    const std::vector<double> weights =
        cfg.controller_enabled ? effective_weights(state.drift, state.lambdas)
                               : state.lambdas.lambdas();
    aggregate_advantage(profile, weights);
    advantages = std::move(profile.aggregate);
  } else {
    std::vector<double> rewards(cfg.g);
    if (cfg.scalar_reward == ScalarReward::gpm_score) {
      for (std::size_t i = 0; i < cfg.g; ++i) rewards[i] = scores.s_hat[i][0];
    } else {
      std::vector<double> w(cfg.k, 0.0);
      w[cfg.exploit_axis] = 1.0;
      if (cfg.scalar_weights) w = *cfg.scalar_weights;
      for (std::size_t i = 0; i < cfg.g; ++i) {
        double dot = 0.0;
        const std::vector<double>& q =
            state.catalog.responses[group.indices[i]].quality;
        for (std::size_t l = 0; l < cfg.k; ++l) dot += w[l] * q[l];
        rewards[i] = dot;
      }
    }
    advantages = grpo_advantage(rewards);
  }

  // Loss and gradient at the sampling snapshot (one inner iteration, so all
  // ratios are exactly 1 here).
  const double kl = policy_kl(state.policy, state.reference);
  SurrogateInputs loss_inputs;
  loss_inputs.ratios = group.ratios;
  loss_inputs.advantages = advantages;
  loss_inputs.clip_epsilon = cfg.clip_epsilon;
  loss_inputs.beta = state.drift.beta;
  loss_inputs.kl_value = kl;
  const double loss = clipped_surrogate(loss_inputs);
  const std::vector<double> grad =
      surrogate_gradient(state.policy, state.reference, group, advantages,
                         cfg.clip_epsilon, state.drift.beta);
  for (std::size_t b = 0; b < cfg.m; ++b) {
    state.policy.logits[b] -= cfg.learning_rate * grad[b];
  }

  // Drift bookkeeping: the current profile pools the last drift_window
  // batches; the reference pools the first drift_window batches (frozen once
  // full).  During warmup the two windows coincide, so D is exactly 0.
  state.window.push_back(scores);
  if (state.window.size() > cfg.drift_window) {
    state.window.erase(state.window.begin());
  }
  if (state.ref_window.size() < cfg.drift_window) {
    state.ref_window.push_back(scores);
    state.drift.alpha_ref = variance_profile(state.ref_window);
  }
  const VarianceProfile current = variance_profile(state.window);
  const double drift_value =
      drift_metric(current, state.drift.alpha_ref, cfg.controller.eps_profile);
  if (cfg.controller_enabled) {
    state.drift = controller_step(state.drift, current);
  } else {
    state.drift.step += 1;
    state.drift.engaged = false;
  }

  StepRecord record;
  record.step = state.drift.step - 1;
  record.drift = drift_value;
  record.beta = state.drift.beta;
  record.engaged = state.drift.engaged;
  record.multipliers = state.drift.multipliers;
  record.alpha = current.alpha;
  record.kl_to_ref = kl;
  record.loss = loss;
  const std::vector<double> updated = state.policy.probabilities();
  for (std::size_t i : state.catalog.exploit_indices) {
    record.exploit_mass += updated[i];
  }
  record.mean_quality.assign(cfg.k, 0.0);
  for (std::size_t i = 0; i < cfg.g; ++i) {
    const std::vector<double>& q =
        state.catalog.responses[group.indices[i]].quality;
    for (std::size_t l = 0; l < cfg.k; ++l) record.mean_quality[l] += q[l];
  }
  for (std::size_t l = 0; l < cfg.k; ++l) {
    record.mean_quality[l] /= static_cast<double>(cfg.g);
  }
  for (double a : advantages) record.mean_advantage += a;
  record.mean_advantage /= static_cast<double>(cfg.g);
  return record;
}

std::vector<StepRecord> run_scenario(const ScenarioConfig& config) {
  SimState state = SimState::init(config);
  std::vector<StepRecord> records;
  records.reserve(config.steps);
  for (std::uint64_t t = 0; t < config.steps; ++t) {
    records.push_back(train_step(state));
  }
  return records;
}

}  // namespace gprl
