#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gprl/advantage.hpp"
#include "gprl/drift.hpp"
#include "gprl/preference_core.hpp"
#include "gprl/rng.hpp"

namespace gprl {

// Finite synthetic response space.  Qualities are latent per-axis scores;
// embeddings are precomputed with phase_embed at the catalog's angle_scale.
struct CatalogResponse {
  std::string id;
  std::vector<double> quality;  // k latent qualities
  double length_proxy = 1.0;
};

struct Catalog {
  std::vector<CatalogResponse> responses;
  std::vector<PreferenceEmbedding> embeddings;
  std::vector<std::size_t> exploit_indices;  // empty for healthy catalogs
  double angle_scale = 0.4;
};

// Categorical policy over the catalog.
struct SoftmaxPolicy {
  std::vector<double> logits;
  double temperature = 1.0;

  // Numerically stable softmax of logits / temperature.
  std::vector<double> probabilities() const;
};

// One sampled rollout group.
struct RolloutGroup {
  std::vector<std::size_t> indices;  // catalog indices, G entries
  std::vector<double> old_probs;     // pi_theta_old at sampling time
  std::vector<double> ratios;        // current / old, 1.0 right after sampling
};

enum class ScenarioKind { healthy, hacked, corrected };
enum class Normalization { per_dim, global };
enum class BaselineMode { gprl, grpo_scalar };
// Reward source for the scalar (GRPO) baseline: the dot product w . quality,
// or the induced preference-model scalar s_hat on axis 0 (used by the k=1
// equivalence checks).
enum class ScalarReward { quality_dot, gpm_score };

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::healthy;
  std::size_t k = 3;
  std::size_t g = 8;
  std::size_t m = 64;
  std::uint64_t steps = 500;
  std::uint64_t seed = 1;
  double learning_rate = 0.05;
  double clip_epsilon = 0.2;
  double temperature = 1.0;
  double angle_scale = 0.4;
  ControllerConfig controller;
  bool controller_enabled = false;  // forced on for corrected, off for hacked
  Normalization normalization = Normalization::per_dim;
  BaselineMode baseline = BaselineMode::gprl;
  ScalarReward scalar_reward = ScalarReward::quality_dot;
  // Optional mixed weights for the scalar baseline reward; defaults to the
  // indicator of exploit_axis.
  std::optional<std::vector<double>> scalar_weights;
  std::size_t exploit_axis = 0;  // 0-based

  // Scenario constants (fixed, not config-file keys).
  double exploit_quality_low = 2.0;    // exploit-axis quality range low end
  double exploit_quality_high = 3.5;   // ... high end
  double offaxis_quality = -0.25;      // exploit responses' other axes
  double exploit_eigenvalue = 6.0;     // lambda override on the exploited
                                       // axis in hacked/corrected scenarios
  double exploit_logit = 0.0;          // initial logit of exploit responses
  std::size_t drift_window = 30;       // batches pooled per variance profile

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// One row of the trajectory, aligned with the trajectory CSV schema.
struct StepRecord {
  std::uint64_t step = 0;
  double drift = 0.0;                 // D(t)
  double beta = 0.0;
  bool engaged = false;
  std::vector<double> multipliers;    // m_1..m_k
  std::vector<double> alpha;          // alpha_1..alpha_k
  double exploit_mass = 0.0;
  std::vector<double> mean_quality;   // group mean latent quality per axis
  double kl_to_ref = 0.0;
  double loss = 0.0;
  // Diagnostics kept out of the trajectory CSV.
  double mean_advantage = 0.0;  // group mean aggregate advantage
};

// Samples g indices i.i.d. with replacement from the policy's categorical
// distribution; records old probabilities; initializes ratios to 1.  Throws
// std::invalid_argument when g < 2.
RolloutGroup sample_group(const SoftmaxPolicy& policy, std::size_t g,
                          Rng& rng);

// Exact discrete KL(policy || reference).  Throws std::invalid_argument on
// size mismatch.
double policy_kl(const SoftmaxPolicy& policy, const SoftmaxPolicy& reference);

// Analytic gradient of the clipped surrogate loss with respect to the
// policy's logits; the clip's min makes the loss piecewise-differentiable
// and the gradient follows the active branch.  Throws std::invalid_argument
// on dimension mismatch.
std::vector<double> surrogate_gradient(const SoftmaxPolicy& policy,
                                       const SoftmaxPolicy& reference,
                                       const RolloutGroup& group,
                                       const std::vector<double>& advantages,
                                       double clip_epsilon, double beta);

// Deterministic catalog construction.  Consumes m*k normal draws from `rng`;
// hacked/corrected scenarios then overwrite the trailing ceil(m/8) responses
// with the exploit block (one inflated axis, mildly degraded others).
Catalog make_catalog(const ScenarioConfig& config, Rng& rng);

// Full training state for one run; owned by run_scenario but exposed so
// tests can drive single steps.
struct SimState {
  ScenarioConfig config;
  Catalog catalog;
  SoftmaxPolicy policy;
  SoftmaxPolicy reference;
  SubspaceWeights lambdas;
  DriftState drift;
  std::vector<PopulationScores> window;      // rolling, <= drift_window
  std::vector<PopulationScores> ref_window;  // first drift_window batches
  Rng rng;

  static SimState init(const ScenarioConfig& config);
};

// One training iteration: sample -> score -> advantage -> gradient update ->
// drift bookkeeping and (if enabled) controller transition.
StepRecord train_step(SimState& state);

// Runs config.steps iterations from a fresh state; deterministic for a fixed
// seed.  Throws std::invalid_argument on invalid config.
std::vector<StepRecord> run_scenario(const ScenarioConfig& config);

}  // namespace gprl
