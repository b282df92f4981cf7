#include "gprl/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "gprl/policy_sim.hpp"

namespace gprl::oracle {

namespace {

// Kahan compensated accumulator.
class Kahan {
 public:
  void add(double x) {
    const double y = x - compensation_;
    const double t = sum_ + y;
    compensation_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace

ScoreTensor naive_scores(const std::vector<PreferenceEmbedding>& group) {
  if (group.size() < 2) {
    throw std::invalid_argument("naive_scores: group size must be >= 2");
  }
  const std::size_t g = group.size();
  const std::size_t k = group[0].k();
  for (const auto& v : group) {
    if (v.k() != k) {
      throw std::invalid_argument("naive_scores: mixed k in group");
    }
  }
  ScoreTensor tensor;
  tensor.g = g;
  tensor.k = k;
  tensor.scores.assign(k, std::vector<double>(g * g, 0.0));
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t j = 0; j < g; ++j) {
        // The bilinear form evaluated directly for every (i, j), diagonal
        // included.
        tensor.scores[l][i * g + j] =
            group[i][2 * l + 1] * group[j][2 * l] -
            group[i][2 * l] * group[j][2 * l + 1];
      }
    }
  }
  return tensor;
}

AdvantageProfile naive_pipeline(const std::vector<PreferenceEmbedding>& group,
                                const std::vector<double>& weights,
                                double epsilon) {
  const ScoreTensor tensor = naive_scores(group);
  const std::size_t g = tensor.g;
  const std::size_t k = tensor.k;
  if (weights.size() != k) {
    throw std::invalid_argument("naive_pipeline: weight length mismatch");
  }
  // Step 1: population scores.
  std::vector<std::vector<double>> s_hat(g, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t l = 0; l < k; ++l) {
      Kahan sum;
      for (std::size_t j = 0; j < g; ++j) {
        if (j != i) sum.add(tensor.at(l, i, j));
      }
      s_hat[i][l] = sum.value() / static_cast<double>(g - 1);
    }
  }
  // Step 2: per-dimension normalization.
  AdvantageProfile profile;
  profile.g = g;
  profile.k = k;
  profile.epsilon = epsilon;
  profile.per_dim.assign(g, std::vector<double>(k, 0.0));
  profile.mu.assign(k, 0.0);
  profile.sigma.assign(k, 0.0);
  for (std::size_t l = 0; l < k; ++l) {
    Kahan mean_sum;
    for (std::size_t i = 0; i < g; ++i) mean_sum.add(s_hat[i][l]);
    const double mu = mean_sum.value() / static_cast<double>(g);
    Kahan var_sum;
    for (std::size_t i = 0; i < g; ++i) {
      var_sum.add((s_hat[i][l] - mu) * (s_hat[i][l] - mu));
    }
    const double sigma = std::sqrt(var_sum.value() / static_cast<double>(g));
    profile.mu[l] = mu;
    profile.sigma[l] = sigma;
    if (sigma == 0.0) continue;
    for (std::size_t i = 0; i < g; ++i) {
      profile.per_dim[i][l] = (s_hat[i][l] - mu) / (sigma + epsilon);
    }
  }
  // Step 3: weighted aggregation.
  profile.aggregate.assign(g, 0.0);
  for (std::size_t i = 0; i < g; ++i) {
    Kahan sum;
    for (std::size_t l = 0; l < k; ++l) {
      sum.add(weights[l] * profile.per_dim[i][l]);
    }
    profile.aggregate[i] = sum.value();
  }
  return profile;
}

std::vector<double> fd_gradient(
    const std::function<double(const std::vector<double>&)>& loss,
    const std::vector<double>& logits, double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("fd_gradient: step must be positive");
  }
  std::vector<double> grad(logits.size());
  std::vector<double> point = logits;
  for (std::size_t a = 0; a < logits.size(); ++a) {
    point[a] = logits[a] + step;
    const double up = loss(point);
    point[a] = logits[a] - step;
    const double down = loss(point);
    point[a] = logits[a];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw std::runtime_error("fd_gradient: loss evaluated non-finite");
    }
    grad[a] = (up - down) / (2.0 * step);
  }
  return grad;
}

OracleReport prop2_search(std::uint64_t trials, std::size_t k, Rng& rng) {
  OracleReport report;
  report.name = "prop2_search(k=" + std::to_string(k) + ")";
  if (trials < 1) {
    throw std::invalid_argument("prop2_search: trials must be >= 1");
  }
  if (k < 2) {
    throw std::invalid_argument("prop2_search: k must be >= 2");
  }
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::size_t l_star =
        static_cast<std::size_t>(rng.uniform01() * static_cast<double>(k));
    std::vector<double> a_star(k), a_dagger(k), lambdas(k);
    for (std::size_t l = 0; l < k; ++l) {
      a_star[l] = 4.0 * rng.uniform01() - 2.0;
      lambdas[l] = rng.uniform01();
      if (l == l_star) {
        a_dagger[l] = a_star[l] + rng.uniform01() + 1e-9;  // strict improve
      } else {
        a_dagger[l] = a_star[l] - rng.uniform01() - 1e-9;  // strict degrade
      }
    }
    // Evaluate the sufficient condition and the aggregate ordering with
    // independent compensated sums.
    Kahan lhs;
    for (std::size_t l = 0; l < k; ++l) {
      if (l != l_star) lhs.add(lambdas[l] * (a_star[l] - a_dagger[l]));
    }
    const double rhs = lambdas[l_star] * (a_dagger[l_star] - a_star[l_star]);
    Kahan agg_star, agg_dagger;
    for (std::size_t l = 0; l < k; ++l) {
      agg_star.add(lambdas[l] * a_star[l]);
      agg_dagger.add(lambdas[l] * a_dagger[l]);
    }
    ++report.case_count;
    if (lhs.value() > rhs && !(agg_dagger.value() < agg_star.value())) {
      report.failures.push_back("trial " + std::to_string(t) +
                                ": condition held but ordering failed");
    }
  }
  return report;
}

PreferenceEmbedding random_embedding(std::size_t k, Rng& rng) {
  std::vector<double> components(2 * k);
  double norm_sq = 0.0;
  for (double& x : components) {
    x = rng.normal();
    norm_sq += x * x;
  }
  const double norm = std::sqrt(norm_sq);
  for (double& x : components) x /= norm;
  return PreferenceEmbedding(std::move(components));
}

namespace {

std::vector<PreferenceEmbedding> random_group(std::size_t g, std::size_t k,
                                              Rng& rng) {
  std::vector<PreferenceEmbedding> group;
  group.reserve(g);
  for (std::size_t i = 0; i < g; ++i) group.push_back(random_embedding(k, rng));
  return group;
}

void track_error(OracleReport& report, double abs_error, double scale,
                 double tolerance, const std::string& descriptor) {
  report.max_abs_error = std::max(report.max_abs_error, abs_error);
  const double rel = abs_error / std::max(scale, 1e-300);
  report.max_rel_error = std::max(report.max_rel_error, rel);
  if (abs_error > tolerance) report.failures.push_back(descriptor);
}

}  // namespace

OracleReport scores_check(std::uint64_t trials, Rng& rng) {
  OracleReport report;
  report.name = "scores_check";
  const std::size_t g_choices[] = {2, 3, 5, 8};
  const std::size_t k_choices[] = {1, 2, 3, 6};
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::size_t g = g_choices[t % 4];
    const std::size_t k = k_choices[(t / 4) % 4];
    const auto group = random_group(g, k, rng);
    const ScoreTensor fast = score_tensor(group);
    const ScoreTensor naive = naive_scores(group);
    double worst = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
      for (std::size_t e = 0; e < g * g; ++e) {
        worst = std::max(worst,
                         std::abs(fast.scores[l][e] - naive.scores[l][e]));
      }
    }
    ++report.case_count;
    track_error(report, worst, 1.0, 1e-12,
                "scores trial " + std::to_string(t));
  }
  return report;
}

OracleReport pipeline_check(std::uint64_t trials, Rng& rng) {
  OracleReport report;
  report.name = "pipeline_check";
  const std::size_t g_choices[] = {2, 4, 8, 16};
  const std::size_t k_choices[] = {1, 2, 3, 6};
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::size_t g = g_choices[t % 4];
    const std::size_t k = k_choices[(t / 4) % 4];
    const auto group = random_group(g, k, rng);
    std::vector<double> weights(k);
    for (double& w : weights) w = 4.0 * rng.uniform01() - 2.0;

    AdvantageProfile fast =
        normalize_per_dimension(population_scores(score_tensor(group)));
    aggregate_advantage(fast, weights);
    const AdvantageProfile naive =
        naive_pipeline(group, weights, kAdvantageEpsilon);

    double worst = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t l = 0; l < k; ++l) {
        worst = std::max(worst,
                         std::abs(fast.per_dim[i][l] - naive.per_dim[i][l]));
      }
      worst = std::max(worst, std::abs(fast.aggregate[i] - naive.aggregate[i]));
    }
    ++report.case_count;
    track_error(report, worst, 1.0, 1e-12,
                "pipeline trial " + std::to_string(t));
  }
  return report;
}

OracleReport gradient_check(std::uint64_t trials, Rng& rng) {
  OracleReport report;
  report.name = "gradient_check";
  const std::size_t m = 12;
  const std::size_t g = 6;
  const double clip_epsilon = 0.2;
  for (std::uint64_t t = 0; t < trials; ++t) {
    // Random policy, reference, and sampling snapshot; resample until every
    // ratio sits away from the clip boundaries.
    SoftmaxPolicy policy, reference, old_policy;
    policy.temperature = reference.temperature = old_policy.temperature =
        0.5 + rng.uniform01();
    RolloutGroup group;
    std::vector<double> advantages(g);
    bool boundary;
    do {
      policy.logits.assign(m, 0.0);
      reference.logits.assign(m, 0.0);
      old_policy.logits.assign(m, 0.0);
      for (std::size_t b = 0; b < m; ++b) {
        policy.logits[b] = rng.normal();
        reference.logits[b] = policy.logits[b] + 0.3 * rng.normal();
        old_policy.logits[b] = policy.logits[b] + 0.2 * rng.normal();
      }
      const std::vector<double> probs = policy.probabilities();
      const std::vector<double> old_probs = old_policy.probabilities();
      group.indices.clear();
      group.old_probs.clear();
      group.ratios.clear();
      boundary = false;
      for (std::size_t i = 0; i < g; ++i) {
        const std::size_t idx = static_cast<std::size_t>(
            rng.uniform01() * static_cast<double>(m));
        group.indices.push_back(idx);
        group.old_probs.push_back(old_probs[idx]);
        const double r = probs[idx] / old_probs[idx];
        group.ratios.push_back(r);
        if (std::abs(r - (1.0 - clip_epsilon)) <= 1e-4 ||
            std::abs(r - (1.0 + clip_epsilon)) <= 1e-4) {
          boundary = true;
        }
        advantages[i] = rng.normal();
      }
    } while (boundary);
    const double beta = 0.2 * rng.uniform01();

    const std::vector<double> analytic = surrogate_gradient(
        policy, reference, group, advantages, clip_epsilon, beta);
    const double temperature = policy.temperature;
    auto loss = [&](const std::vector<double>& logits) {
      SoftmaxPolicy p{logits, temperature};
      const std::vector<double> probs = p.probabilities();
      SurrogateInputs inputs;
      inputs.ratios.resize(g);
      for (std::size_t i = 0; i < g; ++i) {
        inputs.ratios[i] = probs[group.indices[i]] / group.old_probs[i];
      }
      inputs.advantages = advantages;
      inputs.clip_epsilon = clip_epsilon;
      inputs.beta = beta;
      inputs.kl_value = policy_kl(p, reference);
      return clipped_surrogate(inputs);
    };
    const std::vector<double> numeric = fd_gradient(loss, policy.logits);

    double diff_sq = 0.0, norm_sq = 0.0;
    for (std::size_t b = 0; b < m; ++b) {
      diff_sq += (analytic[b] - numeric[b]) * (analytic[b] - numeric[b]);
      norm_sq += analytic[b] * analytic[b];
    }
    const double abs_error = std::sqrt(diff_sq);
    const double rel_error = abs_error / std::max(std::sqrt(norm_sq), 1e-300);
    report.max_abs_error = std::max(report.max_abs_error, abs_error);
    report.max_rel_error = std::max(report.max_rel_error, rel_error);
    ++report.case_count;
    if (rel_error > 1e-5) {
      report.failures.push_back("gradient trial " + std::to_string(t));
    }
  }
  return report;
}

}  // namespace gprl::oracle
