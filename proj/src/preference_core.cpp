#include "gprl/preference_core.hpp"

#include <cmath>
#include <stdexcept>

namespace gprl {

namespace {

double l2_norm(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

}  // namespace

PreferenceEmbedding::PreferenceEmbedding(std::vector<double> components)
    : components_(std::move(components)) {
  if (components_.empty() || components_.size() % 2 != 0) {
    throw std::invalid_argument(
        "PreferenceEmbedding: component count must be 2k for positive k");
  }
  for (double x : components_) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(
          "PreferenceEmbedding: non-finite component");
    }
  }
  const double norm = l2_norm(components_);
  const double deviation = std::abs(norm - 1.0);
  if (deviation >= 1e-6) {
    throw std::invalid_argument(
        "PreferenceEmbedding: norm deviates from 1 by 1e-6 or more");
  }
  if (deviation > 0.0) {
    for (double& x : components_) x /= norm;
  }
}

SubspaceWeights::SubspaceWeights(std::vector<double> lambdas)
    : lambdas_(std::move(lambdas)) {
  if (lambdas_.empty()) {
    throw std::invalid_argument("SubspaceWeights: empty weight vector");
  }
  for (double x : lambdas_) {
    if (!std::isfinite(x) || x < 0.0) {
      throw std::invalid_argument(
          "SubspaceWeights: weights must be finite and nonnegative");
    }
  }
}

double subspace_score(const PreferenceEmbedding& v_i,
                      const PreferenceEmbedding& v_j, std::size_t l) {
  if (v_i.k() != v_j.k()) {
    throw std::invalid_argument("subspace_score: embedding k mismatch");
  }
  if (l >= v_i.k()) {
    throw std::invalid_argument("subspace_score: subspace index out of range");
  }
  // Component 2l is v^(2l-1), component 2l+1 is v^(2l) (0-based storage).
  return v_i[2 * l + 1] * v_j[2 * l] - v_i[2 * l] * v_j[2 * l + 1];
}

ScoreTensor score_tensor(const std::vector<PreferenceEmbedding>& group) {
  if (group.size() < 2) {
    throw std::invalid_argument("score_tensor: group size must be >= 2");
  }
  const std::size_t g = group.size();
  const std::size_t k = group[0].k();
  for (const auto& v : group) {
    if (v.k() != k) {
      throw std::invalid_argument("score_tensor: mixed k in group");
    }
  }
  ScoreTensor tensor;
  tensor.g = g;
  tensor.k = k;
  tensor.scores.assign(k, std::vector<double>(g * g, 0.0));
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t j = i + 1; j < g; ++j) {
        const double s = subspace_score(group[i], group[j], l);
        tensor.scores[l][i * g + j] = s;
        tensor.scores[l][j * g + i] = -s;
      }
    }
  }
  return tensor;
}

double aggregate_score(const PreferenceEmbedding& v_i,
                       const PreferenceEmbedding& v_j,
                       const SubspaceWeights& w) {
  if (w.k() != v_i.k()) {
    throw std::invalid_argument("aggregate_score: weight length mismatch");
  }
  double total = 0.0;
  for (std::size_t l = 0; l < w.k(); ++l) {
    total += w[l] * subspace_score(v_i, v_j, l);
  }
  return total;
}

double preference_probability(double score) {
  return 1.0 / (1.0 + std::exp(-score));
}

double bt_score(double r_i, double r_j, double c) {
  if (c == 0.0) {
    throw std::invalid_argument("bt_score: c must be nonzero");
  }
  return c * (r_i - r_j);
}

PreferenceEmbedding phase_embed(const std::vector<double>& q,
                                double angle_scale) {
  if (q.empty()) {
    throw std::invalid_argument("phase_embed: empty quality vector");
  }
  if (!(angle_scale > 0.0) || !std::isfinite(angle_scale)) {
    throw std::invalid_argument("phase_embed: angle_scale must be positive");
  }
  for (double x : q) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("phase_embed: non-finite quality");
    }
  }
  const std::size_t k = q.size();
  const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(k));
  std::vector<double> components(2 * k);
  for (std::size_t l = 0; l < k; ++l) {
    const double theta = angle_scale * q[l];
    components[2 * l] = std::cos(theta) * inv_sqrt_k;
    components[2 * l + 1] = std::sin(theta) * inv_sqrt_k;
  }
  return PreferenceEmbedding(std::move(components));
}

}  // namespace gprl
