#pragma once

#include <cstddef>
#include <vector>

namespace gprl {

// Unit-norm embedding in R^{2k}.  Subspace l (1-based in the documentation)
// occupies components [2l-2, 2l-1]: component 2l-2 is v^(2l-1) and component
// 2l-1 is v^(2l).
//
// Constructors renormalize inputs whose L2 norm deviates from 1 by less than
// 1e-6 (parse round-off) and reject larger deviations.
class PreferenceEmbedding {
 public:
  // Throws std::invalid_argument if components.size() is zero or odd, if any
  // entry is non-finite, or if the norm deviates from 1 by 1e-6 or more.
  explicit PreferenceEmbedding(std::vector<double> components);

  std::size_t k() const { return components_.size() / 2; }
  const std::vector<double>& components() const { return components_; }
  double operator[](std::size_t i) const { return components_[i]; }

 private:
  std::vector<double> components_;
};

// Nonnegative per-subspace aggregation weights (the GPM eigenvalues).
class SubspaceWeights {
 public:
  // Throws std::invalid_argument on empty input, negative or non-finite
  // entries.
  explicit SubspaceWeights(std::vector<double> lambdas);

  std::size_t k() const { return lambdas_.size(); }
  const std::vector<double>& lambdas() const { return lambdas_; }
  double operator[](std::size_t l) const { return lambdas_[l]; }

 private:
  std::vector<double> lambdas_;
};

// k antisymmetric G x G matrices of subspace scores; scores[l][i*g+j] holds
// s_l(y_i, y_j).
struct ScoreTensor {
  std::vector<std::vector<double>> scores;  // k matrices, row-major G x G
  std::size_t g = 0;
  std::size_t k = 0;

  double at(std::size_t l, std::size_t i, std::size_t j) const {
    return scores[l][i * g + j];
  }
};

// s_l(y_i, y_j) = v_i^(2l) v_j^(2l-1) - v_i^(2l-1) v_j^(2l).
// `l` is 0-based here.  Throws std::invalid_argument on k mismatch or l out
// of range.
double subspace_score(const PreferenceEmbedding& v_i,
                      const PreferenceEmbedding& v_j, std::size_t l);

// All pairwise subspace scores of a group.  Throws std::invalid_argument if
// the group has fewer than two members or mixes k.
ScoreTensor score_tensor(const std::vector<PreferenceEmbedding>& group);

// sum_l lambda_l * s_l(y_i, y_j).  Throws std::invalid_argument on any
// dimension mismatch.
double aggregate_score(const PreferenceEmbedding& v_i,
                       const PreferenceEmbedding& v_j,
                       const SubspaceWeights& w);

// Logistic link: P(y_i beats y_j) = sigma(score).
double preference_probability(double score);

// Bradley-Terry score c*(r_i - r_j); equals the subspace score of the
// unnormalized embeddings (r_i, c) and (r_j, c).  Lives outside the
// PreferenceEmbedding type because it deliberately relaxes the unit-norm
// invariant.  Throws std::invalid_argument when c == 0.
double bt_score(double r_i, double r_j, double c);

// Synthetic closed-form embedder: block l is (cos(angle_scale*q_l),
// sin(angle_scale*q_l)) / sqrt(k), giving an exactly unit-norm vector and an
// induced subspace score of (1/k) sin(theta_i - theta_j).  Throws
// std::invalid_argument on empty/non-finite q or nonpositive angle_scale.
PreferenceEmbedding phase_embed(const std::vector<double>& q,
                                double angle_scale);

}  // namespace gprl
