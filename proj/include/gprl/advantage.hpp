#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "gprl/preference_core.hpp"

namespace gprl {

// Default denominator guard for group-relative normalization.
inline constexpr double kAdvantageEpsilon = 1e-8;

// Per-dimension population scores: s_hat[i][l] is the mean subspace score of
// response i against the rest of its group on dimension l.
struct PopulationScores {
  std::vector<std::vector<double>> s_hat;  // G rows, k columns
  std::size_t g = 0;
  std::size_t k = 0;
};

// Per-dimension and aggregate group-relative advantages for one group.
struct AdvantageProfile {
  std::vector<std::vector<double>> per_dim;  // G rows, k columns
  std::vector<double> aggregate;             // G entries (empty until filled)
  std::vector<double> mu;                    // k per-dimension means
  std::vector<double> sigma;                 // k per-dimension population stds
  double epsilon = kAdvantageEpsilon;
  std::size_t g = 0;
  std::size_t k = 0;
};

// Inputs to the clipped surrogate loss.
struct SurrogateInputs {
  std::vector<double> ratios;      // importance ratios r_i, strictly positive
  std::vector<double> advantages;  // aggregate advantages
  double clip_epsilon = 0.2;
  double beta = 0.0;
  double kl_value = 0.0;
};

struct HackingVerdict {
  bool condition_holds = false;
  double aggregate_star = 0.0;
  double aggregate_dagger = 0.0;
};

// s_hat[i][l] = (1/(G-1)) * sum_{j != i} scores[l][i][j].
// Throws std::invalid_argument when G < 2.
PopulationScores population_scores(const ScoreTensor& tensor);

// Per-dimension group-relative normalization: each column is centered by its
// mean and divided by (population std + epsilon); a column whose population
// std is exactly zero is set to all zeros.  Fills per_dim/mu/sigma; aggregate
// left empty.  Throws std::invalid_argument when epsilon <= 0.
AdvantageProfile normalize_per_dimension(const PopulationScores& p,
                                         double epsilon = kAdvantageEpsilon);

// Ablation variant: pooled (mu, sigma) across all k dimensions instead of
// per-column statistics; the zero-sigma convention applies to the whole
// matrix at once.
AdvantageProfile normalize_global(const PopulationScores& p,
                                  double epsilon = kAdvantageEpsilon);

// Fills profile.aggregate[i] = sum_l w[l] * per_dim[i][l].  Weights may be
// any finite reals (negative allowed).  Throws std::invalid_argument on
// length mismatch.
void aggregate_advantage(AdvantageProfile& profile,
                         const std::vector<double>& w);

// Scalar group-relative advantage: (R_i - mean) / (population std + epsilon).
// No zero-std convention here; epsilon alone guards the denominator.  Throws
// std::invalid_argument when G < 2 or epsilon <= 0.
std::vector<double> grpo_advantage(const std::vector<double>& rewards,
                                   double epsilon = kAdvantageEpsilon);

// Clipped surrogate loss:
//   -[(1/G) sum_i min(r_i A_i, clip(r_i, 1-eps, 1+eps) A_i) - beta * KL].
// Throws std::invalid_argument on size mismatch or nonpositive ratio.
double clipped_surrogate(const SurrogateInputs& inputs);

// Evaluates the single-axis hacking condition: given per-axis advantage
// summaries a_star (honest policy) and a_dagger (exploiter that improves only
// axis l_star and degrades every other axis), condition_holds iff
//   sum_{l != l_star} w_l (a_star_l - a_dagger_l) > w_lstar (a_dagger_lstar - a_star_lstar),
// in which case the exploiter's aggregate is strictly smaller (asserted
// internally).  Throws std::invalid_argument on shape errors and
// PreconditionError naming the offending axis when the hypotheses fail.
HackingVerdict hacking_verdict(const std::vector<double>& a_star,
                               const std::vector<double>& a_dagger,
                               const SubspaceWeights& w, std::size_t l_star);

// Thrown when a proposition's hypotheses are violated; carries the first
// offending axis (0-based).
class PreconditionError : public std::invalid_argument {
 public:
  PreconditionError(const std::string& what, std::size_t axis)
      : std::invalid_argument(what), axis_(axis) {}
  std::size_t axis() const { return axis_; }

 private:
  std::size_t axis_;
};

}  // namespace gprl
