#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gprl/advantage.hpp"
#include "gprl/preference_core.hpp"
#include "gprl/rng.hpp"

namespace gprl::oracle {

// Outcome of one brute-force verification pass.
struct OracleReport {
  std::string name;
  std::uint64_t case_count = 0;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

// Literal double-loop recomputation of the pairwise score tensor, sharing no
// code with preference_core::score_tensor (each entry evaluated
// independently, including both triangle halves).
ScoreTensor naive_scores(const std::vector<PreferenceEmbedding>& group);

// Literal three-step recomputation of the advantage pipeline (population
// scores, per-dimension normalization, weighted aggregation) with
// compensated (Kahan) summation throughout.
AdvantageProfile naive_pipeline(const std::vector<PreferenceEmbedding>& group,
                                const std::vector<double>& weights,
                                double epsilon);

// Central finite differences of `loss` around `logits`, one coordinate at a
// time.  Throws std::runtime_error if the loss evaluates non-finite.
std::vector<double> fd_gradient(
    const std::function<double(const std::vector<double>&)>& loss,
    const std::vector<double>& logits, double step = 1e-6);

// Randomized search for counterexamples to the single-axis hacking
// proposition: draws (a_star, a_dagger, weights, l_star) satisfying the
// hypotheses and reports every instance where the sufficient condition holds
// but the aggregate ordering fails.
OracleReport prop2_search(std::uint64_t trials, std::size_t k, Rng& rng);

// Random unit embedding in R^{2k} (normalized normal deviates).
PreferenceEmbedding random_embedding(std::size_t k, Rng& rng);

// Check drivers shared by the `verify` subcommand and the acceptance suite.
// Each runs `trials` randomized cases against the fast path and records the
// worst errors.

// score_tensor vs naive_scores, entrywise tolerance 1e-12.
OracleReport scores_check(std::uint64_t trials, Rng& rng);

// Full advantage pipeline vs naive_pipeline (per-dim and aggregate),
// entrywise tolerance 1e-12; weights drawn in [-2, 2].
OracleReport pipeline_check(std::uint64_t trials, Rng& rng);

// surrogate_gradient vs central finite differences on random states away
// from clip boundaries; L2 relative tolerance 1e-5.
OracleReport gradient_check(std::uint64_t trials, Rng& rng);

}  // namespace gprl::oracle
