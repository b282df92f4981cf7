#include "gprl/advantage.hpp"

#include <cmath>

namespace gprl {

namespace {

// Group-relative normalization of one value sequence.  Shared verbatim by
// grpo_advantage and the per-dimension path so that the k=1 pipeline is
// bitwise identical to GRPO on the induced scalar reward.
struct ColumnStats {
  double mu = 0.0;
  double sigma = 0.0;  // population std
};

ColumnStats column_stats(const std::vector<double>& values) {
  const double g = static_cast<double>(values.size());
  double sum = 0.0;
  for (double x : values) sum += x;
  const double mu = sum / g;
  double sq = 0.0;
  for (double x : values) {
    const double d = x - mu;
    sq += d * d;
  }
  return {mu, std::sqrt(sq / g)};
}

}  // namespace

PopulationScores population_scores(const ScoreTensor& tensor) {
  if (tensor.g < 2) {
    throw std::invalid_argument("population_scores: group size must be >= 2");
  }
  PopulationScores out;
  out.g = tensor.g;
  out.k = tensor.k;
  out.s_hat.assign(tensor.g, std::vector<double>(tensor.k, 0.0));
  const double denom = static_cast<double>(tensor.g - 1);
  for (std::size_t i = 0; i < tensor.g; ++i) {
    for (std::size_t l = 0; l < tensor.k; ++l) {
      double sum = 0.0;
      for (std::size_t j = 0; j < tensor.g; ++j) {
        sum += tensor.at(l, i, j);  // diagonal is exactly 0
      }
      out.s_hat[i][l] = sum / denom;
    }
  }
  return out;
}

AdvantageProfile normalize_per_dimension(const PopulationScores& p,
                                         double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument(
        "normalize_per_dimension: epsilon must be positive");
  }
  AdvantageProfile out;
  out.g = p.g;
  out.k = p.k;
  out.epsilon = epsilon;
  out.per_dim.assign(p.g, std::vector<double>(p.k, 0.0));
  out.mu.assign(p.k, 0.0);
  out.sigma.assign(p.k, 0.0);
  std::vector<double> column(p.g);
  for (std::size_t l = 0; l < p.k; ++l) {
    for (std::size_t i = 0; i < p.g; ++i) column[i] = p.s_hat[i][l];
    const ColumnStats st = column_stats(column);
    out.mu[l] = st.mu;
    out.sigma[l] = st.sigma;
    if (st.sigma == 0.0) continue;  // zero-sigma convention: column stays 0
    for (std::size_t i = 0; i < p.g; ++i) {
      out.per_dim[i][l] = (column[i] - st.mu) / (st.sigma + epsilon);
    }
  }
  return out;
}

AdvantageProfile normalize_global(const PopulationScores& p, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("normalize_global: epsilon must be positive");
  }
  AdvantageProfile out;
  out.g = p.g;
  out.k = p.k;
  out.epsilon = epsilon;
  out.per_dim.assign(p.g, std::vector<double>(p.k, 0.0));
  std::vector<double> pooled;
  pooled.reserve(p.g * p.k);
  for (std::size_t i = 0; i < p.g; ++i) {
    for (std::size_t l = 0; l < p.k; ++l) pooled.push_back(p.s_hat[i][l]);
  }
  const ColumnStats st = column_stats(pooled);
  out.mu.assign(p.k, st.mu);
  out.sigma.assign(p.k, st.sigma);
  if (st.sigma == 0.0) return out;
  for (std::size_t i = 0; i < p.g; ++i) {
    for (std::size_t l = 0; l < p.k; ++l) {
      out.per_dim[i][l] = (p.s_hat[i][l] - st.mu) / (st.sigma + epsilon);
    }
  }
  return out;
}

void aggregate_advantage(AdvantageProfile& profile,
                         const std::vector<double>& w) {
  if (w.size() != profile.k) {
    throw std::invalid_argument("aggregate_advantage: weight length mismatch");
  }
  for (double x : w) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("aggregate_advantage: non-finite weight");
    }
  }
  profile.aggregate.assign(profile.g, 0.0);
  for (std::size_t i = 0; i < profile.g; ++i) {
    double sum = 0.0;
    for (std::size_t l = 0; l < profile.k; ++l) {
      sum += w[l] * profile.per_dim[i][l];
    }
    profile.aggregate[i] = sum;
  }
}

std::vector<double> grpo_advantage(const std::vector<double>& rewards,
                                   double epsilon) {
  if (rewards.size() < 2) {
    throw std::invalid_argument("grpo_advantage: group size must be >= 2");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("grpo_advantage: epsilon must be positive");
  }
  const ColumnStats st = column_stats(rewards);
  std::vector<double> out(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out[i] = (rewards[i] - st.mu) / (st.sigma + epsilon);
  }
  return out;
}

double clipped_surrogate(const SurrogateInputs& inputs) {
  const std::size_t g = inputs.ratios.size();
  if (g == 0 || inputs.advantages.size() != g) {
    throw std::invalid_argument("clipped_surrogate: size mismatch");
  }
  if (!(inputs.clip_epsilon > 0.0) || !(inputs.clip_epsilon < 1.0)) {
    throw std::invalid_argument(
        "clipped_surrogate: clip_epsilon must lie in (0,1)");
  }
  const double lo = 1.0 - inputs.clip_epsilon;
  const double hi = 1.0 + inputs.clip_epsilon;
  double sum = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    const double r = inputs.ratios[i];
    if (!(r > 0.0)) {
      throw std::invalid_argument("clipped_surrogate: nonpositive ratio");
    }
    const double a = inputs.advantages[i];
    const double clipped = std::min(std::max(r, lo), hi);
    sum += std::min(r * a, clipped * a);
  }
  return -(sum / static_cast<double>(g) - inputs.beta * inputs.kl_value);
}

HackingVerdict hacking_verdict(const std::vector<double>& a_star,
                               const std::vector<double>& a_dagger,
                               const SubspaceWeights& w, std::size_t l_star) {
  const std::size_t k = w.k();
  if (a_star.size() != k || a_dagger.size() != k) {
    throw std::invalid_argument("hacking_verdict: vector length mismatch");
  }
  if (l_star >= k) {
    throw std::invalid_argument("hacking_verdict: l_star out of range");
  }
  for (std::size_t l = 0; l < k; ++l) {
    if (l == l_star) {
      if (!(a_dagger[l] > a_star[l])) {
        throw PreconditionError(
            "hacking_verdict: exploited axis must strictly improve", l);
      }
    } else if (!(a_dagger[l] < a_star[l])) {
      throw PreconditionError(
          "hacking_verdict: non-exploited axis must strictly degrade", l);
    }
  }
  double lhs = 0.0;  // weighted degradation on the other axes
  for (std::size_t l = 0; l < k; ++l) {
    if (l != l_star) lhs += w[l] * (a_star[l] - a_dagger[l]);
  }
  const double rhs = w[l_star] * (a_dagger[l_star] - a_star[l_star]);

  HackingVerdict verdict;
  verdict.condition_holds = lhs > rhs;
  for (std::size_t l = 0; l < k; ++l) {
    verdict.aggregate_star += w[l] * a_star[l];
    verdict.aggregate_dagger += w[l] * a_dagger[l];
  }
  if (verdict.condition_holds &&
      !(verdict.aggregate_dagger < verdict.aggregate_star)) {
    throw std::logic_error(
        "hacking_verdict: condition held but aggregate ordering failed");
  }
  return verdict;
}

}  // namespace gprl
