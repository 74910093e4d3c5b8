#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sqleval {

// Clipping parameters for the two objectives. The clipped-ratio upper
// bound is upper_base + eps_high (default 2, matching the constraint this
// implements; set upper_base = 1 for the conventional symmetric window).
struct ClipConfig {
    double epsilon = 0.2;   // clipped surrogate
    double eps_low = 0.2;   // weight clip, lower
    double eps_high = 0.2;  // weight clip, upper
    double upper_base = 2.0;

    double weight_lower() const { return 1.0 - eps_low; }
    double weight_upper() const { return upper_base + eps_high; }
};

// Per-group rollout statistics: one reward per rollout plus per-token
// importance ratios and log-probabilities. Token counts are the inner
// vector sizes.
struct GroupStats {
    std::vector<double> rewards;
    std::vector<std::vector<double>> ratios;
    std::vector<std::vector<double>> logprobs;

    std::size_t group_size() const { return rewards.size(); }
    std::size_t total_tokens() const;
    // Throws GroupTooSmall / Error when sizes are inconsistent, any ratio
    // is non-positive, or the group has fewer than two rollouts.
    void validate() const;
};

// Group-standardized advantages: (r - mean) / population std. A zero
// variance group maps to the all-zero vector. Throws GroupTooSmall for
// fewer than two rewards.
std::vector<double> advantages(std::span<const double> rewards);

// min(ratio * advantage, clip(ratio, 1-eps, 1+eps) * advantage)
double grpo_term(double ratio, double advantage, double epsilon);

// Mean over rollouts of the per-rollout token mean of grpo_term, with
// advantages standardized from the group rewards.
double grpo_objective(const GroupStats& stats, const ClipConfig& config);

// Element-wise clip of importance ratios to [1-eps_low, upper_base+eps_high].
// The outputs are treated as constants by any differentiation of the
// objective (stop-gradient).
std::vector<double> cispo_weights(std::span<const double> ratios, const ClipConfig& config);

// (1 / total tokens) * sum_i sum_t sg(clipped ratio) * A_i * logprob_{i,t}
double cispo_objective(const GroupStats& stats, const ClipConfig& config);

// ---------------------------------------------------------------------------
// Toy differentiable policy, the verification oracle for the stop-gradient
// contract: a single softmax distribution over K symbols with analytic
// log-probability gradients.

class SoftmaxPolicy {
  public:
    explicit SoftmaxPolicy(std::vector<double> logits);

    std::size_t vocab() const { return logits_.size(); }
    const std::vector<double>& logits() const { return logits_; }

    std::vector<double> probs() const;
    double logprob(int symbol) const;
    // d logprob(symbol) / d logit_j = [j == symbol] - prob_j
    std::vector<double> logprob_grad(int symbol) const;

  private:
    std::vector<double> logits_;
};

// A batch of symbol rollouts for differentiating the objective end to end.
struct ToyRollouts {
    std::vector<std::vector<int>> symbols;  // token sequences
    std::vector<double> rewards;            // one per rollout
};

// GroupStats induced by a (policy, old policy) pair on toy rollouts:
// ratios are pi/pi_old per token, logprobs are log pi per token.
GroupStats toy_group_stats(const ToyRollouts& rollouts, const SoftmaxPolicy& policy,
                           const SoftmaxPolicy& old_policy);

// Analytic objective gradient with respect to the policy logits under the
// stop-gradient contract: weights are clipped ratios held constant.
std::vector<double> cispo_objective_gradient(const ToyRollouts& rollouts,
                                             const SoftmaxPolicy& policy,
                                             const SoftmaxPolicy& old_policy,
                                             const ClipConfig& config);

}  // namespace sqleval
