#include "sqleval/rlvr.hpp"

#include <algorithm>
#include <cmath>

#include "sqleval/errors.hpp"

namespace sqleval {

std::size_t GroupStats::total_tokens() const {
    std::size_t total = 0;
    for (const auto& rollout : ratios) total += rollout.size();
    return total;
}

void GroupStats::validate() const {
    if (rewards.size() < 2) {
        throw GroupTooSmall("group of " + std::to_string(rewards.size()) +
                            " rollouts; need at least 2 for advantage normalization");
    }
    if (ratios.size() != rewards.size() || logprobs.size() != rewards.size()) {
        throw Error("GroupStats: rewards/ratios/logprobs length mismatch");
    }
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (ratios[i].size() != logprobs[i].size()) {
            throw Error("GroupStats: rollout " + std::to_string(i) +
                        " has mismatched ratio/logprob lengths");
        }
        for (double r : ratios[i]) {
            if (!(r > 0.0)) throw Error("GroupStats: importance ratios must be positive");
        }
    }
}

std::vector<double> advantages(std::span<const double> rewards) {
    if (rewards.size() < 2) {
        throw GroupTooSmall("advantage normalization needs at least 2 rewards, got " +
                            std::to_string(rewards.size()));
    }
    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;

    double variance = 0.0;
    for (double r : rewards) variance += (r - mean) * (r - mean);
    variance /= n;  // population variance, no Bessel correction

    std::vector<double> out(rewards.size(), 0.0);
    if (variance == 0.0) return out;  // signal-free group

    const double std_dev = std::sqrt(variance);
    for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / std_dev;
    return out;
}

double grpo_term(double ratio, double advantage, double epsilon) {
    const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
    return std::min(ratio * advantage, clipped * advantage);
}

double grpo_objective(const GroupStats& stats, const ClipConfig& config) {
    stats.validate();
    const std::vector<double> adv = advantages(stats.rewards);

    double rollout_sum = 0.0;
    for (std::size_t i = 0; i < stats.rewards.size(); ++i) {
        const auto& ratios = stats.ratios[i];
        if (ratios.empty()) continue;
        double token_sum = 0.0;
        for (double r : ratios) token_sum += grpo_term(r, adv[i], config.epsilon);
        rollout_sum += token_sum / static_cast<double>(ratios.size());
    }
    return rollout_sum / static_cast<double>(stats.rewards.size());
}

std::vector<double> cispo_weights(std::span<const double> ratios, const ClipConfig& config) {
    std::vector<double> out;
    out.reserve(ratios.size());
    const double lo = config.weight_lower();
    const double hi = config.weight_upper();
    for (double r : ratios) out.push_back(std::clamp(r, lo, hi));
    return out;
}

double cispo_objective(const GroupStats& stats, const ClipConfig& config) {
    stats.validate();
    const std::vector<double> adv = advantages(stats.rewards);
    const std::size_t total = stats.total_tokens();
    if (total == 0) return 0.0;

    double sum = 0.0;
    for (std::size_t i = 0; i < stats.rewards.size(); ++i) {
        const std::vector<double> weights = cispo_weights(stats.ratios[i], config);
        for (std::size_t t = 0; t < weights.size(); ++t) {
            sum += weights[t] * adv[i] * stats.logprobs[i][t];
        }
    }
    return sum / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Toy policy

SoftmaxPolicy::SoftmaxPolicy(std::vector<double> logits) : logits_(std::move(logits)) {
    if (logits_.size() < 2) throw Error("SoftmaxPolicy needs a vocabulary of at least 2");
}

std::vector<double> SoftmaxPolicy::probs() const {
    const double max_logit = *std::max_element(logits_.begin(), logits_.end());
    std::vector<double> out(logits_.size());
    double z = 0.0;
    for (std::size_t k = 0; k < logits_.size(); ++k) {
        out[k] = std::exp(logits_[k] - max_logit);
        z += out[k];
    }
    for (double& p : out) p /= z;
    return out;
}

double SoftmaxPolicy::logprob(int symbol) const {
    const double max_logit = *std::max_element(logits_.begin(), logits_.end());
    double z = 0.0;
    for (double l : logits_) z += std::exp(l - max_logit);
    return logits_[static_cast<std::size_t>(symbol)] - max_logit - std::log(z);
}

std::vector<double> SoftmaxPolicy::logprob_grad(int symbol) const {
    std::vector<double> grad = probs();
    for (double& g : grad) g = -g;
    grad[static_cast<std::size_t>(symbol)] += 1.0;
    return grad;
}

GroupStats toy_group_stats(const ToyRollouts& rollouts, const SoftmaxPolicy& policy,
                           const SoftmaxPolicy& old_policy) {
    GroupStats stats;
    stats.rewards = rollouts.rewards;
    stats.ratios.resize(rollouts.symbols.size());
    stats.logprobs.resize(rollouts.symbols.size());
    for (std::size_t i = 0; i < rollouts.symbols.size(); ++i) {
        for (int symbol : rollouts.symbols[i]) {
            const double lp = policy.logprob(symbol);
            const double lp_old = old_policy.logprob(symbol);
            stats.ratios[i].push_back(std::exp(lp - lp_old));
            stats.logprobs[i].push_back(lp);
        }
    }
    return stats;
}

std::vector<double> cispo_objective_gradient(const ToyRollouts& rollouts,
                                             const SoftmaxPolicy& policy,
                                             const SoftmaxPolicy& old_policy,
                                             const ClipConfig& config) {
    const GroupStats stats = toy_group_stats(rollouts, policy, old_policy);
    stats.validate();
    const std::vector<double> adv = advantages(stats.rewards);
    const std::size_t total = stats.total_tokens();

    std::vector<double> grad(policy.vocab(), 0.0);
    if (total == 0) return grad;

    for (std::size_t i = 0; i < rollouts.symbols.size(); ++i) {
        const std::vector<double> weights = cispo_weights(stats.ratios[i], config);
        for (std::size_t t = 0; t < rollouts.symbols[i].size(); ++t) {
            // sg(weight): the clipped ratio is a constant; only the logprob
            // term contributes to the gradient.
            const std::vector<double> lp_grad = policy.logprob_grad(rollouts.symbols[i][t]);
            const double scale = weights[t] * adv[i];
            for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += scale * lp_grad[j];
        }
    }
    for (double& g : grad) g /= static_cast<double>(total);
    return grad;
}

}  // namespace sqleval
