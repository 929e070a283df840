#ifndef DERMBENCH_GRPO_HPP
#define DERMBENCH_GRPO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dermbench/matrix.hpp"
#include "dermbench/rewards.hpp"

namespace dermbench::grpo {

// Bookkeeping for one query's sampled group: G ranked-list outputs with
// per-token log-probabilities under the sampling policy and the reference.
struct RolloutGroup {
    std::string query_id;
    std::vector<std::vector<int>> outputs;
    std::vector<std::vector<double>> old_logprobs;
    std::vector<std::vector<double>> ref_logprobs;
    std::vector<double> rewards;

    void validate() const; // G >= 2, shapes consistent, rewards finite
};

struct GRPOConfig {
    double clip_eps = 0.2;
    double kl_beta = 0.01;
    std::size_t group_size = 8;
    double advantage_eps = 1e-8;
};

// Reward z-scores with population std; groups with std below the guard get
// all-zero advantages instead of exploding.
std::vector<double> group_advantages(const std::vector<double>& rewards, double guard);

// phi = exp(new - old), element-wise over matching shapes.
std::vector<std::vector<double>> importance_ratios(
    const std::vector<std::vector<double>>& new_logprobs,
    const std::vector<std::vector<double>>& old_logprobs);

// (1/G) sum_i (1/|o_i|) sum_t [ min(phi*A_i, clip(phi,1-eps,1+eps)*A_i)
//                               - beta * kl_{i,t} ]
double grpo_objective(const RolloutGroup& group,
                      const std::vector<std::vector<double>>& new_logprobs,
                      const std::vector<std::vector<double>>& kl_per_token,
                      const GRPOConfig& cfg);

// Exact KL(softmax(p_logits) || softmax(q_logits)).
double categorical_kl(const std::vector<double>& p_logits,
                      const std::vector<double>& q_logits);

// Desk-scale stand-in for the diagnosis task: a fixed pool of feature
// vectors whose true label is the argmax of a hidden linear scoring map.
// The policy must learn to rank that label early in its top-K list.
struct ToyDiagnosisEnv {
    std::size_t feature_dim = 8;
    std::size_t label_count = 10;
    RealMatrix scoring; // label_count x feature_dim, hidden from the policy
    rewards::PositionWeights position_weights;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> queries;
    std::vector<std::size_t> true_labels;
    bool zero_reward = false; // degenerate-reward mode for tests
};

ToyDiagnosisEnv make_toy_env(std::size_t feature_dim, std::size_t label_count,
                             std::size_t pool_size, rewards::PositionWeights weights,
                             std::uint64_t seed);

struct TrainOptions {
    double lr = 0.05;
    std::size_t queries_per_step = 16;
    std::size_t inner_epochs = 2;
    std::uint64_t seed = 0;
};

struct LearningRecord {
    std::size_t step = 0;
    double mean_reward = 0.0;
    double mean_kl = 0.0; // mean per-token KL to the reference policy
    double objective = 0.0;
};

struct PolicyTrainResult {
    std::vector<LearningRecord> records;
    RealMatrix policy;      // label_count x feature_dim
    RealMatrix init_policy; // the reference
    double final_kl_to_init = 0.0; // mean full-categorical KL over the pool
};

// Softmax policy over labels; ranked top-K lists sampled without replacement
// by iterative renormalization (list log-prob = sum of conditional token
// log-probs); clipped surrogate + KL penalty, reference = initial policy.
PolicyTrainResult train_toy_policy(const ToyDiagnosisEnv& env, const GRPOConfig& cfg,
                                   std::size_t steps, const TrainOptions& opts = {});

} // namespace dermbench::grpo

#endif
