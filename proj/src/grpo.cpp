#include "dermbench/grpo.hpp"

#include <algorithm>
#include <cmath>

#include "dermbench/rng.hpp"

namespace dermbench::grpo {

void RolloutGroup::validate() const {
    if (outputs.size() < 2)
        fail(ErrorCode::invalid_argument, "RolloutGroup: needs G >= 2 outputs");
    if (old_logprobs.size() != outputs.size() || ref_logprobs.size() != outputs.size() ||
        rewards.size() != outputs.size())
        fail(ErrorCode::dimension_mismatch, "RolloutGroup: per-output array count mismatch");
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        if (old_logprobs[i].size() != outputs[i].size() ||
            ref_logprobs[i].size() != outputs[i].size())
            fail(ErrorCode::dimension_mismatch, "RolloutGroup: logprob/token length mismatch");
        if (outputs[i].empty())
            fail(ErrorCode::invalid_argument, "RolloutGroup: empty output sequence");
    }
    for (double r : rewards)
        if (!std::isfinite(r)) fail(ErrorCode::validation, "RolloutGroup: non-finite reward");
}

std::vector<double> group_advantages(const std::vector<double>& rewards, double guard) {
    if (rewards.size() < 2)
        fail(ErrorCode::invalid_argument, "group_advantages: need at least 2 rewards");
    if (!(guard > 0.0))
        fail(ErrorCode::invalid_argument, "group_advantages: guard must be > 0");
    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    const double sd = std::sqrt(var / n); // population std
    std::vector<double> adv(rewards.size(), 0.0);
    if (sd < guard) return adv;
    for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / sd;
    return adv;
}

std::vector<std::vector<double>> importance_ratios(
    const std::vector<std::vector<double>>& new_logprobs,
    const std::vector<std::vector<double>>& old_logprobs) {
    if (new_logprobs.size() != old_logprobs.size())
        fail(ErrorCode::dimension_mismatch, "importance_ratios: output count mismatch");
    std::vector<std::vector<double>> phi(new_logprobs.size());
    for (std::size_t i = 0; i < new_logprobs.size(); ++i) {
        if (new_logprobs[i].size() != old_logprobs[i].size())
            fail(ErrorCode::dimension_mismatch, "importance_ratios: token count mismatch");
        phi[i].resize(new_logprobs[i].size());
        for (std::size_t t = 0; t < new_logprobs[i].size(); ++t)
            phi[i][t] = std::exp(new_logprobs[i][t] - old_logprobs[i][t]);
    }
    return phi;
}

double grpo_objective(const RolloutGroup& group,
                      const std::vector<std::vector<double>>& new_logprobs,
                      const std::vector<std::vector<double>>& kl_per_token,
                      const GRPOConfig& cfg) {
    group.validate();
    if (new_logprobs.size() != group.outputs.size() ||
        kl_per_token.size() != group.outputs.size())
        fail(ErrorCode::dimension_mismatch, "grpo_objective: per-output array count mismatch");
    const auto phi = importance_ratios(new_logprobs, group.old_logprobs);
    const auto adv = group_advantages(group.rewards, cfg.advantage_eps);

    const double g = static_cast<double>(group.outputs.size());
    double total = 0.0;
    for (std::size_t i = 0; i < group.outputs.size(); ++i) {
        if (kl_per_token[i].size() != group.outputs[i].size())
            fail(ErrorCode::dimension_mismatch, "grpo_objective: kl token count mismatch");
        const double len = static_cast<double>(group.outputs[i].size());
        double seq = 0.0;
        for (std::size_t t = 0; t < group.outputs[i].size(); ++t) {
            const double p = phi[i][t];
            const double clipped = std::clamp(p, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
            seq += std::min(p * adv[i], clipped * adv[i]) - cfg.kl_beta * kl_per_token[i][t];
        }
        total += seq / len;
    }
    return total / g;
}

namespace {

void log_softmax_into(const std::vector<double>& logits, std::vector<double>& out) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double v : logits) z += std::exp(v - m);
    const double logz = std::log(z) + m;
    out.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - logz;
}

} // namespace

double categorical_kl(const std::vector<double>& p_logits, const std::vector<double>& q_logits) {
    if (p_logits.size() != q_logits.size() || p_logits.size() < 2)
        fail(ErrorCode::dimension_mismatch,
             "categorical_kl: logit vectors must match with length >= 2");
    for (double v : p_logits)
        if (!std::isfinite(v)) fail(ErrorCode::invalid_argument, "categorical_kl: non-finite p logit");
    for (double v : q_logits)
        if (!std::isfinite(v)) fail(ErrorCode::invalid_argument, "categorical_kl: non-finite q logit");
    std::vector<double> lp, lq;
    log_softmax_into(p_logits, lp);
    log_softmax_into(q_logits, lq);
    double kl = 0.0;
    for (std::size_t i = 0; i < lp.size(); ++i) kl += std::exp(lp[i]) * (lp[i] - lq[i]);
    return kl;
}

ToyDiagnosisEnv make_toy_env(std::size_t feature_dim, std::size_t label_count,
                             std::size_t pool_size, rewards::PositionWeights weights,
                             std::uint64_t seed) {
    if (feature_dim < 1 || label_count < 2 || pool_size < 1)
        fail(ErrorCode::invalid_argument, "make_toy_env: bad dimensions");
    if (label_count < weights.w.size())
        fail(ErrorCode::invalid_argument, "make_toy_env: label space smaller than top-K length");
    ToyDiagnosisEnv env;
    env.feature_dim = feature_dim;
    env.label_count = label_count;
    env.position_weights = std::move(weights);
    env.seed = seed;
    Rng rng(seed);
    env.scoring = RealMatrix(label_count, feature_dim);
    for (double& v : env.scoring.data()) v = rng.gaussian();
    env.queries.reserve(pool_size);
    env.true_labels.reserve(pool_size);
    for (std::size_t i = 0; i < pool_size; ++i) {
        std::vector<double> x(feature_dim);
        for (double& v : x) v = rng.gaussian();
        const auto scores = env.scoring.matvec(x);
        env.true_labels.push_back(static_cast<std::size_t>(
            std::max_element(scores.begin(), scores.end()) - scores.begin()));
        env.queries.push_back(std::move(x));
    }
    return env;
}

namespace {

struct Rollout {
    std::vector<int> tokens;
    std::vector<double> old_lp;
    std::vector<double> ref_lp;
    double reward = 0.0;
};

struct GroupData {
    std::size_t query = 0;
    std::vector<Rollout> rollouts;
};

// Conditional log-probs of the remaining labels under logits z.
void conditional_logprobs(const std::vector<double>& z, const std::vector<int>& remaining,
                          std::vector<double>& out) {
    double m = -1e300;
    for (int j : remaining) m = std::max(m, z[static_cast<std::size_t>(j)]);
    double acc = 0.0;
    for (int j : remaining) acc += std::exp(z[static_cast<std::size_t>(j)] - m);
    const double logz = std::log(acc) + m;
    out.resize(remaining.size());
    for (std::size_t i = 0; i < remaining.size(); ++i)
        out[i] = z[static_cast<std::size_t>(remaining[i])] - logz;
}

} // namespace

PolicyTrainResult train_toy_policy(const ToyDiagnosisEnv& env, const GRPOConfig& cfg,
                                   std::size_t steps, const TrainOptions& opts) {
    if (steps < 1) fail(ErrorCode::invalid_argument, "train_toy_policy: steps must be >= 1");
    if (cfg.group_size < 2)
        fail(ErrorCode::invalid_argument, "train_toy_policy: group_size must be >= 2");
    const std::size_t l = env.label_count, f = env.feature_dim;
    const std::size_t k = env.position_weights.w.size();

    PolicyTrainResult res;
    res.policy = RealMatrix(l, f, 0.0); // uniform policy at init
    res.init_policy = res.policy;
    const RealMatrix& ref = res.init_policy;

    Rng rng(opts.seed);
    std::vector<double> cond, ref_cond, new_cond;
    std::vector<int> remaining;

    for (std::size_t step = 1; step <= steps; ++step) {
        // Rollout phase under the frozen snapshot pi_old = current policy.
        const RealMatrix theta_old = res.policy;
        std::vector<GroupData> groups(opts.queries_per_step);
        double reward_sum = 0.0, kl_sum = 0.0;
        std::size_t reward_n = 0, kl_n = 0;
        for (auto& gd : groups) {
            gd.query = static_cast<std::size_t>(rng.below(env.queries.size()));
            const auto& x = env.queries[gd.query];
            const auto z_old = theta_old.matvec(x);
            const auto z_ref = ref.matvec(x);
            gd.rollouts.resize(cfg.group_size);
            for (auto& ro : gd.rollouts) {
                remaining.resize(l);
                for (std::size_t j = 0; j < l; ++j) remaining[j] = static_cast<int>(j);
                std::vector<int> correctness(k, 0);
                for (std::size_t t = 0; t < k; ++t) {
                    conditional_logprobs(z_old, remaining, cond);
                    conditional_logprobs(z_ref, remaining, ref_cond);
                    // KL of the conditional old policy to the reference.
                    double kl_t = 0.0;
                    for (std::size_t i = 0; i < remaining.size(); ++i)
                        kl_t += std::exp(cond[i]) * (cond[i] - ref_cond[i]);
                    kl_sum += kl_t;
                    ++kl_n;
                    const double u = rng.uniform01();
                    double cum = 0.0;
                    std::size_t pick = remaining.size() - 1;
                    for (std::size_t i = 0; i < remaining.size(); ++i) {
                        cum += std::exp(cond[i]);
                        if (u < cum) {
                            pick = i;
                            break;
                        }
                    }
                    const int chosen = remaining[pick];
                    ro.tokens.push_back(chosen);
                    ro.old_lp.push_back(cond[pick]);
                    ro.ref_lp.push_back(ref_cond[pick]);
                    if (static_cast<std::size_t>(chosen) == env.true_labels[gd.query])
                        correctness[t] = 1;
                    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
                }
                ro.reward = env.zero_reward
                                ? 0.0
                                : rewards::topk_reward(correctness, env.position_weights);
                reward_sum += ro.reward;
                ++reward_n;
            }
        }

        // Step record at theta = theta_old (phi = 1 everywhere).
        double objective_sum = 0.0;
        for (const auto& gd : groups) {
            RolloutGroup rg;
            rg.query_id = std::to_string(gd.query);
            std::vector<std::vector<double>> kl_tokens;
            for (const auto& ro : gd.rollouts) {
                rg.outputs.push_back(ro.tokens);
                rg.old_logprobs.push_back(ro.old_lp);
                rg.ref_logprobs.push_back(ro.ref_lp);
                rg.rewards.push_back(ro.reward);
                std::vector<double> kl_row(ro.tokens.size());
                for (std::size_t t = 0; t < ro.tokens.size(); ++t)
                    kl_row[t] = 0.0; // filled below from conditionals
                kl_tokens.push_back(std::move(kl_row));
            }
            // Recompute per-token conditional KL under theta_old for the record.
            const auto& x = env.queries[gd.query];
            const auto z_old = theta_old.matvec(x);
            const auto z_ref = ref.matvec(x);
            for (std::size_t i = 0; i < gd.rollouts.size(); ++i) {
                remaining.resize(l);
                for (std::size_t j = 0; j < l; ++j) remaining[j] = static_cast<int>(j);
                for (std::size_t t = 0; t < gd.rollouts[i].tokens.size(); ++t) {
                    conditional_logprobs(z_old, remaining, cond);
                    conditional_logprobs(z_ref, remaining, ref_cond);
                    double kl_t = 0.0;
                    for (std::size_t jj = 0; jj < remaining.size(); ++jj)
                        kl_t += std::exp(cond[jj]) * (cond[jj] - ref_cond[jj]);
                    kl_tokens[i][t] = kl_t;
                    const auto it = std::find(remaining.begin(), remaining.end(),
                                              gd.rollouts[i].tokens[t]);
                    remaining.erase(it);
                }
            }
            objective_sum += grpo_objective(rg, rg.old_logprobs, kl_tokens, cfg);
        }

        LearningRecord rec;
        rec.step = step;
        rec.mean_reward = reward_sum / static_cast<double>(reward_n);
        rec.mean_kl = kl_sum / static_cast<double>(kl_n);
        rec.objective = objective_sum / static_cast<double>(groups.size());
        res.records.push_back(rec);

        // Ascent phase: a few epochs of gradient steps against the snapshot.
        // The step size is normalized by the penalty scale; otherwise a large
        // beta multiplies the KL gradient into an unstable effective rate.
        const double step_size = opts.lr / (1.0 + cfg.kl_beta);
        for (std::size_t epoch = 0; epoch < opts.inner_epochs; ++epoch) {
            RealMatrix grad(l, f, 0.0);
            for (const auto& gd : groups) {
                const auto& x = env.queries[gd.query];
                const auto z_new = res.policy.matvec(x);
                const auto z_ref = ref.matvec(x);
                std::vector<double> rrs;
                for (const auto& ro : gd.rollouts) rrs.push_back(ro.reward);
                const auto adv = group_advantages(rrs, cfg.advantage_eps);
                const double scale = 1.0 / (static_cast<double>(groups.size()) *
                                            static_cast<double>(gd.rollouts.size()) *
                                            static_cast<double>(k));
                std::vector<double> dz(l, 0.0);
                for (std::size_t i = 0; i < gd.rollouts.size(); ++i) {
                    const auto& ro = gd.rollouts[i];
                    remaining.resize(l);
                    for (std::size_t j = 0; j < l; ++j) remaining[j] = static_cast<int>(j);
                    for (std::size_t t = 0; t < ro.tokens.size(); ++t) {
                        conditional_logprobs(z_new, remaining, new_cond);
                        conditional_logprobs(z_ref, remaining, ref_cond);
                        const auto it = std::find(remaining.begin(), remaining.end(), ro.tokens[t]);
                        const std::size_t pick =
                            static_cast<std::size_t>(it - remaining.begin());
                        const double lp = new_cond[pick];
                        const double phi = std::exp(lp - ro.old_lp[t]);
                        const double a = adv[i];
                        const bool clipped_out = (a > 0.0 && phi > 1.0 + cfg.clip_eps) ||
                                                 (a < 0.0 && phi < 1.0 - cfg.clip_eps);
                        const double surr_coef = clipped_out ? 0.0 : a * phi;
                        double kl_t = 0.0;
                        for (std::size_t jj = 0; jj < remaining.size(); ++jj)
                            kl_t += std::exp(new_cond[jj]) * (new_cond[jj] - ref_cond[jj]);
                        for (std::size_t jj = 0; jj < remaining.size(); ++jj) {
                            const std::size_t lbl = static_cast<std::size_t>(remaining[jj]);
                            const double p = std::exp(new_cond[jj]);
                            const double dlp = (jj == pick ? 1.0 : 0.0) - p;
                            const double dkl = p * ((new_cond[jj] - ref_cond[jj]) - kl_t);
                            dz[lbl] += scale * (surr_coef * dlp - cfg.kl_beta * dkl);
                        }
                        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
                    }
                }
                for (std::size_t r = 0; r < l; ++r)
                    for (std::size_t c = 0; c < f; ++c) grad(r, c) += dz[r] * x[c];
                std::fill(dz.begin(), dz.end(), 0.0);
            }
            for (std::size_t i = 0; i < res.policy.data().size(); ++i)
                res.policy.data()[i] += step_size * grad.data()[i];
        }
    }

    double kl_pool = 0.0;
    for (const auto& x : env.queries)
        kl_pool += categorical_kl(res.policy.matvec(x), ref.matvec(x));
    res.final_kl_to_init = kl_pool / static_cast<double>(env.queries.size());
    return res;
}

} // namespace dermbench::grpo
