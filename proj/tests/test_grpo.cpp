#include <doctest.h>

#include <cmath>

#include "dermbench/grpo.hpp"
#include "dermbench/rng.hpp"

using namespace dermbench;
using namespace dermbench::grpo;

namespace {

RolloutGroup identity_group(Rng& rng, std::size_t g, std::size_t max_len) {
    RolloutGroup group;
    group.query_id = "q";
    for (std::size_t i = 0; i < g; ++i) {
        const std::size_t len = 1 + rng.below(max_len);
        std::vector<int> tokens(len);
        std::vector<double> lp(len);
        for (auto& t : tokens) t = static_cast<int>(rng.below(9));
        for (auto& v : lp) v = -rng.uniform(0.05, 3.0);
        group.outputs.push_back(tokens);
        group.old_logprobs.push_back(lp);
        group.ref_logprobs.push_back(lp);
        group.rewards.push_back(rng.uniform(-1.0, 2.0));
    }
    return group;
}

std::vector<std::vector<double>> zeros_like(const RolloutGroup& group) {
    std::vector<std::vector<double>> z;
    for (const auto& o : group.outputs) z.emplace_back(o.size(), 0.0);
    return z;
}

} // namespace

TEST_CASE("group advantages: hand-computed z-scores and degenerate groups") {
    const auto adv = group_advantages({1.0, 2.0, 3.0}, 1e-8);
    CHECK(adv[0] == doctest::Approx(-1.2247).epsilon(1e-4));
    CHECK(adv[1] == doctest::Approx(0.0));
    CHECK(adv[2] == doctest::Approx(1.2247).epsilon(1e-4));

    for (double a : group_advantages({5.0, 5.0, 5.0}, 1e-8)) CHECK(a == 0.0);

    CHECK_THROWS_AS(group_advantages({1.0}, 1e-8), Error);
    CHECK_THROWS_AS(group_advantages({1.0, 2.0}, 0.0), Error);
}

TEST_CASE("advantages sum to zero and are shift/scale invariant") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> rewards(2 + rng.below(10));
        for (double& r : rewards) r = rng.uniform(-3.0, 3.0);
        const auto adv = group_advantages(rewards, 1e-8);
        double sum = 0.0;
        for (double a : adv) sum += a;
        CHECK(std::abs(sum) < 1e-9);

        std::vector<double> shifted = rewards, scaled = rewards;
        const double c = rng.uniform(0.5, 4.0);
        for (double& r : shifted) r += 17.25;
        for (double& r : scaled) r *= c;
        const auto adv_shift = group_advantages(shifted, 1e-8);
        const auto adv_scale = group_advantages(scaled, 1e-8);
        for (std::size_t i = 0; i < adv.size(); ++i) {
            CHECK(adv_shift[i] == doctest::Approx(adv[i]).epsilon(1e-9));
            CHECK(adv_scale[i] == doctest::Approx(adv[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("importance ratios are exp(new - old) and positive") {
    const std::vector<std::vector<double>> old_lp = {{-1.0, -2.0}, {-0.5}};
    std::vector<std::vector<double>> new_lp = old_lp;
    auto phi = importance_ratios(new_lp, old_lp);
    for (const auto& row : phi)
        for (double p : row) CHECK(p == doctest::Approx(1.0));

    new_lp[0][1] = old_lp[0][1] + std::log(2.0);
    phi = importance_ratios(new_lp, old_lp);
    CHECK(phi[0][1] == doctest::Approx(2.0).epsilon(1e-12));
    for (const auto& row : phi)
        for (double p : row) CHECK(p > 0.0);

    new_lp.push_back({0.0});
    CHECK_THROWS_AS(importance_ratios(new_lp, old_lp), Error);
}

TEST_CASE("objective anchors: zero at theta_old, zero with reference KL") {
    Rng rng(6);
    GRPOConfig cfg;
    cfg.kl_beta = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto group = identity_group(rng, 2 + rng.below(6), 5);
        const double j = grpo_objective(group, group.old_logprobs, zeros_like(group), cfg);
        CHECK(std::abs(j) < 1e-12);
    }
    // theta = theta_old = pi_ref with beta > 0: KL is identically zero.
    GRPOConfig kl_cfg;
    kl_cfg.kl_beta = 0.1;
    const auto group = identity_group(rng, 4, 4);
    CHECK(std::abs(grpo_objective(group, group.old_logprobs, zeros_like(group), kl_cfg)) < 1e-12);
}

TEST_CASE("clip inertness: ratios inside the trust band leave the surrogate exact") {
    Rng rng(7);
    GRPOConfig cfg;
    cfg.clip_eps = 0.2;
    cfg.kl_beta = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto group = identity_group(rng, 4, 4);
        auto new_lp = group.old_logprobs;
        for (auto& row : new_lp)
            for (double& v : row) v += std::log(rng.uniform(0.85, 1.15)); // phi in [0.85, 1.15]
        const double clipped = grpo_objective(group, new_lp, zeros_like(group), cfg);
        GRPOConfig wide = cfg;
        wide.clip_eps = 1e9; // clipping can never bind
        const double unclipped = grpo_objective(group, new_lp, zeros_like(group), wide);
        CHECK(clipped == unclipped);
    }
}

TEST_CASE("single-token clip arithmetic follows min(phi A, clip(phi) A)") {
    RolloutGroup group;
    group.query_id = "clip";
    group.outputs = {{0}, {0}};
    group.old_logprobs = {{std::log(0.4)}, {std::log(0.4)}};
    group.ref_logprobs = group.old_logprobs;
    group.rewards = {1.0, 0.0}; // advantages exactly {+1, -1}
    const std::vector<std::vector<double>> new_lp = {{std::log(0.4) + std::log(1.5)},
                                                     {std::log(0.4)}};
    GRPOConfig cfg;
    cfg.clip_eps = 0.2;
    cfg.kl_beta = 0.0;
    const double j = grpo_objective(group, new_lp, {{0.0}, {0.0}}, cfg);
    CHECK(j == ((1.0 + 0.2) * 1.0 + (1.0) * (-1.0)) / 2.0);
}

TEST_CASE("categorical KL: zero at equality, hand value, nonnegative") {
    CHECK(categorical_kl({0.2, 1.4}, {0.2, 1.4}) == doctest::Approx(0.0));

    // p = softmax(0, ln 3) = (1/4, 3/4) against uniform q.
    const double kl = categorical_kl({0.0, std::log(3.0)}, {0.0, 0.0});
    CHECK(kl == doctest::Approx(0.13081203594113697).epsilon(1e-10));

    Rng rng(8);
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<double> p(2 + rng.below(6)), q;
        q.resize(p.size());
        for (double& v : p) v = rng.uniform(-4.0, 4.0);
        for (double& v : q) v = rng.uniform(-4.0, 4.0);
        CHECK(categorical_kl(p, q) >= -1e-12);
    }
    CHECK_THROWS_AS(categorical_kl({1.0}, {1.0}), Error);
    CHECK_THROWS_AS(categorical_kl({1.0, std::nan("")}, {0.0, 0.0}), Error);
}

TEST_CASE("toy env is deterministic and its labels come from the scoring map") {
    const auto a = make_toy_env(6, 8, 32, rewards::default_position_weights(), 3);
    const auto b = make_toy_env(6, 8, 32, rewards::default_position_weights(), 3);
    CHECK(a.queries == b.queries);
    CHECK(a.true_labels == b.true_labels);
    for (std::size_t i = 0; i < a.queries.size(); ++i) {
        const auto scores = a.scoring.matvec(a.queries[i]);
        CHECK(static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) -
                                       scores.begin()) == a.true_labels[i]);
    }
    CHECK_THROWS_AS(make_toy_env(6, 3, 32, rewards::default_position_weights(), 3), Error);
}

TEST_CASE("zero-reward env leaves the policy untouched") {
    auto env = make_toy_env(5, 8, 16, rewards::default_position_weights(), 12);
    env.zero_reward = true;
    GRPOConfig cfg;
    cfg.kl_beta = 0.05;
    TrainOptions opts;
    opts.seed = 12;
    const auto result = train_toy_policy(env, cfg, 20, opts);
    for (double v : result.policy.data()) CHECK(v == 0.0);
    CHECK(result.final_kl_to_init == 0.0);
}

TEST_CASE("short toy training is reproducible bit-for-bit") {
    const auto env = make_toy_env(6, 8, 24, rewards::default_position_weights(), 4);
    GRPOConfig cfg;
    TrainOptions opts;
    opts.seed = 4;
    const auto a = train_toy_policy(env, cfg, 15, opts);
    const auto b = train_toy_policy(env, cfg, 15, opts);
    CHECK(a.policy.data() == b.policy.data());
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].mean_reward == b.records[i].mean_reward);
        CHECK(a.records[i].objective == b.records[i].objective);
    }
}
