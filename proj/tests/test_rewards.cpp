#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dermbench/rewards.hpp"
#include "dermbench/rng.hpp"
#include "dermbench/error.hpp"

using namespace dermbench;
using namespace dermbench::rewards;

TEST_CASE("caption reward is the weighted average of attribute scores") {
    const auto two = caption_reward(make_attribute_scores({{"color", 8.0}, {"shape", 4.0}}),
                                    make_attribute_weights({{"color", 0.5}, {"shape", 0.5}}));
    CHECK(two == doctest::Approx(6.0));

    const auto skew = caption_reward(make_attribute_scores({{"color", 10.0}, {"shape", 0.0}}),
                                     make_attribute_weights({{"color", 0.7}, {"shape", 0.3}}));
    CHECK(skew == doctest::Approx(7.0));

    // All scores 6 -> reward 6, right at the acceptability boundary.
    const auto all6 = caption_reward(
        make_attribute_scores({{"color", 6.0}, {"shape", 6.0}, {"size", 6.0}}),
        make_attribute_weights({{"color", 0.2}, {"shape", 0.5}, {"size", 0.3}}));
    CHECK(all6 == doctest::Approx(6.0));
    CHECK(acceptability(all6));

    CHECK_THROWS_AS(caption_reward(make_attribute_scores({{"color", 5.0}}),
                                   make_attribute_weights({{"shape", 1.0}})),
                    Error);
}

TEST_CASE("caption reward stays within [0,10] and is linear per score") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::map<std::string, double> scores, weights;
        const int n = 1 + static_cast<int>(rng.below(6));
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            const std::string f = "f" + std::to_string(i);
            scores[f] = rng.uniform(0.0, 10.0);
            weights[f] = rng.uniform(0.01, 1.0);
            total += weights[f];
        }
        for (auto& [_, w] : weights) w /= total;
        const double r = caption_reward(make_attribute_scores(scores),
                                        make_attribute_weights(weights));
        CHECK(r >= 0.0);
        CHECK(r <= 10.0 + 1e-12);
    }
}

TEST_CASE("permuting field names consistently leaves the reward unchanged") {
    const auto scores = make_attribute_scores({{"a", 2.0}, {"b", 9.0}, {"c", 4.0}});
    const auto weights = make_attribute_weights({{"a", 0.25}, {"b", 0.5}, {"c", 0.25}});
    const double base = caption_reward(scores, weights);
    // Rename a->x, b->y, c->z in both maps.
    const auto scores2 = make_attribute_scores({{"x", 2.0}, {"y", 9.0}, {"z", 4.0}});
    const auto weights2 = make_attribute_weights({{"x", 0.25}, {"y", 0.5}, {"z", 0.25}});
    CHECK(base == caption_reward(scores2, weights2));
}

TEST_CASE("acceptability threshold sits exactly at 6") {
    CHECK(acceptability(6.0));
    CHECK_FALSE(acceptability(5.999));
    CHECK(acceptability(10.0));
    CHECK(acceptability(6.0000001));
    CHECK_FALSE(acceptability(0.0));
    CHECK_THROWS_AS(acceptability(-0.1), Error);
    CHECK_THROWS_AS(acceptability(10.5), Error);
}

TEST_CASE("topk reward picks the weight of the first correct position") {
    const auto w = default_position_weights();
    CHECK(topk_reward({0, 1, 0, 0, 0, 0}, w) == 0.8);
    CHECK(topk_reward({1, 1, 1, 1, 1, 1}, w) == 1.0);
    CHECK(topk_reward({0, 0, 0, 0, 0, 0}, w) == 0.0);
    CHECK(topk_reward({0, 0, 0, 0, 0, 1}, w) == 0.3);
    CHECK_THROWS_AS(topk_reward({1, 0}, w), Error);
}

TEST_CASE("moving the first correct position earlier never lowers the reward") {
    Rng rng(9);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t k = 2 + rng.below(7);
        std::vector<double> wv(k);
        double cur = rng.uniform(0.5, 1.0);
        for (auto& v : wv) {
            cur -= rng.uniform(0.0, cur / k);
            v = std::max(0.0, cur);
        }
        const auto w = make_position_weights(wv);
        std::vector<int> l(k, 0);
        for (auto& b : l) b = rng.below(2) ? 1 : 0;
        const double before = topk_reward(l, w);
        auto first = std::find(l.begin(), l.end(), 1);
        if (first == l.end() || first == l.begin()) continue;
        std::vector<int> earlier = l;
        earlier[static_cast<std::size_t>(first - l.begin()) - 1] = 1;
        CHECK(topk_reward(earlier, w) >= before);
    }
}

TEST_CASE("position weights must be monotone, bounded, and non-empty") {
    CHECK_NOTHROW(make_position_weights({1.0, 1.0, 0.2}));
    CHECK_THROWS_AS(make_position_weights({}), Error);
    CHECK_THROWS_AS(make_position_weights({1.2, 0.5}), Error);
    CHECK_THROWS_AS(make_position_weights({0.5, 0.8}), Error);
    CHECK_THROWS_AS(make_position_weights({0.5, -0.1}), Error);
}

TEST_CASE("attribute weights derive from field counts") {
    const auto w = derive_attribute_weights({{"color", 3}, {"shape", 1}});
    CHECK(w.values.at("color") == doctest::Approx(0.75));
    CHECK(w.values.at("shape") == doctest::Approx(0.25));

    const auto solo = derive_attribute_weights({{"texture", 7}});
    CHECK(solo.values.at("texture") == 1.0);

    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        std::map<std::string, std::size_t> counts;
        const int n = 1 + static_cast<int>(rng.below(8));
        for (int i = 0; i < n; ++i) counts["f" + std::to_string(i)] = rng.below(50);
        counts["f0"] += 1; // keep at least one positive
        double total = 0.0;
        for (const auto& [_, v] : derive_attribute_weights(counts).values) total += v;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(derive_attribute_weights({{"color", 0}}), Error);
}

TEST_CASE("weights files load and validate") {
    const std::string dir = DERMBENCH_FIXTURE_DIR;
    const auto position = load_position_weights_file(dir + "/position_weights.json");
    CHECK(position.w == std::vector<double>{1.0, 0.8, 0.6, 0.5, 0.4, 0.3});
    const auto attrs = load_attribute_weights_file(dir + "/attribute_weights.json");
    CHECK(attrs.values.at("color") == 0.4);
    double total = 0.0;
    for (const auto& [_, w] : attrs.values) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

    const std::string bad = dir + "/bad_weights.json";
    {
        std::ofstream out(bad);
        out << "[0.5, 0.9]"; // increasing -> invalid
    }
    CHECK_THROWS_AS(load_position_weights_file(bad), Error);
    std::remove(bad.c_str());
    CHECK_THROWS_AS(load_position_weights_file(dir + "/nope.json"), Error);
}

TEST_CASE("Pearson correlation: exact line, published pairs, antisymmetry") {
    const double one = reward_accuracy_correlation({{1, 2}, {2, 4}, {3, 6}, {4, 8}});
    CHECK(one == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<std::pair<double, double>> pairs = {
        {6.162, 13.79}, {6.688, 23.00}, {5.924, 24.14}, {6.912, 26.44}, {7.186, 27.59}};
    const double r = reward_accuracy_correlation(pairs);
    CHECK(r > 0.0);
    CHECK(r == doctest::Approx(0.61564988001423104).epsilon(1e-9));

    auto negated = pairs;
    for (auto& [x, y] : negated) y = -y;
    CHECK(reward_accuracy_correlation(negated) == doctest::Approx(-r).epsilon(1e-12));

    CHECK_THROWS_AS(reward_accuracy_correlation({{1, 1}, {2, 2}}), Error);
    CHECK_THROWS_AS(reward_accuracy_correlation({{1, 1}, {1, 2}, {1, 3}}), Error);
}
