#ifndef DERMBENCH_REWARDS_HPP
#define DERMBENCH_REWARDS_HPP

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dermbench::rewards {

// Per-attribute judge scores, each in [0, 10].
struct AttributeScores {
    std::map<std::string, double> values;
};

AttributeScores make_attribute_scores(std::map<std::string, double> values);

// Non-negative per-attribute weights summing to 1 (within 1e-9).
struct AttributeWeights {
    std::map<std::string, double> values;
};

AttributeWeights make_attribute_weights(std::map<std::string, double> values);

// Monotone non-increasing positional weights, 1 >= w1 >= ... >= wK >= 0.
struct PositionWeights {
    std::vector<double> w;
};

PositionWeights make_position_weights(std::vector<double> w);
PositionWeights default_position_weights(); // [1.0, 0.8, 0.6, 0.5, 0.4, 0.3]

// R = sum_i alpha_i * s_i; every positive-weight field must be scored.
double caption_reward(const AttributeScores& scores, const AttributeWeights& weights);

// true iff score >= 6 (score must lie in [0, 10]).
bool acceptability(double score);

// Positional reward: w at the first correct rank, 0 when nothing is correct.
double topk_reward(const std::vector<int>& correctness, const PositionWeights& w);

// alpha_i = count_i / sum(counts).
AttributeWeights derive_attribute_weights(const std::map<std::string, std::size_t>& field_counts);

// Pearson correlation; needs >= 3 pairs and variation in both coordinates.
double reward_accuracy_correlation(const std::vector<std::pair<double, double>>& pairs);

// JSON object {name: weight}; validated on load.
AttributeWeights load_attribute_weights_file(const std::string& path);
// JSON array [w1, ..., wK]; validated on load.
PositionWeights load_position_weights_file(const std::string& path);

} // namespace dermbench::rewards

#endif
