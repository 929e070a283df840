#include "dermbench/rewards.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "dermbench/error.hpp"

namespace dermbench::rewards {

AttributeScores make_attribute_scores(std::map<std::string, double> values) {
    for (const auto& [field, s] : values)
        if (!(s >= 0.0 && s <= 10.0))
            fail(ErrorCode::validation,
                 "attribute score for '" + field + "' outside [0,10]: " + std::to_string(s));
    return AttributeScores{std::move(values)};
}

AttributeWeights make_attribute_weights(std::map<std::string, double> values) {
    double total = 0.0;
    for (const auto& [field, a] : values) {
        if (!(a >= 0.0) || !std::isfinite(a))
            fail(ErrorCode::validation, "attribute weight for '" + field + "' must be >= 0");
        total += a;
    }
    if (std::abs(total - 1.0) > 1e-9)
        fail(ErrorCode::validation,
             "attribute weights must sum to 1, got " + std::to_string(total));
    return AttributeWeights{std::move(values)};
}

PositionWeights make_position_weights(std::vector<double> w) {
    if (w.empty()) fail(ErrorCode::validation, "position weights must be non-empty");
    if (w.front() > 1.0) fail(ErrorCode::validation, "position weights must start <= 1");
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!std::isfinite(w[i]) || w[i] < 0.0)
            fail(ErrorCode::validation, "position weights must be finite and >= 0");
        if (i > 0 && w[i] > w[i - 1])
            fail(ErrorCode::validation, "position weights must be non-increasing");
    }
    return PositionWeights{std::move(w)};
}

PositionWeights default_position_weights() {
    return PositionWeights{{1.0, 0.8, 0.6, 0.5, 0.4, 0.3}};
}

double caption_reward(const AttributeScores& scores, const AttributeWeights& weights) {
    double r = 0.0;
    for (const auto& [field, alpha] : weights.values) {
        if (alpha == 0.0) continue;
        const auto it = scores.values.find(field);
        if (it == scores.values.end())
            fail(ErrorCode::invalid_argument,
                 "caption_reward: no score for weighted field '" + field + "'");
        r += alpha * it->second;
    }
    return r;
}

bool acceptability(double score) {
    if (!(score >= 0.0 && score <= 10.0))
        fail(ErrorCode::invalid_argument,
             "acceptability: score outside [0,10]: " + std::to_string(score));
    return score >= 6.0;
}

double topk_reward(const std::vector<int>& correctness, const PositionWeights& w) {
    if (correctness.size() != w.w.size())
        fail(ErrorCode::dimension_mismatch,
             "topk_reward: correctness length " + std::to_string(correctness.size()) +
                 " != weight length " + std::to_string(w.w.size()));
    for (std::size_t i = 0; i < correctness.size(); ++i)
        if (correctness[i] != 0) return w.w[i];
    return 0.0;
}

AttributeWeights derive_attribute_weights(const std::map<std::string, std::size_t>& field_counts) {
    std::size_t total = 0;
    for (const auto& [field, c] : field_counts) total += c;
    if (total == 0)
        fail(ErrorCode::invalid_argument, "derive_attribute_weights: all counts are zero");
    std::map<std::string, double> weights;
    for (const auto& [field, c] : field_counts)
        weights[field] = static_cast<double>(c) / static_cast<double>(total);
    return AttributeWeights{std::move(weights)};
}

double reward_accuracy_correlation(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 3)
        fail(ErrorCode::invalid_argument, "reward_accuracy_correlation: need >= 3 pairs");
    const double n = static_cast<double>(pairs.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pairs) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto& [x, y] : pairs) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        fail(ErrorCode::invalid_argument,
             "reward_accuracy_correlation: undefined for a constant coordinate");
    return sxy / std::sqrt(sxx * syy);
}

namespace {

nlohmann::json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open: " + path);
    try {
        return nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, path + ": " + e.what());
    }
}

} // namespace

AttributeWeights load_attribute_weights_file(const std::string& path) {
    const auto doc = parse_json_file(path);
    if (!doc.is_object())
        fail(ErrorCode::parse, path + ": attribute weights must be a JSON object");
    std::map<std::string, double> values;
    for (const auto& [key, val] : doc.items()) {
        if (!val.is_number())
            fail(ErrorCode::parse, path + ": weight for '" + key + "' is not a number");
        values[key] = val.get<double>();
    }
    return make_attribute_weights(std::move(values));
}

PositionWeights load_position_weights_file(const std::string& path) {
    const auto doc = parse_json_file(path);
    if (!doc.is_array())
        fail(ErrorCode::parse, path + ": position weights must be a JSON array");
    std::vector<double> w;
    for (const auto& val : doc) {
        if (!val.is_number())
            fail(ErrorCode::parse, path + ": position weight is not a number");
        w.push_back(val.get<double>());
    }
    return make_position_weights(std::move(w));
}

} // namespace dermbench::rewards
