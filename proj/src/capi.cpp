#include "dermbench.h"

#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "dermbench/checks.hpp"
#include "dermbench/fdlinear.hpp"
#include "dermbench/runners.hpp"
#include "dermbench/rewards.hpp"
#include "dermbench/taxonomy.hpp"
#include "dermbench/toybench.hpp"
#include "dermbench/grpo.hpp"

namespace {

thread_local std::string g_last_error;

int set_error(dermbench::ErrorCode code, const std::string& message) {
    g_last_error = message;
    return static_cast<int>(code);
}

// Runs f, translating exceptions into error codes + the thread-local message.
template <typename F>
int guarded(F&& f) {
    try {
        f();
        return DERMBENCH_OK;
    } catch (const dermbench::Error& e) {
        return set_error(e.code(), e.what());
    } catch (const std::exception& e) {
        return set_error(dermbench::ErrorCode::internal, e.what());
    } catch (...) {
        return set_error(dermbench::ErrorCode::internal, "unknown error");
    }
}

int require(bool cond, const char* message) {
    if (cond) return DERMBENCH_OK;
    return set_error(dermbench::ErrorCode::invalid_argument, message);
}

} // namespace

struct dermbench_layer {
    dermbench::fdlinear::FDLinearLayer impl;
};

struct dermbench_taxonomy {
    dermbench::taxonomy::DiseaseTaxonomy impl;
};

extern "C" {

const char* dermbench_version(void) { return "1.0.0"; }

const char* dermbench_last_error(void) { return g_last_error.c_str(); }

int dermbench_layer_create(int d_in, int d_out, int k, const char* bank_mode, int hidden,
                           const char* context_mode, uint64_t seed, dermbench_layer** out) {
    if (int rc = require(out && bank_mode && context_mode, "null argument")) return rc;
    if (int rc = require(d_in >= 1 && d_out >= 1 && k >= 1 && hidden >= 0,
                         "d_in, d_out, k must be >= 1 and hidden >= 0"))
        return rc;
    return guarded([&] {
        dermbench::fdlinear::LayerConfig cfg;
        cfg.d_in = static_cast<std::size_t>(d_in);
        cfg.d_out = static_cast<std::size_t>(d_out);
        cfg.k = static_cast<std::size_t>(k);
        cfg.hidden = static_cast<std::size_t>(hidden);
        cfg.seed = seed;
        const std::string mode = bank_mode;
        if (mode == "frequency-disjoint")
            cfg.bank = dermbench::fdlinear::BankInit::frequency_disjoint;
        else if (mode == "free-spatial")
            cfg.bank = dermbench::fdlinear::BankInit::free_spatial;
        else if (mode == "auto")
            cfg.bank = dermbench::fdlinear::BankInit::auto_select;
        else
            dermbench::fail(dermbench::ErrorCode::invalid_argument,
                            "bank_mode must be frequency-disjoint|free-spatial|auto");
        const std::string ctx = context_mode;
        if (ctx == "identity")
            cfg.context = dermbench::fdlinear::ContextMode::identity;
        else if (ctx == "global-average")
            cfg.context = dermbench::fdlinear::ContextMode::global_average;
        else
            dermbench::fail(dermbench::ErrorCode::invalid_argument,
                            "context_mode must be global-average|identity");
        *out = new dermbench_layer{dermbench::fdlinear::make_layer(cfg)};
    });
}

void dermbench_layer_destroy(dermbench_layer* layer) { delete layer; }

int dermbench_layer_forward(const dermbench_layer* layer, const double* x, size_t x_len,
                            const double* xbar, size_t xbar_len, double* y, size_t y_len) {
    if (int rc = require(layer && x && xbar && y, "null argument")) return rc;
    return guarded([&] {
        const std::vector<double> xv(x, x + x_len);
        const std::vector<double> xbv(xbar, xbar + xbar_len);
        const auto yv = dermbench::fdlinear::forward_collapsed(layer->impl, xv, xbv);
        if (yv.size() != y_len)
            dermbench::fail(dermbench::ErrorCode::dimension_mismatch,
                            "output buffer length != d_out");
        std::memcpy(y, yv.data(), y_len * sizeof(double));
    });
}

int dermbench_layer_overhead(const dermbench_layer* layer, double* predictor_ratio,
                             double* bank_overhead_ratio) {
    if (int rc = require(layer && predictor_ratio && bank_overhead_ratio, "null argument"))
        return rc;
    return guarded([&] {
        const auto report = dermbench::fdlinear::overhead_report(layer->impl);
        *predictor_ratio = report.predictor_ratio;
        *bank_overhead_ratio = report.bank_overhead_ratio;
    });
}

int dermbench_layer_save(const dermbench_layer* layer, const char* path) {
    if (int rc = require(layer && path, "null argument")) return rc;
    return guarded([&] { dermbench::fdlinear::save_layer_file(layer->impl, path); });
}

int dermbench_layer_load(const char* path, dermbench_layer** out) {
    if (int rc = require(path && out, "null argument")) return rc;
    return guarded([&] {
        *out = new dermbench_layer{dermbench::fdlinear::load_layer_file(path)};
    });
}

int dermbench_group_advantages(const double* rewards, size_t n, double guard,
                               double* advantages_out) {
    if (int rc = require(rewards && advantages_out, "null argument")) return rc;
    return guarded([&] {
        const std::vector<double> rv(rewards, rewards + n);
        const auto adv = dermbench::grpo::group_advantages(rv, guard);
        std::memcpy(advantages_out, adv.data(), adv.size() * sizeof(double));
    });
}

int dermbench_topk_reward(const int32_t* correctness, const double* weights, size_t k,
                          double* reward_out) {
    if (int rc = require(correctness && weights && reward_out, "null argument")) return rc;
    return guarded([&] {
        const std::vector<int> l(correctness, correctness + k);
        const auto w =
            dermbench::rewards::make_position_weights(std::vector<double>(weights, weights + k));
        *reward_out = dermbench::rewards::topk_reward(l, w);
    });
}

int dermbench_caption_reward(const char* const* score_fields, const double* scores,
                             size_t n_scores, const char* const* weight_fields,
                             const double* weights, size_t n_weights, double* reward_out) {
    if (int rc = require(score_fields && scores && weight_fields && weights && reward_out,
                         "null argument"))
        return rc;
    return guarded([&] {
        std::map<std::string, double> sm, wm;
        for (size_t i = 0; i < n_scores; ++i) sm[score_fields[i]] = scores[i];
        for (size_t i = 0; i < n_weights; ++i) wm[weight_fields[i]] = weights[i];
        *reward_out = dermbench::rewards::caption_reward(
            dermbench::rewards::make_attribute_scores(std::move(sm)),
            dermbench::rewards::make_attribute_weights(std::move(wm)));
    });
}

int dermbench_acceptability(double score, int* out) {
    if (int rc = require(out != nullptr, "null argument")) return rc;
    return guarded([&] { *out = dermbench::rewards::acceptability(score) ? 1 : 0; });
}

int dermbench_cover_fraction(uint32_t n, uint32_t d, double* out) {
    if (int rc = require(out != nullptr, "null argument")) return rc;
    return guarded([&] { *out = dermbench::toybench::cover_fraction(n, d); });
}

int dermbench_pearson(const double* xs, const double* ys, size_t n, double* out) {
    if (int rc = require(xs && ys && out, "null argument")) return rc;
    return guarded([&] {
        std::vector<std::pair<double, double>> pairs;
        pairs.reserve(n);
        for (size_t i = 0; i < n; ++i) pairs.emplace_back(xs[i], ys[i]);
        *out = dermbench::rewards::reward_accuracy_correlation(pairs);
    });
}

int dermbench_taxonomy_load_file(const char* path, dermbench_taxonomy** out) {
    if (int rc = require(path && out, "null argument")) return rc;
    return guarded([&] {
        *out = new dermbench_taxonomy{dermbench::taxonomy::load_taxonomy_file(path)};
    });
}

int dermbench_taxonomy_load_json(const char* json_text, dermbench_taxonomy** out) {
    if (int rc = require(json_text && out, "null argument")) return rc;
    return guarded([&] {
        *out = new dermbench_taxonomy{dermbench::taxonomy::load_taxonomy(json_text)};
    });
}

void dermbench_taxonomy_destroy(dermbench_taxonomy* taxonomy) { delete taxonomy; }

int dermbench_classify(const dermbench_taxonomy* taxonomy, const char* reference,
                       const char* prediction, int* category_out, int* truth_out) {
    if (int rc = require(taxonomy && reference && prediction && category_out && truth_out,
                         "null argument"))
        return rc;
    return guarded([&] {
        const auto verdict =
            dermbench::taxonomy::classify_prediction(taxonomy->impl, reference, prediction);
        *category_out = static_cast<int>(verdict.category);
        *truth_out = verdict.truth ? 1 : 0;
    });
}

const char* dermbench_verdict_name(int category) {
    if (category < 0 || category >= static_cast<int>(dermbench::taxonomy::kVerdictCategories))
        return "?";
    return dermbench::taxonomy::verdict_name(
        static_cast<dermbench::taxonomy::VerdictCategory>(category));
}

void dermbench_toybench_params_init(dermbench_toybench_params* params) {
    if (!params) return;
    static const char* kDefaultDataset = "spirals";
    params->dataset = kDefaultDataset;
    params->n = 400;
    params->noise = -1.0;
    params->k = 12;
    params->steps = 3000;
    params->lr = 1e-2;
    params->hidden = 32;
    params->seed = 0;
    params->freeze_predictor = 0;
    params->restarts = 5;
    params->grid_resolution = 64;
}

int dermbench_run_toybench(const dermbench_toybench_params* params, const char* out_dir,
                           dermbench_toybench_summary* summary) {
    if (int rc = require(params && params->dataset && out_dir && summary, "null argument"))
        return rc;
    return guarded([&] {
        dermbench::runners::ToybenchParams p;
        p.dataset = params->dataset;
        p.n = params->n;
        p.noise = params->noise;
        p.k = params->k;
        p.steps = params->steps;
        p.lr = params->lr;
        p.hidden = params->hidden;
        p.seed = params->seed;
        p.freeze_predictor = params->freeze_predictor != 0;
        p.restarts = params->restarts;
        p.grid_resolution = params->grid_resolution;
        const auto s = dermbench::runners::run_toybench(p, out_dir);
        summary->static_accuracy = s.static_accuracy;
        summary->fdlinear_accuracy = s.fdlinear_accuracy;
        summary->gap = s.gap;
        summary->field_angular_variance = s.field_angular_variance;
    });
}

void dermbench_grpo_params_init(dermbench_grpo_params* params) {
    if (!params) return;
    params->steps = 300;
    params->clip_eps = 0.2;
    params->kl_beta = 0.01;
    params->group_size = 8;
    params->advantage_eps = 1e-8;
    params->lr = 0.05;
    params->queries_per_step = 16;
    params->inner_epochs = 2;
    params->feature_dim = 8;
    params->label_count = 10;
    params->pool_size = 64;
    params->topk = 6;
    params->seed = 0;
}

int dermbench_run_grpo(const dermbench_grpo_params* params, const char* out_csv,
                       dermbench_grpo_summary* summary) {
    if (int rc = require(params && out_csv && summary, "null argument")) return rc;
    return guarded([&] {
        dermbench::runners::GrpoParams p;
        p.steps = params->steps;
        p.clip_eps = params->clip_eps;
        p.kl_beta = params->kl_beta;
        p.group_size = params->group_size;
        p.advantage_eps = params->advantage_eps;
        p.lr = params->lr;
        p.queries_per_step = params->queries_per_step;
        p.inner_epochs = params->inner_epochs;
        p.feature_dim = params->feature_dim;
        p.label_count = params->label_count;
        p.pool_size = params->pool_size;
        p.topk = params->topk;
        p.seed = params->seed;
        const auto s = dermbench::runners::run_grpo(p, out_csv);
        summary->first_quartile_mean_reward = s.first_quartile_mean_reward;
        summary->final_quartile_mean_reward = s.final_quartile_mean_reward;
        summary->final_kl_to_init = s.final_kl_to_init;
    });
}

int dermbench_run_eval(const char* taxonomy_path, const char* predictions_path,
                       const char* out_csv, dermbench_eval_summary* summary) {
    if (int rc = require(taxonomy_path && predictions_path && out_csv && summary, "null argument"))
        return rc;
    return guarded([&] {
        const auto s = dermbench::runners::run_eval(taxonomy_path, predictions_path, out_csv);
        summary->cases = s.cases;
        for (int i = 0; i < 6; ++i) summary->top_accuracy[i] = s.top_accuracy[i];
    });
}

int dermbench_run_caption_sim(const char* fixture_path, const char* taxonomy_path,
                              const char* out_dir, dermbench_caption_sim_summary* summary) {
    if (int rc = require(fixture_path && out_dir && summary, "null argument")) return rc;
    return guarded([&] {
        const auto s = dermbench::runners::run_caption_sim(
            fixture_path, taxonomy_path ? taxonomy_path : "", out_dir);
        summary->samples = s.samples;
        summary->accepted = s.accepted;
        summary->escalated = s.escalated;
        summary->acceptance_rate = s.acceptance_rate;
    });
}

int dermbench_run_checks(uint64_t seed, const char* fault_injection,
                         dermbench_check_callback callback, void* user, int* all_passed_out) {
    if (int rc = require(all_passed_out != nullptr, "null argument")) return rc;
    return guarded([&] {
        dermbench::checks::CheckOptions options;
        options.seed = seed;
        if (fault_injection) {
            const std::string fault = fault_injection;
            if (fault == "non-hermitian-mask")
                options.inject_non_hermitian_mask = true;
            else if (!fault.empty())
                dermbench::fail(dermbench::ErrorCode::invalid_argument,
                                "unknown fault injection '" + fault + "'");
        }
        const auto results = dermbench::checks::run_all(options);
        int all = 1;
        for (const auto& result : results) {
            if (!result.passed) all = 0;
            if (callback)
                callback(result.name.c_str(), result.passed ? 1 : 0, result.detail.c_str(), user);
        }
        *all_passed_out = all;
    });
}

} // extern "C"
