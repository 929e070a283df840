/*
 * dermbench C API.
 *
 * A desk-scale workbench for frequency-dynamic linear layers, group-relative
 * policy optimization with ranked rewards, scripted caption annotation, and
 * hierarchy-aware diagnosis evaluation. The C++ core is wrapped behind
 * opaque handles and integer error codes; every function returns DERMBENCH_OK
 * (0) on success and a nonzero code otherwise, with a thread-local message
 * available from dermbench_last_error().
 */
#ifndef DERMBENCH_H
#define DERMBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DERMBENCH_API __declspec(dllexport)
#else
#define DERMBENCH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
    DERMBENCH_OK = 0,
    DERMBENCH_ERR_INVALID_ARGUMENT = 1,
    DERMBENCH_ERR_DIMENSION = 2,
    DERMBENCH_ERR_CAPACITY = 3,
    DERMBENCH_ERR_NON_REAL = 4,
    DERMBENCH_ERR_PARSE = 5,
    DERMBENCH_ERR_VALIDATION = 6,
    DERMBENCH_ERR_IO = 7,
    DERMBENCH_ERR_INTERNAL = 8,
};

DERMBENCH_API const char* dermbench_version(void);

/* Message for the most recent failing call on this thread. */
DERMBENCH_API const char* dermbench_last_error(void);

/* ------------------------------------------------------------------ */
/* Dynamic linear layer                                                */

typedef struct dermbench_layer dermbench_layer;

/* bank_mode: "frequency-disjoint", "free-spatial" or "auto".
 * context_mode: "global-average" or "identity".
 * hidden 0 picks the built-in default bottleneck width. */
DERMBENCH_API int dermbench_layer_create(int d_in, int d_out, int k, const char* bank_mode,
                                         int hidden, const char* context_mode, uint64_t seed,
                                         dermbench_layer** out);
DERMBENCH_API void dermbench_layer_destroy(dermbench_layer* layer);

/* y = W(xbar) x; y_len must equal d_out. */
DERMBENCH_API int dermbench_layer_forward(const dermbench_layer* layer, const double* x,
                                          size_t x_len, const double* xbar, size_t xbar_len,
                                          double* y, size_t y_len);

/* Predictor parameter count over d_in*d_out, and the extra bank parameters
 * (0 for frequency-disjoint banks, k-1 for free-spatial ones). */
DERMBENCH_API int dermbench_layer_overhead(const dermbench_layer* layer, double* predictor_ratio,
                                           double* bank_overhead_ratio);

/* Text checkpoints; exact decimal round-trip at 17 significant digits. */
DERMBENCH_API int dermbench_layer_save(const dermbench_layer* layer, const char* path);
DERMBENCH_API int dermbench_layer_load(const char* path, dermbench_layer** out);

/* ------------------------------------------------------------------ */
/* Reward and policy-optimization primitives                           */

/* Group-normalized advantages (population std, zero below guard). */
DERMBENCH_API int dermbench_group_advantages(const double* rewards, size_t n, double guard,
                                             double* advantages_out);

/* Positional reward of a ranked correctness list; weights non-increasing. */
DERMBENCH_API int dermbench_topk_reward(const int32_t* correctness, const double* weights,
                                        size_t k, double* reward_out);

/* Weighted caption reward R = sum a_i s_i over named attributes. */
DERMBENCH_API int dermbench_caption_reward(const char* const* score_fields, const double* scores,
                                           size_t n_scores, const char* const* weight_fields,
                                           const double* weights, size_t n_weights,
                                           double* reward_out);

/* 1 iff score >= 6 (valid range [0,10]). */
DERMBENCH_API int dermbench_acceptability(double score, int* out);

/* Fraction of linearly separable dichotomies of n points in d dimensions. */
DERMBENCH_API int dermbench_cover_fraction(uint32_t n, uint32_t d, double* out);

/* Pearson correlation of n >= 3 (x, y) pairs. */
DERMBENCH_API int dermbench_pearson(const double* xs, const double* ys, size_t n, double* out);

/* ------------------------------------------------------------------ */
/* Disease taxonomy                                                    */

typedef struct dermbench_taxonomy dermbench_taxonomy;

enum {
    DERMBENCH_VERDICT_EXACT_OR_SYNONYM = 0,
    DERMBENCH_VERDICT_SUBCLASS_MATCH = 1,
    DERMBENCH_VERDICT_ACTIONABLE_PARENT = 2,
    DERMBENCH_VERDICT_COARSE_DIRECTIONAL = 3,
    DERMBENCH_VERDICT_OVERLY_BROAD_PARENT = 4,
    DERMBENCH_VERDICT_SIBLING_CONFUSION = 5,
    DERMBENCH_VERDICT_SAFETY_CRITICAL = 6,
    DERMBENCH_VERDICT_INVALID_OR_IRRELEVANT = 7,
};

DERMBENCH_API int dermbench_taxonomy_load_file(const char* path, dermbench_taxonomy** out);
DERMBENCH_API int dermbench_taxonomy_load_json(const char* json_text, dermbench_taxonomy** out);
DERMBENCH_API void dermbench_taxonomy_destroy(dermbench_taxonomy* taxonomy);

/* Verdict of a predicted diagnosis against the reference; truth_out is 1 for
 * the four clinically-true categories. */
DERMBENCH_API int dermbench_classify(const dermbench_taxonomy* taxonomy, const char* reference,
                                     const char* prediction, int* category_out, int* truth_out);

DERMBENCH_API const char* dermbench_verdict_name(int category);

/* ------------------------------------------------------------------ */
/* Experiment runners (the CLI drives these)                           */

typedef struct {
    const char* dataset; /* spirals | xor | circles | moons */
    uint64_t n;
    double noise; /* < 0 -> dataset default */
    uint64_t k;
    uint64_t steps;
    double lr;
    uint64_t hidden;
    uint64_t seed;
    int freeze_predictor;
    uint64_t restarts;
    uint64_t grid_resolution;
} dermbench_toybench_params;

typedef struct {
    double static_accuracy;
    double fdlinear_accuracy;
    double gap;
    double field_angular_variance;
} dermbench_toybench_summary;

DERMBENCH_API void dermbench_toybench_params_init(dermbench_toybench_params* params);
DERMBENCH_API int dermbench_run_toybench(const dermbench_toybench_params* params,
                                         const char* out_dir, dermbench_toybench_summary* summary);

typedef struct {
    uint64_t steps;
    double clip_eps;
    double kl_beta;
    uint64_t group_size;
    double advantage_eps;
    double lr;
    uint64_t queries_per_step;
    uint64_t inner_epochs;
    uint64_t feature_dim;
    uint64_t label_count;
    uint64_t pool_size;
    uint64_t topk;
    uint64_t seed;
} dermbench_grpo_params;

typedef struct {
    double first_quartile_mean_reward;
    double final_quartile_mean_reward;
    double final_kl_to_init;
} dermbench_grpo_summary;

DERMBENCH_API void dermbench_grpo_params_init(dermbench_grpo_params* params);
DERMBENCH_API int dermbench_run_grpo(const dermbench_grpo_params* params, const char* out_csv,
                                     dermbench_grpo_summary* summary);

typedef struct {
    uint64_t cases;
    double top_accuracy[6];
} dermbench_eval_summary;

DERMBENCH_API int dermbench_run_eval(const char* taxonomy_path, const char* predictions_path,
                                     const char* out_csv, dermbench_eval_summary* summary);

typedef struct {
    uint64_t samples;
    uint64_t accepted;
    uint64_t escalated;
    double acceptance_rate;
} dermbench_caption_sim_summary;

/* taxonomy_path may be NULL for plain normalized-name matching. */
DERMBENCH_API int dermbench_run_caption_sim(const char* fixture_path, const char* taxonomy_path,
                                            const char* out_dir,
                                            dermbench_caption_sim_summary* summary);

/* ------------------------------------------------------------------ */
/* Property-check suite                                                */

typedef void (*dermbench_check_callback)(const char* name, int passed, const char* detail,
                                         void* user);

/* fault_injection: NULL for a normal run, or "non-hermitian-mask" to break a
 * radial mask and verify the basis-reality check trips. all_passed_out gets
 * 1 iff every check passed. */
DERMBENCH_API int dermbench_run_checks(uint64_t seed, const char* fault_injection,
                                       dermbench_check_callback callback, void* user,
                                       int* all_passed_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DERMBENCH_H */
