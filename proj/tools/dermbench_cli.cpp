// dermbench command-line workbench. Talks to the core exclusively through
// the C API in dermbench.h.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "dermbench.h"

namespace {

int fail_with(const char* what, int code) {
    std::fprintf(stderr, "error: %s (%s, code %d)\n", dermbench_last_error(), what, code);
    return 1;
}

struct CheckPrinter {
    bool verbose = true;
};

void print_check(const char* name, int passed, const char* detail, void* user) {
    const auto* printer = static_cast<const CheckPrinter*>(user);
    if (printer->verbose && detail && detail[0] != '\0')
        std::printf("%s %-22s %s\n", passed ? "PASS" : "FAIL", name, detail);
    else
        std::printf("%s %s\n", passed ? "PASS" : "FAIL", name);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dermbench: dynamic-linear-layer toy experiments, GRPO reward training, "
                 "caption annotation simulation, and taxonomy-based diagnosis evaluation"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags like --seed may follow the subcommand
    app.set_config("--config")->description("key = value file overriding flags");

    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "root seed for all randomness")->capture_default_str();

    // toybench ------------------------------------------------------------
    auto* toybench = app.add_subcommand("toybench", "train static vs FDLinear on a toy dataset");
    std::string dataset = "spirals";
    std::uint64_t tb_n = 400, tb_k = 12, tb_steps = 3000, tb_hidden = 32, tb_res = 64,
                  tb_restarts = 5;
    double tb_noise = -1.0, tb_lr = 1e-2;
    bool tb_freeze = false;
    std::string tb_out = "out/toybench";
    toybench->add_option("--dataset", dataset, "spirals|xor|circles|moons")
        ->capture_default_str();
    toybench->add_option("--n", tb_n, "sample count (even)")->capture_default_str();
    toybench->add_option("--noise", tb_noise, "gaussian noise std (<0 = dataset default)")
        ->capture_default_str();
    toybench->add_option("--k", tb_k, "basis count for FDLinear")->capture_default_str();
    toybench->add_option("--steps", tb_steps, "training steps")->capture_default_str();
    toybench->add_option("--lr", tb_lr, "learning rate")->capture_default_str();
    toybench->add_option("--hidden", tb_hidden, "predictor bottleneck width (0 = default)")
        ->capture_default_str();
    toybench->add_flag("--freeze-predictor", tb_freeze, "keep modulations fixed at 1");
    toybench->add_option("--restarts", tb_restarts, "training replicas, best kept")
        ->capture_default_str();
    toybench->add_option("--grid-resolution", tb_res, "boundary/field grid resolution")
        ->capture_default_str();
    toybench->add_option("--out", tb_out, "output directory")->capture_default_str();

    // check ----------------------------------------------------------------
    auto* check = app.add_subcommand("check", "run the property suite");
    std::string fault;
    check->add_option("--inject-fault", fault,
                      "test hook; 'non-hermitian-mask' breaks a radial mask");

    // grpo -----------------------------------------------------------------
    auto* grpo = app.add_subcommand("grpo", "train the toy diagnosis policy");
    std::uint64_t g_steps = 300, g_group = 8, g_queries = 16, g_epochs = 2;
    std::uint64_t g_features = 8, g_labels = 10, g_pool = 64, g_topk = 6;
    double g_clip = 0.2, g_beta = 0.01, g_lr = 0.05, g_adv_eps = 1e-8;
    std::string g_out = "out/grpo_learning.csv";
    grpo->add_option("--steps", g_steps, "training steps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    grpo->add_option("--clip-eps", g_clip, "surrogate clip width")->capture_default_str();
    grpo->add_option("--kl-beta", g_beta, "KL penalty weight")->capture_default_str();
    grpo->add_option("--group-size", g_group, "rollouts per query")->capture_default_str();
    grpo->add_option("--advantage-eps", g_adv_eps, "std guard")->capture_default_str();
    grpo->add_option("--lr", g_lr, "ascent step size")->capture_default_str();
    grpo->add_option("--queries-per-step", g_queries, "groups per step")->capture_default_str();
    grpo->add_option("--inner-epochs", g_epochs, "update epochs per step")->capture_default_str();
    grpo->add_option("--feature-dim", g_features, "env feature dimension")->capture_default_str();
    grpo->add_option("--labels", g_labels, "env label count")->capture_default_str();
    grpo->add_option("--pool", g_pool, "env query pool size")->capture_default_str();
    grpo->add_option("--topk", g_topk, "ranked list length")->capture_default_str();
    grpo->add_option("--out", g_out, "learning record CSV path")->capture_default_str();

    // eval -----------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "taxonomy-based top-K evaluation");
    std::string e_tax, e_pred, e_out = "out/eval_report.csv";
    eval->add_option("--taxonomy", e_tax, "taxonomy JSON file")->required();
    eval->add_option("--predictions", e_pred, "line-delimited predictions/answers")->required();
    eval->add_option("--out", e_out, "report CSV path")->capture_default_str();

    // caption-sim ------------------------------------------------------------
    auto* caption = app.add_subcommand("caption-sim", "machine-annotation pipeline on mocks");
    std::string c_fixture, c_tax, c_out = "out/caption_sim";
    caption->add_option("--fixture", c_fixture, "scripted schedule fixture JSON")->required();
    caption->add_option("--taxonomy", c_tax, "taxonomy for label matching (optional)");
    caption->add_option("--out", c_out, "output directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (toybench->parsed()) {
        dermbench_toybench_params params;
        dermbench_toybench_params_init(&params);
        params.dataset = dataset.c_str();
        params.n = tb_n;
        params.noise = tb_noise;
        params.k = tb_k;
        params.steps = tb_steps;
        params.lr = tb_lr;
        params.hidden = tb_hidden;
        params.seed = seed;
        params.freeze_predictor = tb_freeze ? 1 : 0;
        params.restarts = tb_restarts;
        params.grid_resolution = tb_res;
        dermbench_toybench_summary summary;
        if (int rc = dermbench_run_toybench(&params, tb_out.c_str(), &summary))
            return fail_with("toybench", rc);
        std::printf("dataset=%s k=%" PRIu64 " seed=%" PRIu64
                    " static_accuracy=%.4f fdlinear_accuracy=%.4f gap=%.4f\n",
                    dataset.c_str(), tb_k, seed, summary.static_accuracy,
                    summary.fdlinear_accuracy, summary.gap);
        return 0;
    }

    if (check->parsed()) {
        CheckPrinter printer;
        int all_passed = 0;
        if (int rc = dermbench_run_checks(seed, fault.empty() ? nullptr : fault.c_str(),
                                          print_check, &printer, &all_passed))
            return fail_with("check", rc);
        std::printf("%s\n", all_passed ? "ALL CHECKS PASSED" : "CHECK FAILURES PRESENT");
        return all_passed ? 0 : 1;
    }

    if (grpo->parsed()) {
        dermbench_grpo_params params;
        dermbench_grpo_params_init(&params);
        params.steps = g_steps;
        params.clip_eps = g_clip;
        params.kl_beta = g_beta;
        params.group_size = g_group;
        params.advantage_eps = g_adv_eps;
        params.lr = g_lr;
        params.queries_per_step = g_queries;
        params.inner_epochs = g_epochs;
        params.feature_dim = g_features;
        params.label_count = g_labels;
        params.pool_size = g_pool;
        params.topk = g_topk;
        params.seed = seed;
        dermbench_grpo_summary summary;
        if (int rc = dermbench_run_grpo(&params, g_out.c_str(), &summary))
            return fail_with("grpo", rc);
        std::printf("first_quartile_mean_reward=%.4f final_quartile_mean_reward=%.4f "
                    "reward_gain=%.4f final_kl_to_init=%.6f\n",
                    summary.first_quartile_mean_reward, summary.final_quartile_mean_reward,
                    summary.final_quartile_mean_reward - summary.first_quartile_mean_reward,
                    summary.final_kl_to_init);
        return 0;
    }

    if (eval->parsed()) {
        dermbench_eval_summary summary;
        if (int rc = dermbench_run_eval(e_tax.c_str(), e_pred.c_str(), e_out.c_str(), &summary))
            return fail_with("eval", rc);
        std::printf("cases=%" PRIu64, summary.cases);
        for (int k = 0; k < 6; ++k) std::printf(" top%d=%.4f", k + 1, summary.top_accuracy[k]);
        std::printf("\n");
        return 0;
    }

    if (caption->parsed()) {
        dermbench_caption_sim_summary summary;
        if (int rc = dermbench_run_caption_sim(c_fixture.c_str(),
                                               c_tax.empty() ? nullptr : c_tax.c_str(),
                                               c_out.c_str(), &summary))
            return fail_with("caption-sim", rc);
        std::printf("samples=%" PRIu64 " accepted=%" PRIu64 " escalated=%" PRIu64
                    " acceptance_rate=%.4f\n",
                    summary.samples, summary.accepted, summary.escalated,
                    summary.acceptance_rate);
        return 0;
    }

    return 0;
}
