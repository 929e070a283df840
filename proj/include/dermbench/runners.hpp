#ifndef DERMBENCH_RUNNERS_HPP
#define DERMBENCH_RUNNERS_HPP

#include <cstdint>
#include <string>

namespace dermbench::runners {

// End-to-end experiment drivers behind the CLI subcommands. All outputs are
// plain CSV/JSONL/text and byte-identical across reruns with the same inputs.

struct ToybenchParams {
    std::string dataset = "spirals";
    std::size_t n = 400;
    double noise = -1.0; // < 0 -> dataset default (spirals 0.05, others 0.1)
    std::size_t k = 12;
    std::size_t steps = 3000;
    double lr = 1e-2;
    std::size_t hidden = 32;
    std::uint64_t seed = 0;
    bool freeze_predictor = false;
    std::size_t restarts = 5;
    std::size_t grid_resolution = 64;
};

struct ToybenchSummary {
    double static_accuracy = 0.0;
    double fdlinear_accuracy = 0.0;
    double gap = 0.0;
    double field_angular_variance = 0.0;
};

// Writes static_report.csv, fdlinear_report.csv, boundary_grid.csv,
// vector_field.csv and summary.txt under out_dir.
ToybenchSummary run_toybench(const ToybenchParams& params, const std::string& out_dir);

struct GrpoParams {
    std::size_t steps = 300;
    double clip_eps = 0.2;
    double kl_beta = 0.01;
    std::size_t group_size = 8;
    double advantage_eps = 1e-8;
    double lr = 0.05;
    std::size_t queries_per_step = 16;
    std::size_t inner_epochs = 2;
    std::size_t feature_dim = 8;
    std::size_t label_count = 10;
    std::size_t pool_size = 64;
    std::size_t topk = 6;
    std::uint64_t seed = 0;
};

struct GrpoSummary {
    double first_quartile_mean_reward = 0.0;
    double final_quartile_mean_reward = 0.0;
    double final_kl_to_init = 0.0;
};

// Writes the learning record (step,mean_reward,mean_kl,objective) to out_csv.
GrpoSummary run_grpo(const GrpoParams& params, const std::string& out_csv);

struct EvalSummary {
    std::size_t cases = 0;
    double top_accuracy[6] = {0, 0, 0, 0, 0, 0};
};

// Classifies a predictions file against a taxonomy and writes the
// k,accuracy,<verdict counts> report to out_csv.
EvalSummary run_eval(const std::string& taxonomy_path, const std::string& predictions_path,
                     const std::string& out_csv);

struct CaptionSimSummary {
    std::size_t samples = 0;
    std::size_t accepted = 0;
    std::size_t escalated = 0;
    double acceptance_rate = 0.0;
};

// Runs machine annotation over a scripted-mock fixture. When taxonomy_path is
// non-empty the step-3 comparison uses taxonomy verdicts (true categories
// count as consistent); otherwise normalized exact match. Writes
// outcomes.csv, escalation_queue.txt and accepted_captions.jsonl.
CaptionSimSummary run_caption_sim(const std::string& fixture_path,
                                  const std::string& taxonomy_path, const std::string& out_dir);

} // namespace dermbench::runners

#endif
