#include "dermbench/runners.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "dermbench/caption.hpp"
#include "dermbench/grpo.hpp"
#include "dermbench/taxonomy.hpp"
#include "dermbench/toybench.hpp"

namespace dermbench::runners {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary); // LF line endings everywhere
    if (!out) fail(ErrorCode::io, "cannot open for write: " + path.string());
    return out;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_train_report(const fs::path& path, const toybench::TrainReport& report) {
    auto out = open_out(path);
    out << "step,loss,accuracy\n";
    for (std::size_t i = 0; i < report.accuracy_curve.size(); ++i)
        out << report.loss_curve[i].first << ',' << num(report.loss_curve[i].second) << ','
            << num(report.accuracy_curve[i].second) << '\n';
}

} // namespace

ToybenchSummary run_toybench(const ToybenchParams& params, const std::string& out_dir) {
    const auto kind = toybench::dataset_kind_from_name(params.dataset);
    const double noise = params.noise < 0.0 ? toybench::default_noise(kind) : params.noise;
    const auto ds = toybench::gen_dataset(kind, params.n, noise, params.seed);

    toybench::TrainConfig cfg;
    cfg.steps = params.steps;
    cfg.lr = params.lr;
    cfg.hidden = params.hidden;
    cfg.seed = params.seed;
    cfg.freeze_predictor = params.freeze_predictor;
    cfg.restarts = params.restarts;

    const auto static_run = toybench::train_static(ds, cfg);
    const auto fdlinear_run = toybench::train_fdlinear(ds, params.k, cfg);

    fs::create_directories(out_dir);
    write_train_report(fs::path(out_dir) / "static_report.csv", static_run.report);
    write_train_report(fs::path(out_dir) / "fdlinear_report.csv", fdlinear_run.report);

    const auto bounds = toybench::default_bounds(kind);
    const auto grid =
        toybench::export_boundary_grid(fdlinear_run.model, bounds, params.grid_resolution);
    {
        auto out = open_out(fs::path(out_dir) / "boundary_grid.csv");
        out << "x,y,logit0,logit1,predicted\n";
        for (const auto& g : grid)
            out << num(g.x) << ',' << num(g.y) << ',' << num(g.logit0) << ',' << num(g.logit1)
                << ',' << g.predicted << '\n';
    }
    const auto field = toybench::export_vector_field(fdlinear_run.model, grid);
    std::vector<double> angles;
    angles.reserve(field.size());
    {
        auto out = open_out(fs::path(out_dir) / "vector_field.csv");
        out << "x,y,angle,magnitude\n";
        for (const auto& f : field) {
            out << num(f.x) << ',' << num(f.y) << ',' << num(f.angle) << ',' << num(f.magnitude)
                << '\n';
            angles.push_back(f.angle);
        }
    }

    ToybenchSummary summary;
    summary.static_accuracy = static_run.report.final_accuracy;
    summary.fdlinear_accuracy = fdlinear_run.report.final_accuracy;
    summary.gap = summary.fdlinear_accuracy - summary.static_accuracy;
    summary.field_angular_variance = toybench::angular_variance(angles);
    {
        auto out = open_out(fs::path(out_dir) / "summary.txt");
        out << "dataset=" << params.dataset << " n=" << params.n << " noise=" << num(noise)
            << " k=" << params.k << " seed=" << params.seed << '\n';
        out << "static config: " << static_run.report.config_echo << '\n';
        out << "fdlinear config: " << fdlinear_run.report.config_echo << '\n';
        out << "static_accuracy=" << num(summary.static_accuracy)
            << " fdlinear_accuracy=" << num(summary.fdlinear_accuracy)
            << " gap=" << num(summary.gap)
            << " field_angular_variance=" << num(summary.field_angular_variance) << '\n';
    }
    return summary;
}

GrpoSummary run_grpo(const GrpoParams& params, const std::string& out_csv) {
    if (params.steps < 1) fail(ErrorCode::invalid_argument, "grpo: steps must be >= 1");
    auto weights = rewards::default_position_weights();
    if (params.topk != weights.w.size()) {
        if (params.topk < 1 || params.topk > weights.w.size())
            fail(ErrorCode::invalid_argument, "grpo: topk must be in 1..6 for default weights");
        weights.w.resize(params.topk);
    }
    const auto env = grpo::make_toy_env(params.feature_dim, params.label_count, params.pool_size,
                                        weights, params.seed);
    grpo::GRPOConfig cfg;
    cfg.clip_eps = params.clip_eps;
    cfg.kl_beta = params.kl_beta;
    cfg.group_size = params.group_size;
    cfg.advantage_eps = params.advantage_eps;
    grpo::TrainOptions opts;
    opts.lr = params.lr;
    opts.queries_per_step = params.queries_per_step;
    opts.inner_epochs = params.inner_epochs;
    opts.seed = params.seed;

    const auto result = grpo::train_toy_policy(env, cfg, params.steps, opts);

    const fs::path path(out_csv);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto out = open_out(path);
    out << "step,mean_reward,mean_kl,objective\n";
    for (const auto& rec : result.records)
        out << rec.step << ',' << num(rec.mean_reward) << ',' << num(rec.mean_kl) << ','
            << num(rec.objective) << '\n';

    GrpoSummary summary;
    const std::size_t q = std::max<std::size_t>(1, result.records.size() / 4);
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
        first += result.records[i].mean_reward;
        last += result.records[result.records.size() - 1 - i].mean_reward;
    }
    summary.first_quartile_mean_reward = first / static_cast<double>(q);
    summary.final_quartile_mean_reward = last / static_cast<double>(q);
    summary.final_kl_to_init = result.final_kl_to_init;
    return summary;
}

EvalSummary run_eval(const std::string& taxonomy_path, const std::string& predictions_path,
                     const std::string& out_csv) {
    const auto tax = taxonomy::load_taxonomy_file(taxonomy_path);
    const auto records = taxonomy::load_predictions_file(predictions_path);
    const auto rows = taxonomy::evaluate(tax, records, 6);

    const fs::path path(out_csv);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto out = open_out(path);
    out << "k,accuracy";
    for (std::size_t c = 0; c < taxonomy::kVerdictCategories; ++c)
        out << ',' << taxonomy::verdict_name(static_cast<taxonomy::VerdictCategory>(c));
    out << '\n';
    EvalSummary summary;
    summary.cases = records.size();
    for (const auto& row : rows) {
        out << row.k << ',' << num(row.accuracy);
        for (const auto c : row.verdict_counts) out << ',' << c;
        out << '\n';
        if (row.k >= 1 && row.k <= 6) summary.top_accuracy[row.k - 1] = row.accuracy;
    }
    return summary;
}

CaptionSimSummary run_caption_sim(const std::string& fixture_path,
                                  const std::string& taxonomy_path, const std::string& out_dir) {
    const auto fixture = caption::load_schedule_fixture(fixture_path);
    const auto generator = caption::make_scripted_generator(fixture);
    const auto inferrer = caption::make_scripted_inferrer(fixture);
    const auto extractor = caption::default_extractor();

    caption::LabelMatcher matcher;
    std::shared_ptr<taxonomy::DiseaseTaxonomy> tax;
    if (!taxonomy_path.empty()) {
        tax = std::make_shared<taxonomy::DiseaseTaxonomy>(
            taxonomy::load_taxonomy_file(taxonomy_path));
        matcher = [tax](const std::string& truth, const std::string& inferred) {
            if (!tax->find(inferred)) return false;
            return taxonomy::classify_prediction(*tax, truth, inferred).truth;
        };
    } else {
        matcher = [](const std::string& truth, const std::string& inferred) {
            return taxonomy::normalize_name(truth) == taxonomy::normalize_name(inferred);
        };
    }

    fs::create_directories(out_dir);
    auto outcomes = open_out(fs::path(out_dir) / "outcomes.csv");
    outcomes << "sample_id,status,attempts\n";
    auto queue = open_out(fs::path(out_dir) / "escalation_queue.txt");
    auto accepted = open_out(fs::path(out_dir) / "accepted_captions.jsonl");

    CaptionSimSummary summary;
    for (const auto& sample : fixture.samples) {
        const auto outcome =
            caption::machine_annotate(sample, generator, extractor, inferrer, matcher, 5);
        ++summary.samples;
        const bool ok = outcome.status == caption::AnnotationStatus::accepted;
        outcomes << outcome.sample_id << ',' << (ok ? "accepted" : "escalated") << ','
                 << outcome.attempts << '\n';
        if (ok) {
            ++summary.accepted;
            accepted << caption::caption_to_json(*outcome.final_caption) << '\n';
        } else {
            ++summary.escalated;
            queue << outcome.sample_id << '\n';
        }
    }
    summary.acceptance_rate =
        summary.samples == 0
            ? 0.0
            : static_cast<double>(summary.accepted) / static_cast<double>(summary.samples);
    return summary;
}

} // namespace dermbench::runners
