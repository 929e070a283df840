// Exercises the shared-library surface the way an external consumer would:
// only dermbench.h, opaque handles, and error codes.
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "dermbench.h"

namespace {

const std::string kFixtureDir = DERMBENCH_FIXTURE_DIR;

struct CheckTally {
    int total = 0;
    int failed = 0;
    std::vector<std::string> names;
};

void tally(const char* name, int passed, const char*, void* user) {
    auto* t = static_cast<CheckTally*>(user);
    ++t->total;
    if (!passed) ++t->failed;
    t->names.emplace_back(name);
}

} // namespace

TEST_CASE("layer lifecycle: create, forward, save, load, destroy") {
    dermbench_layer* layer = nullptr;
    REQUIRE(dermbench_layer_create(2, 2, 12, "auto", 4, "identity", 7, &layer) == DERMBENCH_OK);
    REQUIRE(layer != nullptr);

    const double x[2] = {0.5, -1.0};
    double y[2] = {0, 0};
    CHECK(dermbench_layer_forward(layer, x, 2, x, 2, y, 2) == DERMBENCH_OK);
    CHECK(std::isfinite(y[0]));

    // Zero input maps to zero output.
    const double zero[2] = {0.0, 0.0};
    double yz[2] = {1, 1};
    CHECK(dermbench_layer_forward(layer, zero, 2, x, 2, yz, 2) == DERMBENCH_OK);
    CHECK(yz[0] == 0.0);
    CHECK(yz[1] == 0.0);

    double predictor_ratio = 0.0, bank_ratio = 0.0;
    CHECK(dermbench_layer_overhead(layer, &predictor_ratio, &bank_ratio) == DERMBENCH_OK);
    CHECK(predictor_ratio > 0.0);
    CHECK(bank_ratio == 11.0); // free-spatial fallback at d=2, k=12

    const std::string path = (std::filesystem::temp_directory_path() / "capi_layer.txt").string();
    CHECK(dermbench_layer_save(layer, path.c_str()) == DERMBENCH_OK);
    dermbench_layer* loaded = nullptr;
    CHECK(dermbench_layer_load(path.c_str(), &loaded) == DERMBENCH_OK);
    double y2[2] = {0, 0};
    CHECK(dermbench_layer_forward(loaded, x, 2, x, 2, y2, 2) == DERMBENCH_OK);
    CHECK(y2[0] == y[0]);
    CHECK(y2[1] == y[1]);

    dermbench_layer_destroy(layer);
    dermbench_layer_destroy(loaded);
    std::remove(path.c_str());
}

TEST_CASE("error codes carry typed failures and messages") {
    dermbench_layer* layer = nullptr;
    CHECK(dermbench_layer_create(0, 2, 1, "auto", 4, "identity", 0, &layer) ==
          DERMBENCH_ERR_INVALID_ARGUMENT);
    CHECK(dermbench_layer_create(2, 2, 1, "nonsense", 4, "identity", 0, &layer) ==
          DERMBENCH_ERR_INVALID_ARGUMENT);
    CHECK(std::string(dermbench_last_error()).find("bank_mode") != std::string::npos);

    // d=2 supports only 3 frequency-disjoint groups.
    CHECK(dermbench_layer_create(2, 2, 12, "frequency-disjoint", 4, "identity", 0, &layer) ==
          DERMBENCH_ERR_CAPACITY);

    dermbench_layer* ok = nullptr;
    REQUIRE(dermbench_layer_create(2, 2, 2, "auto", 4, "identity", 0, &ok) == DERMBENCH_OK);
    const double x[3] = {1.0, 2.0, 3.0};
    double y[2];
    CHECK(dermbench_layer_forward(ok, x, 3, x, 3, y, 2) == DERMBENCH_ERR_DIMENSION);
    dermbench_layer_destroy(ok);

    CHECK(dermbench_layer_load("/no/such/checkpoint", &layer) == DERMBENCH_ERR_IO);
}

TEST_CASE("scalar helpers: advantages, rewards, cover, pearson") {
    const double rewards[3] = {1.0, 2.0, 3.0};
    double adv[3];
    REQUIRE(dermbench_group_advantages(rewards, 3, 1e-8, adv) == DERMBENCH_OK);
    CHECK(std::abs(adv[0] + 1.2247) < 1e-4);
    CHECK(std::abs(adv[2] - 1.2247) < 1e-4);

    const int32_t correctness[6] = {0, 1, 0, 0, 0, 0};
    const double weights[6] = {1.0, 0.8, 0.6, 0.5, 0.4, 0.3};
    double reward = 0.0;
    REQUIRE(dermbench_topk_reward(correctness, weights, 6, &reward) == DERMBENCH_OK);
    CHECK(reward == 0.8);

    const char* score_fields[2] = {"color", "shape"};
    const double scores[2] = {8.0, 4.0};
    const char* weight_fields[2] = {"color", "shape"};
    const double wvals[2] = {0.5, 0.5};
    double caption = 0.0;
    REQUIRE(dermbench_caption_reward(score_fields, scores, 2, weight_fields, wvals, 2,
                                     &caption) == DERMBENCH_OK);
    CHECK(caption == doctest::Approx(6.0));

    int acceptable = 0;
    REQUIRE(dermbench_acceptability(6.0, &acceptable) == DERMBENCH_OK);
    CHECK(acceptable == 1);
    CHECK(dermbench_acceptability(11.0, &acceptable) == DERMBENCH_ERR_INVALID_ARGUMENT);

    double fraction = 0.0;
    REQUIRE(dermbench_cover_fraction(4, 2, &fraction) == DERMBENCH_OK);
    CHECK(fraction == doctest::Approx(0.5));
    REQUIRE(dermbench_cover_fraction(3, 2, &fraction) == DERMBENCH_OK);
    CHECK(fraction == 1.0);

    const double xs[5] = {6.162, 6.688, 5.924, 6.912, 7.186};
    const double ys[5] = {13.79, 23.00, 24.14, 26.44, 27.59};
    double r = 0.0;
    REQUIRE(dermbench_pearson(xs, ys, 5, &r) == DERMBENCH_OK);
    CHECK(std::abs(r - 0.61564988001423104) < 1e-9);
}

TEST_CASE("taxonomy handles classify through the C surface") {
    dermbench_taxonomy* tax = nullptr;
    REQUIRE(dermbench_taxonomy_load_file((kFixtureDir + "/taxonomy.json").c_str(), &tax) ==
            DERMBENCH_OK);
    int category = -1, truth = -1;
    REQUIRE(dermbench_classify(tax, "Herpes zoster", "Shingles", &category, &truth) ==
            DERMBENCH_OK);
    CHECK(category == DERMBENCH_VERDICT_EXACT_OR_SYNONYM);
    CHECK(truth == 1);
    REQUIRE(dermbench_classify(tax, "Benign nevus", "Melanoma", &category, &truth) ==
            DERMBENCH_OK);
    CHECK(category == DERMBENCH_VERDICT_SAFETY_CRITICAL);
    CHECK(truth == 0);
    CHECK(std::string(dermbench_verdict_name(category)) == "safety_critical");

    CHECK(dermbench_classify(tax, "unknown reference", "Melanoma", &category, &truth) ==
          DERMBENCH_ERR_INVALID_ARGUMENT);
    dermbench_taxonomy_destroy(tax);

    CHECK(dermbench_taxonomy_load_json("{\"nodes\": \"wrong\"}", &tax) == DERMBENCH_ERR_PARSE);
}

TEST_CASE("eval runner writes the fixture report with exact accuracies") {
    const auto out_dir = std::filesystem::temp_directory_path() / "capi_eval";
    std::filesystem::create_directories(out_dir);
    const std::string out_csv = (out_dir / "report.csv").string();
    dermbench_eval_summary summary;
    REQUIRE(dermbench_run_eval((kFixtureDir + "/taxonomy.json").c_str(),
                               (kFixtureDir + "/cases20.jsonl").c_str(), out_csv.c_str(),
                               &summary) == DERMBENCH_OK);
    CHECK(summary.cases == 20);
    CHECK(summary.top_accuracy[0] == 0.50);
    CHECK(summary.top_accuracy[1] == 0.70);
    CHECK(summary.top_accuracy[2] == 0.80);
    CHECK(summary.top_accuracy[5] == 0.80);
    CHECK(std::filesystem::exists(out_csv));
    std::filesystem::remove_all(out_dir);
}

TEST_CASE("caption-sim runner reproduces the scripted acceptance rate") {
    const auto out_dir = std::filesystem::temp_directory_path() / "capi_caption";
    dermbench_caption_sim_summary summary;
    REQUIRE(dermbench_run_caption_sim((kFixtureDir + "/caption_schedule.json").c_str(),
                                      (kFixtureDir + "/taxonomy.json").c_str(),
                                      out_dir.string().c_str(), &summary) == DERMBENCH_OK);
    CHECK(summary.samples == 20);
    CHECK(summary.accepted == 16);
    CHECK(summary.acceptance_rate == 0.8);
    CHECK(std::filesystem::exists(out_dir / "outcomes.csv"));
    CHECK(std::filesystem::exists(out_dir / "escalation_queue.txt"));
    std::filesystem::remove_all(out_dir);

    CHECK(dermbench_run_caption_sim("/no/such/fixture.json", nullptr, out_dir.string().c_str(),
                                    &summary) == DERMBENCH_ERR_IO);
}

TEST_CASE("check suite runs green and the fault injection trips it") {
    CheckTally clean;
    int all_passed = 0;
    REQUIRE(dermbench_run_checks(0, nullptr, tally, &clean, &all_passed) == DERMBENCH_OK);
    CHECK(all_passed == 1);
    CHECK(clean.failed == 0);
    CHECK(clean.total >= 9);

    CheckTally faulty;
    int all_passed_faulty = 1;
    REQUIRE(dermbench_run_checks(0, "non-hermitian-mask", tally, &faulty, &all_passed_faulty) ==
            DERMBENCH_OK);
    CHECK(all_passed_faulty == 0);
    CHECK(faulty.failed >= 1);
    CHECK(faulty.names == clean.names); // stable check list

    int unused = 0;
    CHECK(dermbench_run_checks(0, "bogus-fault", tally, &faulty, &unused) ==
          DERMBENCH_ERR_INVALID_ARGUMENT);
}
