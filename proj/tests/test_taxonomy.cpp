#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "dermbench/rewards.hpp"
#include "dermbench/rng.hpp"
#include "dermbench/taxonomy.hpp"
#include "dermbench/error.hpp"

using namespace dermbench;
using namespace dermbench::taxonomy;

namespace {

const std::string kFixtureDir = DERMBENCH_FIXTURE_DIR;

const DiseaseTaxonomy& fixture_taxonomy() {
    static const DiseaseTaxonomy tax = load_taxonomy_file(kFixtureDir + "/taxonomy.json");
    return tax;
}

} // namespace

TEST_CASE("loading validates structure: parent/child, cycles, duplicates, unknown keys") {
    const auto two = load_taxonomy(R"({"nodes":[
        {"id":"parent","canonical":"Parent","synonyms":[],"parents":[],
         "malignant":false,"infectious":false,"actionable_as_parent":true,"coarse_directional_ok":false},
        {"id":"child","canonical":"Child","synonyms":[],"parents":["parent"],
         "malignant":false,"infectious":false,"actionable_as_parent":false,"coarse_directional_ok":false}]})");
    CHECK(two.size() == 2);
    CHECK(two.is_ancestor("parent", "child"));
    CHECK_FALSE(two.is_ancestor("child", "parent"));

    // Self-parent cycle.
    CHECK_THROWS_WITH_AS(load_taxonomy(R"({"nodes":[
        {"id":"a","canonical":"A","synonyms":[],"parents":["a"],
         "malignant":false,"infectious":false,"actionable_as_parent":false,"coarse_directional_ok":false}]})"),
                         doctest::Contains("cycle"), Error);

    // Duplicate synonym across nodes names both of them.
    CHECK_THROWS_WITH_AS(load_taxonomy(R"({"nodes":[
        {"id":"hz","canonical":"Herpes zoster","synonyms":["Shingles"],"parents":[],
         "malignant":false,"infectious":true,"actionable_as_parent":false,"coarse_directional_ok":false},
        {"id":"other","canonical":"Other","synonyms":["Shingles"],"parents":[],
         "malignant":false,"infectious":false,"actionable_as_parent":false,"coarse_directional_ok":false}]})"),
                         doctest::Contains("Shingles"), Error);

    CHECK_THROWS_AS(load_taxonomy(R"({"nodes":[
        {"id":"x","canonical":"X","synonyms":[],"parents":[],"sneaky":1,
         "malignant":false,"infectious":false,"actionable_as_parent":false,"coarse_directional_ok":false}]})"),
                    Error);
    CHECK_THROWS_AS(load_taxonomy("not json at all"), Error);
}

TEST_CASE("name resolution is case-insensitive and whitespace-normalized") {
    const auto& tax = fixture_taxonomy();
    CHECK(tax.find("herpes zoster") != nullptr);
    CHECK(tax.find("  HERPES   ZOSTER  ") != nullptr);
    CHECK(tax.find("shingles")->id == "herpes_zoster");
    CHECK(tax.find("no such thing") == nullptr);
}

TEST_CASE("verdict truth follows the four-true/four-false split") {
    CHECK(verdict_truth(VerdictCategory::exact_or_synonym));
    CHECK(verdict_truth(VerdictCategory::subclass_match));
    CHECK(verdict_truth(VerdictCategory::actionable_parent));
    CHECK(verdict_truth(VerdictCategory::coarse_directional));
    CHECK_FALSE(verdict_truth(VerdictCategory::overly_broad_parent));
    CHECK_FALSE(verdict_truth(VerdictCategory::sibling_confusion));
    CHECK_FALSE(verdict_truth(VerdictCategory::safety_critical));
    CHECK_FALSE(verdict_truth(VerdictCategory::invalid_or_irrelevant));
}

TEST_CASE("paper-anchored verdicts: synonym, subclass, safety, overly broad") {
    const auto& tax = fixture_taxonomy();

    const auto synonym = classify_prediction(tax, "Herpes zoster", "Shingles");
    CHECK(synonym.category == VerdictCategory::exact_or_synonym);
    CHECK(synonym.truth);

    const auto subclass = classify_prediction(tax, "Eczema", "Atopic dermatitis");
    CHECK(subclass.category == VerdictCategory::subclass_match);
    CHECK(subclass.truth);

    const auto safety = classify_prediction(tax, "Benign nevus", "Melanoma");
    CHECK(safety.category == VerdictCategory::safety_critical);
    CHECK_FALSE(safety.truth);

    const auto broad = classify_prediction(tax, "Psoriasis", "Dermatitis");
    CHECK(broad.category == VerdictCategory::overly_broad_parent);
    CHECK_FALSE(broad.truth);
}

TEST_CASE("full precedence walk on the fixture") {
    const auto& tax = fixture_taxonomy();
    auto category = [&](const char* ref, const char* pred) {
        return classify_prediction(tax, ref, pred).category;
    };
    CHECK(category("Melanoma", "gibberish") == VerdictCategory::invalid_or_irrelevant);
    CHECK(category("Melanoma", "") == VerdictCategory::invalid_or_irrelevant);
    CHECK(category("Atopic dermatitis", "Eczema") == VerdictCategory::actionable_parent);
    CHECK(category("Herpes zoster", "Viral skin infection") == VerdictCategory::coarse_directional);
    CHECK(category("Herpes zoster", "Herpes simplex") == VerdictCategory::sibling_confusion);
    CHECK(category("Acne", "Urticaria") == VerdictCategory::sibling_confusion);
    // Multi-parent descent: melanoma sits under both skin cancer and
    // melanocytic lesion, so it is a subclass of either.
    CHECK(category("Skin cancer", "Melanoma") == VerdictCategory::subclass_match);
    CHECK(category("Melanocytic lesion", "Melanoma") == VerdictCategory::subclass_match);
    // But as a *parent* prediction for melanoma, the benign melanocytic
    // lesion trips the malignancy boundary before the ancestor branch.
    CHECK(category("Melanoma", "Melanocytic lesion") == VerdictCategory::safety_critical);
    // Cross-branch infectious mismatch.
    CHECK(category("Psoriasis", "Tinea corporis") == VerdictCategory::safety_critical);
    // Unrelated same-flag nodes are invalid, not siblings.
    CHECK(category("Urticaria", "Eczema") == VerdictCategory::invalid_or_irrelevant);

    CHECK_THROWS_AS(classify_prediction(tax, "not a disease", "Melanoma"), Error);
}

TEST_CASE("safety precedence holds for every non-exact/subclass flag mismatch") {
    const auto& tax = fixture_taxonomy();
    const std::vector<std::string> names = {
        "Skin disease", "Dermatitis", "Eczema", "Atopic dermatitis", "Contact dermatitis",
        "Psoriasis", "Plaque psoriasis", "Guttate psoriasis", "Infectious skin disease",
        "Viral skin infection", "Herpes zoster", "Herpes simplex", "Fungal skin infection",
        "Tinea corporis", "Skin cancer", "Melanocytic lesion", "Melanoma",
        "Basal cell carcinoma", "Benign nevus", "Acne", "Urticaria"};
    for (const auto& ref : names) {
        for (const auto& pred : names) {
            const auto* rn = tax.find(ref);
            const auto* pn = tax.find(pred);
            const bool flags_differ =
                rn->malignant != pn->malignant || rn->infectious != pn->infectious;
            const auto verdict = classify_prediction(tax, ref, pred);
            if (flags_differ && verdict.category != VerdictCategory::exact_or_synonym &&
                verdict.category != VerdictCategory::subclass_match)
                CHECK(verdict.category == VerdictCategory::safety_critical);
            // Determinism: bit-exact repeat.
            const auto again = classify_prediction(tax, ref, pred);
            CHECK(verdict.category == again.category);
            CHECK(verdict.truth == again.truth);
        }
    }
}

TEST_CASE("correctness vector feeds topk_reward as specified") {
    const auto& tax = fixture_taxonomy();
    CaseRecord record;
    record.case_id = "x";
    record.reference = "Herpes zoster";
    record.predictions = {{"Herpes simplex", 0.5, {}, ""}, {"Shingles", 0.4, {}, ""}};
    const auto l = correctness_vector(tax, record, 6);
    CHECK(l == std::vector<int>{0, 1, 0, 0, 0, 0});
    CHECK(rewards::topk_reward(l, rewards::default_position_weights()) == 0.8);

    CaseRecord empty;
    empty.case_id = "y";
    empty.reference = "Acne";
    CHECK(correctness_vector(tax, empty, 4) == std::vector<int>{0, 0, 0, 0});

    CaseRecord exact;
    exact.case_id = "z";
    exact.reference = "Acne";
    exact.predictions = {{"Acne", 0.9, {}, ""}, {"Acne vulgaris", 0.8, {}, ""}};
    const auto all = correctness_vector(tax, exact, 2);
    CHECK(all == std::vector<int>{1, 1});
}

TEST_CASE("topk accuracy is non-decreasing in k") {
    const auto& tax = fixture_taxonomy();
    const auto records = load_predictions_file(kFixtureDir + "/cases20.jsonl");
    Rng rng(91);
    double prev = 0.0;
    for (std::size_t k = 1; k <= 6; ++k) {
        const double acc = topk_accuracy(tax, records, k);
        CHECK(acc >= prev);
        prev = acc;
    }
    // Also on random sub-samples of the fixture.
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<CaseRecord> sample;
        for (const auto& r : records)
            if (rng.below(2)) sample.push_back(r);
        if (sample.empty()) continue;
        double p = 0.0;
        for (std::size_t k = 1; k <= 6; ++k) {
            const double acc = topk_accuracy(tax, sample, k);
            CHECK(acc >= p);
            p = acc;
        }
    }
}

TEST_CASE("the 20-case fixture reproduces the hand-scored accuracies exactly") {
    const auto& tax = fixture_taxonomy();
    const auto records = load_predictions_file(kFixtureDir + "/cases20.jsonl");
    REQUIRE(records.size() == 20);
    const auto rows = evaluate(tax, records, 6);
    const double expected_acc[6] = {0.50, 0.70, 0.80, 0.80, 0.80, 0.80};
    const std::size_t expected_counts[6][8] = {
        {4, 2, 2, 2, 3, 3, 3, 1}, {6, 5, 2, 2, 6, 7, 3, 2}, {8, 5, 2, 2, 6, 7, 3, 2},
        {8, 5, 2, 2, 6, 7, 3, 2}, {8, 5, 2, 2, 6, 7, 3, 2}, {8, 5, 2, 2, 6, 7, 3, 2}};
    for (std::size_t k = 0; k < 6; ++k) {
        CHECK(rows[k].accuracy == expected_acc[k]);
        for (std::size_t c = 0; c < kVerdictCategories; ++c)
            CHECK(rows[k].verdict_counts[c] == expected_counts[k][c]);
    }
}

TEST_CASE("answer parsing pulls the ranked list out of the tags") {
    const std::string good = R"(<think>narrowing down</think><answer>{"top3_diseases":[
        {"disease":"Melanoma","probability":0.8,"key_matching_fields":["color"],"brief_reason":"pigmented"},
        {"disease":"Benign nevus","probability":0.15},
        {"disease":"Basal cell carcinoma","probability":0.05}
    ]}</answer>)";
    const auto preds = parse_diagnosis_answer(good);
    REQUIRE(preds.size() == 3);
    CHECK(preds[0].disease == "Melanoma");
    CHECK(preds[0].probability == 0.8);
    CHECK(preds[0].key_matching_fields == std::vector<std::string>{"color"});
    CHECK(preds[1].disease == "Benign nevus");
    CHECK(preds[2].disease == "Basal cell carcinoma");

    // Comments in the payload (as in the prompt template) are tolerated.
    CHECK_NOTHROW(parse_diagnosis_answer(
        R"(<answer>{"top1_diseases":[{"disease":"Acne","probability":0.9 // Between 0 and 1
        }]}</answer>)"));

    CHECK_THROWS_AS(parse_diagnosis_answer("<think>only thinking</think>"), Error);
    CHECK_THROWS_AS(parse_diagnosis_answer("<answer>{\"top1_diseases\":["), Error);
    CHECK_THROWS_AS(parse_diagnosis_answer(
                        R"(<answer>{"top1_diseases":[{"disease":"Acne","probability":1.3}]}</answer>)"),
                    Error);
    CHECK_THROWS_AS(parse_diagnosis_answer(R"(<answer>{"diseases":[]}</answer>)"), Error);
}

TEST_CASE("raw-answer records load through the same path as parsed predictions") {
    const auto records = load_predictions_file(kFixtureDir + "/raw_answers.jsonl");
    REQUIRE(records.size() == 3);
    CHECK(records[0].case_id == "c01");
    CHECK(records[0].predictions.size() == 1);
    CHECK(records[0].predictions[0].disease == "Shingles");
    CHECK(records[1].predictions.size() == 2);

    const auto& tax = fixture_taxonomy();
    CHECK(topk_accuracy(tax, records, 1) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("malformed prediction lines report their line number") {
    const std::string path = kFixtureDir + "/bad_line.jsonl";
    {
        std::ofstream out(path);
        out << R"({"case_id":"a","reference":"Acne","predictions":[{"disease":"Acne","probability":0.5}]})"
            << "\n";
        out << "{ this is not json\n";
    }
    try {
        load_predictions_file(path);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    std::remove(path.c_str());
}
