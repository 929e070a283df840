#include "dermbench/caption.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dermbench/error.hpp"

namespace dermbench::caption {

const std::array<std::string, kFieldCount>& schema_fields() {
    static const std::array<std::string, kFieldCount> fields = {
        "color",
        "location",
        "shape",
        "lesion_type",
        "number",
        "size",
        "texture",
        "border_characteristics",
        "surface_characteristics",
        "distribution_characteristics",
        "surrounding_characteristics",
        "other",
    };
    return fields;
}

std::size_t field_index(const std::string& name) {
    const auto& fields = schema_fields();
    for (std::size_t i = 0; i < fields.size(); ++i)
        if (fields[i] == name) return i;
    fail(ErrorCode::invalid_argument, "unknown caption field '" + name + "'");
}

bool StructuredCaption::empty() const {
    return std::all_of(values.begin(), values.end(),
                       [](const std::string& v) { return v.empty(); });
}

std::string render_caption(const StructuredCaption& caption) {
    std::string out;
    for (const auto& v : caption.values) {
        if (v.empty()) continue;
        if (!out.empty()) out += ' ';
        out += v;
    }
    return out;
}

std::string caption_to_json(const StructuredCaption& caption) {
    nlohmann::ordered_json j;
    const auto& fields = schema_fields();
    for (std::size_t i = 0; i < fields.size(); ++i) j[fields[i]] = caption.values[i];
    return j.dump();
}

StructuredCaption caption_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, std::string("caption_from_json: ") + e.what());
    }
    if (!j.is_object()) fail(ErrorCode::parse, "caption_from_json: not an object");
    StructuredCaption caption;
    const auto& fields = schema_fields();
    for (const auto& [key, val] : j.items()) {
        if (!val.is_string())
            fail(ErrorCode::parse, "caption_from_json: field '" + key + "' is not a string");
        caption.field(key) = val.get<std::string>(); // throws on unknown field
    }
    (void)fields;
    return caption;
}

namespace {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        const unsigned char u = static_cast<unsigned char>(ch);
        if (std::isalnum(u) || ch == '_' || ch == '-') {
            cur += static_cast<char>(std::tolower(u));
        } else if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

} // namespace

KeywordExtractor::KeywordExtractor(std::map<std::string, std::string> keyword_to_field) {
    for (auto& [kw, field] : keyword_to_field)
        keyword_to_index_[kw] = field_index(field);
}

StructuredCaption KeywordExtractor::structure(const std::string& text) const {
    StructuredCaption caption;
    bool matched_any = false;
    const auto tokens = tokenize(text);
    for (const auto& tok : tokens) {
        const auto it = keyword_to_index_.find(tok);
        if (it == keyword_to_index_.end()) continue;
        matched_any = true;
        std::string& slot = caption.values[it->second];
        if (!slot.empty()) slot += ' ';
        slot += tok;
    }
    if (!matched_any) {
        // Nothing mapped anywhere; the whole normalized text is "other".
        std::string joined;
        for (const auto& tok : tokens) {
            if (!joined.empty()) joined += ' ';
            joined += tok;
        }
        caption.values[kFieldCount - 1] = joined;
    }
    return caption;
}

KeywordExtractor default_extractor() {
    static const std::map<std::string, std::string> dict = {
        {"red", "color"},           {"blue", "color"},
        {"brown", "color"},         {"black", "color"},
        {"white", "color"},         {"yellow", "color"},
        {"pink", "color"},          {"purple", "color"},
        {"arm", "location"},        {"leg", "location"},
        {"face", "location"},       {"trunk", "location"},
        {"scalp", "location"},      {"hand", "location"},
        {"foot", "location"},       {"back", "location"},
        {"chest", "location"},      {"neck", "location"},
        {"round", "shape"},         {"oval", "shape"},
        {"annular", "shape"},       {"linear", "shape"},
        {"irregular", "shape"},     {"macule", "lesion_type"},
        {"papule", "lesion_type"},  {"nodule", "lesion_type"},
        {"vesicle", "lesion_type"}, {"pustule", "lesion_type"},
        {"wheal", "lesion_type"},   {"plaque", "lesion_type"},
        {"ulcer", "lesion_type"},   {"crust", "lesion_type"},
        {"erosion", "lesion_type"}, {"scales", "lesion_type"},
        {"single", "number"},       {"multiple", "number"},
        {"few", "number"},          {"numerous", "number"},
        {"solitary", "number"},     {"small", "size"},
        {"large", "size"},          {"tiny", "size"},
        {"centimeter", "size"},     {"millimeter", "size"},
        {"rough", "texture"},       {"smooth", "texture"},
        {"hard", "texture"},        {"soft", "texture"},
        {"firm", "texture"},        {"sharp", "border_characteristics"},
        {"blurred", "border_characteristics"},
        {"defined", "border_characteristics"},
        {"indistinct", "border_characteristics"},
        {"crusted", "surface_characteristics"},
        {"scaly", "surface_characteristics"},
        {"shiny", "surface_characteristics"},
        {"ulcerated", "surface_characteristics"},
        {"scattered", "distribution_characteristics"},
        {"isolated", "distribution_characteristics"},
        {"dense", "distribution_characteristics"},
        {"confluent", "distribution_characteristics"},
        {"grouped", "distribution_characteristics"},
        {"clustered", "distribution_characteristics"},
        {"erythema", "surrounding_characteristics"},
        {"swelling", "surrounding_characteristics"},
        {"halo", "surrounding_characteristics"},
        {"inflamed", "surrounding_characteristics"},
    };
    return KeywordExtractor(dict);
}

StructuredCaption structure_caption(const std::string& text, const KeywordExtractor& extractor) {
    if (text.empty()) fail(ErrorCode::invalid_argument, "structure_caption: empty text");
    return extractor.structure(text);
}

std::vector<std::pair<std::string, std::size_t>> field_frequency_analysis(
    const std::vector<StructuredCaption>& captions) {
    if (captions.empty())
        fail(ErrorCode::invalid_argument, "field_frequency_analysis: empty caption list");
    const auto& fields = schema_fields();
    std::vector<std::pair<std::string, std::size_t>> counts;
    counts.reserve(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
        std::size_t c = 0;
        for (const auto& caption : captions)
            if (!caption.values[i].empty()) ++c;
        counts.emplace_back(fields[i], c);
    }
    // Descending by count; ties keep schema order (stable sort).
    std::stable_sort(counts.begin(), counts.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return counts;
}

bool validate_caption_for_stage1(const StructuredCaption& caption,
                                 const rewards::AttributeScores& scores, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 10.0))
        fail(ErrorCode::invalid_argument, "validate_caption_for_stage1: threshold outside [0,10]");
    if (caption.empty()) return false;
    const auto& fields = schema_fields();
    double sum = 0.0;
    std::size_t scored = 0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (caption.values[i].empty()) continue;
        const auto it = scores.values.find(fields[i]);
        if (it == scores.values.end()) continue;
        if (!rewards::acceptability(it->second)) return false;
        sum += it->second;
        ++scored;
    }
    if (scored == 0) return false;
    return sum / static_cast<double>(scored) >= threshold;
}

AnnotationOutcome machine_annotate(const Sample& sample, const CaptionGenerator& generator,
                                   const KeywordExtractor& extractor,
                                   const DiagnosisInferrer& inferrer, const LabelMatcher& matcher,
                                   int max_retries) {
    if (max_retries < 1)
        fail(ErrorCode::invalid_argument, "machine_annotate: max_retries must be >= 1");
    AnnotationOutcome outcome;
    outcome.sample_id = sample.id;
    for (int attempt = 1; attempt <= max_retries; ++attempt) {
        outcome.attempts = attempt;
        std::string text;
        StructuredCaption caption;
        std::string inferred;
        try {
            text = generator(sample.id, attempt);
            caption = structure_caption(text, extractor);
            inferred = inferrer(caption);
        } catch (const Error& e) {
            fail(e.code(), "machine_annotate: sample '" + sample.id + "' attempt " +
                               std::to_string(attempt) + ": " + e.what());
        }
        const bool matched = matcher(sample.truth_label, inferred);
        outcome.history.push_back({caption, inferred, matched});
        if (matched) {
            outcome.status = AnnotationStatus::accepted;
            outcome.final_caption = caption;
            return outcome;
        }
    }
    outcome.status = AnnotationStatus::escalated;
    return outcome;
}

ScheduleFixture load_schedule_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open fixture: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, path + ": " + e.what());
    }
    ScheduleFixture fixture;
    if (!doc.contains("diagnosis_rules") || !doc["diagnosis_rules"].is_array())
        fail(ErrorCode::parse, path + ": missing diagnosis_rules array");
    for (const auto& rule : doc["diagnosis_rules"]) {
        DiagnosisRule r;
        for (const auto& kw : rule.at("keywords")) r.keywords.push_back(kw.get<std::string>());
        r.diagnosis = rule.at("diagnosis").get<std::string>();
        fixture.rules.push_back(std::move(r));
    }
    if (!doc.contains("samples") || !doc["samples"].is_array())
        fail(ErrorCode::parse, path + ": missing samples array");
    for (const auto& s : doc["samples"]) {
        Sample sample{s.at("id").get<std::string>(), s.at("label").get<std::string>()};
        std::vector<std::string> texts;
        for (const auto& t : s.at("attempts")) texts.push_back(t.get<std::string>());
        if (texts.empty()) fail(ErrorCode::parse, path + ": sample without attempt texts");
        fixture.attempt_texts[sample.id] = std::move(texts);
        fixture.samples.push_back(std::move(sample));
    }
    return fixture;
}

CaptionGenerator make_scripted_generator(const ScheduleFixture& fixture) {
    auto texts = fixture.attempt_texts;
    return [texts](const std::string& sample_id, int attempt) -> std::string {
        const auto it = texts.find(sample_id);
        if (it == texts.end())
            fail(ErrorCode::invalid_argument, "scripted generator: unknown sample " + sample_id);
        const auto& list = it->second;
        const std::size_t idx =
            std::min<std::size_t>(static_cast<std::size_t>(attempt - 1), list.size() - 1);
        return list[idx];
    };
}

DiagnosisInferrer make_scripted_inferrer(const ScheduleFixture& fixture) {
    auto rules = fixture.rules;
    return [rules](const StructuredCaption& caption) -> std::string {
        const std::string text = " " + render_caption(caption) + " ";
        for (const auto& rule : rules) {
            bool all = true;
            for (const auto& kw : rule.keywords)
                if (text.find(" " + kw + " ") == std::string::npos) {
                    all = false;
                    break;
                }
            if (all) return rule.diagnosis;
        }
        return "undetermined";
    };
}

} // namespace dermbench::caption
