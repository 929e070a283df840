#ifndef DERMBENCH_CAPTION_HPP
#define DERMBENCH_CAPTION_HPP

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dermbench/rewards.hpp"

namespace dermbench::caption {

inline constexpr std::size_t kFieldCount = 12;

// Fixed caption schema, in canonical order. "other" is last and only holds
// content when nothing else matched.
const std::array<std::string, kFieldCount>& schema_fields();
std::size_t field_index(const std::string& name); // throws on unknown field

struct StructuredCaption {
    std::array<std::string, kFieldCount> values; // parallel to schema_fields()

    const std::string& field(const std::string& name) const { return values[field_index(name)]; }
    std::string& field(const std::string& name) { return values[field_index(name)]; }
    bool empty() const;
    bool operator==(const StructuredCaption&) const = default;
};

// Canonical flat rendering: non-empty field values joined by single spaces in
// schema order. structure_caption of this text reproduces the caption.
std::string render_caption(const StructuredCaption& caption);

std::string caption_to_json(const StructuredCaption& caption);
StructuredCaption caption_from_json(const std::string& json_text);

// Keyword -> field dictionary; tokens are lowercased with punctuation
// stripped before lookup.
class KeywordExtractor {
public:
    KeywordExtractor() = default;
    explicit KeywordExtractor(std::map<std::string, std::string> keyword_to_field);

    // Matched tokens append to their field; when nothing at all matches the
    // whole normalized text lands in "other".
    StructuredCaption structure(const std::string& text) const;

private:
    std::map<std::string, std::size_t> keyword_to_index_;
};

KeywordExtractor default_extractor(); // the mock dermatology dictionary

StructuredCaption structure_caption(const std::string& text, const KeywordExtractor& extractor);

std::vector<std::pair<std::string, std::size_t>> field_frequency_analysis(
    const std::vector<StructuredCaption>& captions);

// True iff every scored non-empty field clears the acceptability threshold
// (>= 6) and the uniform mean of those scores reaches `threshold`.
bool validate_caption_for_stage1(const StructuredCaption& caption,
                                 const rewards::AttributeScores& scores, double threshold);

using CaptionGenerator = std::function<std::string(const std::string& sample_id, int attempt)>;
using DiagnosisInferrer = std::function<std::string(const StructuredCaption& caption)>;
using LabelMatcher = std::function<bool(const std::string& truth, const std::string& inferred)>;

struct Sample {
    std::string id;
    std::string truth_label;
};

enum class AnnotationStatus { accepted, escalated };

struct HistoryEntry {
    StructuredCaption caption;
    std::string inferred;
    bool matched = false;
};

struct AnnotationOutcome {
    std::string sample_id;
    std::optional<StructuredCaption> final_caption;
    AnnotationStatus status = AnnotationStatus::escalated;
    int attempts = 0;
    std::vector<HistoryEntry> history;
};

// generate -> structure -> infer -> match, retrying up to max_retries and
// escalating to the human queue when no attempt matches.
AnnotationOutcome machine_annotate(const Sample& sample, const CaptionGenerator& generator,
                                   const KeywordExtractor& extractor,
                                   const DiagnosisInferrer& inferrer, const LabelMatcher& matcher,
                                   int max_retries = 5);

// Scripted mock schedule: per sample, the caption text emitted at each
// attempt, plus dictionary rules mapping caption keywords to a diagnosis.
struct DiagnosisRule {
    std::vector<std::string> keywords; // all must appear in the rendered caption
    std::string diagnosis;
};

struct ScheduleFixture {
    std::vector<DiagnosisRule> rules;
    std::vector<Sample> samples;
    std::map<std::string, std::vector<std::string>> attempt_texts; // sample id -> texts
};

ScheduleFixture load_schedule_fixture(const std::string& path);
CaptionGenerator make_scripted_generator(const ScheduleFixture& fixture);
DiagnosisInferrer make_scripted_inferrer(const ScheduleFixture& fixture);

} // namespace dermbench::caption

#endif
