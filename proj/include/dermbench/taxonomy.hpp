#ifndef DERMBENCH_TAXONOMY_HPP
#define DERMBENCH_TAXONOMY_HPP

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace dermbench::taxonomy {

enum class VerdictCategory {
    exact_or_synonym = 0,
    subclass_match = 1,
    actionable_parent = 2,
    coarse_directional = 3,
    overly_broad_parent = 4,
    sibling_confusion = 5,
    safety_critical = 6,
    invalid_or_irrelevant = 7,
};

inline constexpr std::size_t kVerdictCategories = 8;

// The first four categories are the clinically-true ones.
bool verdict_truth(VerdictCategory category);
const char* verdict_name(VerdictCategory category); // snake_case, stable

struct Verdict {
    VerdictCategory category = VerdictCategory::invalid_or_irrelevant;
    bool truth = false;
};

struct DiseaseNode {
    std::string id;
    std::string canonical;
    std::vector<std::string> synonyms;
    std::vector<std::string> parents; // node ids; DAG, multiple parents allowed
    bool malignant = false;
    bool infectious = false;
    bool actionable_as_parent = false;
    bool coarse_directional_ok = false;
};

// Immutable after load; name resolution is case-insensitive and
// whitespace-normalized, and every name/synonym maps to exactly one node.
class DiseaseTaxonomy {
public:
    static DiseaseTaxonomy from_nodes(std::vector<DiseaseNode> nodes);

    const DiseaseNode* find(const std::string& name) const; // nullptr if unresolvable
    const DiseaseNode& node_by_id(const std::string& id) const;
    bool is_ancestor(const std::string& ancestor_id, const std::string& node_id) const;
    bool shares_parent(const std::string& a_id, const std::string& b_id) const;
    std::size_t size() const { return nodes_.size(); }

private:
    std::vector<DiseaseNode> nodes_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unordered_map<std::string, std::size_t> name_index_; // normalized name -> node
    std::vector<std::unordered_set<std::size_t>> ancestors_;  // transitive, per node

    void build_indices();
};

std::string normalize_name(const std::string& name);

// JSON document: {"nodes": [{id, canonical, synonyms, parents, malignant,
// infectious, actionable_as_parent, coarse_directional_ok}, ...]}.
// Unknown keys, cycles, and duplicate names are rejected with messages that
// name the offender.
DiseaseTaxonomy load_taxonomy(const std::string& json_text);
DiseaseTaxonomy load_taxonomy_file(const std::string& path);

// Precedence: unresolvable -> invalid; same node -> exact; descendant ->
// subclass; malignancy/infectiousness flag mismatch -> safety-critical;
// ancestor -> actionable / coarse-directional / overly-broad by node
// annotation; shared immediate parent -> sibling; otherwise invalid.
Verdict classify_prediction(const DiseaseTaxonomy& tax, const std::string& reference,
                            const std::string& prediction);

struct RankedPrediction {
    std::string disease;
    double probability = 0.0;
    std::vector<std::string> key_matching_fields;
    std::string brief_reason;
};

struct CaseRecord {
    std::string case_id;
    std::string reference;
    std::vector<RankedPrediction> predictions;
};

// Fraction of records whose first k predictions contain a true verdict.
double topk_accuracy(const DiseaseTaxonomy& tax, const std::vector<CaseRecord>& records,
                     std::size_t k);

// l_j = 1 iff prediction j gets a true verdict; padded with zeros to k.
std::vector<int> correctness_vector(const DiseaseTaxonomy& tax, const CaseRecord& record,
                                    std::size_t k);

// Pulls the ranked list out of an <answer>...</answer> block holding a
// {"topN_diseases": [...]} object; <think> content is ignored.
std::vector<RankedPrediction> parse_diagnosis_answer(const std::string& text);

// Line-delimited JSON; each record carries either a parsed "predictions"
// array or a raw Appendix-style "answer" string. Errors cite line numbers.
std::vector<CaseRecord> load_predictions_file(const std::string& path);

struct EvalReportRow {
    std::size_t k = 0;
    double accuracy = 0.0;
    std::array<std::size_t, kVerdictCategories> verdict_counts{};
};

std::vector<EvalReportRow> evaluate(const DiseaseTaxonomy& tax,
                                    const std::vector<CaseRecord>& records, std::size_t max_k);

} // namespace dermbench::taxonomy

#endif
