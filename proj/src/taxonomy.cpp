#include "dermbench/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "dermbench/error.hpp"

namespace dermbench::taxonomy {

bool verdict_truth(VerdictCategory category) {
    switch (category) {
        case VerdictCategory::exact_or_synonym:
        case VerdictCategory::subclass_match:
        case VerdictCategory::actionable_parent:
        case VerdictCategory::coarse_directional:
            return true;
        default:
            return false;
    }
}

const char* verdict_name(VerdictCategory category) {
    switch (category) {
        case VerdictCategory::exact_or_synonym: return "exact_or_synonym";
        case VerdictCategory::subclass_match: return "subclass_match";
        case VerdictCategory::actionable_parent: return "actionable_parent";
        case VerdictCategory::coarse_directional: return "coarse_directional";
        case VerdictCategory::overly_broad_parent: return "overly_broad_parent";
        case VerdictCategory::sibling_confusion: return "sibling_confusion";
        case VerdictCategory::safety_critical: return "safety_critical";
        case VerdictCategory::invalid_or_irrelevant: return "invalid_or_irrelevant";
    }
    return "?";
}

std::string normalize_name(const std::string& name) {
    std::string out;
    bool pending_space = false;
    for (char ch : name) {
        const unsigned char u = static_cast<unsigned char>(ch);
        if (std::isspace(u)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(std::tolower(u));
    }
    return out;
}

void DiseaseTaxonomy::build_indices() {
    by_id_.clear();
    name_index_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id.empty()) fail(ErrorCode::validation, "taxonomy: node with empty id");
        if (!by_id_.emplace(nodes_[i].id, i).second)
            fail(ErrorCode::validation, "taxonomy: duplicate node id '" + nodes_[i].id + "'");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        auto add_name = [&](const std::string& raw) {
            const std::string key = normalize_name(raw);
            if (key.empty())
                fail(ErrorCode::validation, "taxonomy: empty name on node '" + nodes_[i].id + "'");
            const auto [it, inserted] = name_index_.emplace(key, i);
            if (!inserted)
                fail(ErrorCode::validation, "taxonomy: name '" + raw + "' maps to both '" +
                                                nodes_[it->second].id + "' and '" + nodes_[i].id +
                                                "'");
        };
        add_name(nodes_[i].canonical);
        for (const auto& s : nodes_[i].synonyms) add_name(s);
        for (const auto& p : nodes_[i].parents)
            if (!by_id_.count(p))
                fail(ErrorCode::validation, "taxonomy: node '" + nodes_[i].id +
                                                "' references unknown parent '" + p + "'");
    }

    // Cycle check plus transitive ancestor sets, DFS with tricolor marking.
    ancestors_.assign(nodes_.size(), {});
    std::vector<int> state(nodes_.size(), 0); // 0 unvisited, 1 in-progress, 2 done
    std::function<void(std::size_t, std::vector<std::string>&)> visit =
        [&](std::size_t i, std::vector<std::string>& trail) {
            if (state[i] == 1) {
                std::string msg = "taxonomy: cycle through";
                for (const auto& t : trail) msg += " '" + t + "' ->";
                msg += " '" + nodes_[i].id + "'";
                fail(ErrorCode::validation, msg);
            }
            if (state[i] == 2) return;
            state[i] = 1;
            trail.push_back(nodes_[i].id);
            for (const auto& p : nodes_[i].parents) {
                const std::size_t pi = by_id_.at(p);
                visit(pi, trail);
                ancestors_[i].insert(pi);
                ancestors_[i].insert(ancestors_[pi].begin(), ancestors_[pi].end());
            }
            trail.pop_back();
            state[i] = 2;
        };
    std::vector<std::string> trail;
    for (std::size_t i = 0; i < nodes_.size(); ++i) visit(i, trail);
}

DiseaseTaxonomy DiseaseTaxonomy::from_nodes(std::vector<DiseaseNode> nodes) {
    DiseaseTaxonomy tax;
    tax.nodes_ = std::move(nodes);
    tax.build_indices();
    return tax;
}

const DiseaseNode* DiseaseTaxonomy::find(const std::string& name) const {
    const auto it = name_index_.find(normalize_name(name));
    return it == name_index_.end() ? nullptr : &nodes_[it->second];
}

const DiseaseNode& DiseaseTaxonomy::node_by_id(const std::string& id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) fail(ErrorCode::invalid_argument, "taxonomy: unknown id '" + id + "'");
    return nodes_[it->second];
}

bool DiseaseTaxonomy::is_ancestor(const std::string& ancestor_id, const std::string& node_id) const {
    const auto a = by_id_.find(ancestor_id), n = by_id_.find(node_id);
    if (a == by_id_.end() || n == by_id_.end()) return false;
    return ancestors_[n->second].count(a->second) != 0;
}

bool DiseaseTaxonomy::shares_parent(const std::string& a_id, const std::string& b_id) const {
    const auto& a = node_by_id(a_id);
    const auto& b = node_by_id(b_id);
    for (const auto& pa : a.parents)
        for (const auto& pb : b.parents)
            if (pa == pb) return true;
    return false;
}

namespace {

DiseaseTaxonomy taxonomy_from_json(const nlohmann::json& doc, const std::string& where) {
    if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array())
        fail(ErrorCode::parse, where + ": expected top-level object with a 'nodes' array");
    static const std::vector<std::string> known = {
        "id",        "canonical",  "synonyms",
        "parents",   "malignant",  "infectious",
        "actionable_as_parent",    "coarse_directional_ok"};
    std::vector<DiseaseNode> nodes;
    for (const auto& jn : doc["nodes"]) {
        if (!jn.is_object()) fail(ErrorCode::parse, where + ": node entry is not an object");
        for (const auto& [key, _] : jn.items())
            if (std::find(known.begin(), known.end(), key) == known.end())
                fail(ErrorCode::parse, where + ": unknown key '" + key + "' in node");
        DiseaseNode n;
        try {
            n.id = jn.at("id").get<std::string>();
            n.canonical = jn.at("canonical").get<std::string>();
            for (const auto& s : jn.at("synonyms")) n.synonyms.push_back(s.get<std::string>());
            for (const auto& p : jn.at("parents")) n.parents.push_back(p.get<std::string>());
            n.malignant = jn.at("malignant").get<bool>();
            n.infectious = jn.at("infectious").get<bool>();
            n.actionable_as_parent = jn.at("actionable_as_parent").get<bool>();
            n.coarse_directional_ok = jn.at("coarse_directional_ok").get<bool>();
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::parse, where + ": bad node object: " + e.what());
        }
        nodes.push_back(std::move(n));
    }
    return DiseaseTaxonomy::from_nodes(std::move(nodes));
}

} // namespace

DiseaseTaxonomy load_taxonomy(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, std::string("taxonomy: ") + e.what());
    }
    return taxonomy_from_json(doc, "taxonomy");
}

DiseaseTaxonomy load_taxonomy_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open taxonomy: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, path + ": " + e.what());
    }
    return taxonomy_from_json(doc, path);
}

Verdict classify_prediction(const DiseaseTaxonomy& tax, const std::string& reference,
                            const std::string& prediction) {
    const DiseaseNode* ref = tax.find(reference);
    if (!ref)
        fail(ErrorCode::invalid_argument,
             "classify_prediction: reference '" + reference + "' does not resolve");
    auto make = [](VerdictCategory c) { return Verdict{c, verdict_truth(c)}; };

    const DiseaseNode* pred =
        normalize_name(prediction).empty() ? nullptr : tax.find(prediction);
    if (!pred) return make(VerdictCategory::invalid_or_irrelevant);
    if (pred->id == ref->id) return make(VerdictCategory::exact_or_synonym);
    if (tax.is_ancestor(ref->id, pred->id)) return make(VerdictCategory::subclass_match);
    // Safety boundary outranks everything below: a benign/malignant or
    // infectious/non-infectious flip is never rewarded, whatever the graph
    // distance.
    if (ref->malignant != pred->malignant || ref->infectious != pred->infectious)
        return make(VerdictCategory::safety_critical);
    if (tax.is_ancestor(pred->id, ref->id)) {
        if (pred->actionable_as_parent) return make(VerdictCategory::actionable_parent);
        if (pred->coarse_directional_ok) return make(VerdictCategory::coarse_directional);
        return make(VerdictCategory::overly_broad_parent);
    }
    if (tax.shares_parent(ref->id, pred->id)) return make(VerdictCategory::sibling_confusion);
    return make(VerdictCategory::invalid_or_irrelevant);
}

std::vector<int> correctness_vector(const DiseaseTaxonomy& tax, const CaseRecord& record,
                                    std::size_t k) {
    if (k < 1) fail(ErrorCode::invalid_argument, "correctness_vector: k must be >= 1");
    std::vector<int> l(k, 0);
    for (std::size_t j = 0; j < record.predictions.size() && j < k; ++j)
        l[j] = classify_prediction(tax, record.reference, record.predictions[j].disease).truth
                   ? 1
                   : 0;
    return l;
}

double topk_accuracy(const DiseaseTaxonomy& tax, const std::vector<CaseRecord>& records,
                     std::size_t k) {
    if (k < 1) fail(ErrorCode::invalid_argument, "topk_accuracy: k must be >= 1");
    if (records.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& record : records) {
        const auto l = correctness_vector(tax, record, k);
        if (std::any_of(l.begin(), l.end(), [](int v) { return v != 0; })) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

namespace {

RankedPrediction prediction_from_json(const nlohmann::json& jp, const std::string& where) {
    if (!jp.is_object()) fail(ErrorCode::parse, where + ": prediction entry is not an object");
    RankedPrediction p;
    try {
        p.disease = jp.at("disease").get<std::string>();
        p.probability = jp.at("probability").get<double>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, where + ": bad prediction entry: " + e.what());
    }
    if (!(p.probability >= 0.0 && p.probability <= 1.0))
        fail(ErrorCode::validation,
             where + ": probability " + std::to_string(p.probability) + " outside [0,1]");
    if (jp.contains("key_matching_fields"))
        for (const auto& f : jp["key_matching_fields"])
            p.key_matching_fields.push_back(f.get<std::string>());
    if (jp.contains("brief_reason")) p.brief_reason = jp["brief_reason"].get<std::string>();
    return p;
}

} // namespace

std::vector<RankedPrediction> parse_diagnosis_answer(const std::string& text) {
    const std::string open = "<answer>", close = "</answer>";
    const auto begin = text.find(open);
    if (begin == std::string::npos)
        fail(ErrorCode::parse, "diagnosis answer: missing <answer> tag");
    const auto end = text.find(close, begin + open.size());
    if (end == std::string::npos)
        fail(ErrorCode::parse, "diagnosis answer: unbalanced <answer> tag");
    const std::string inner = text.substr(begin + open.size(), end - begin - open.size());

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(inner, nullptr, true, true); // template carries // comments
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, std::string("diagnosis answer: malformed payload: ") + e.what());
    }
    if (!doc.is_object())
        fail(ErrorCode::parse, "diagnosis answer: payload is not an object");

    const nlohmann::json* array = nullptr;
    std::string array_key;
    for (const auto& [key, val] : doc.items()) {
        const bool top = key.rfind("top", 0) == 0 &&
                         key.size() > 12 && key.compare(key.size() - 9, 9, "_diseases") == 0;
        // key shape: top<digits>_diseases
        bool digits = top;
        if (top)
            for (std::size_t i = 3; i + 9 < key.size(); ++i)
                digits = digits && std::isdigit(static_cast<unsigned char>(key[i]));
        if (digits) {
            if (array)
                fail(ErrorCode::parse, "diagnosis answer: multiple top-K arrays present");
            array = &val;
            array_key = key;
        }
    }
    if (!array || !array->is_array())
        fail(ErrorCode::parse, "diagnosis answer: no topN_diseases array found");

    std::vector<RankedPrediction> out;
    for (const auto& jp : *array) out.push_back(prediction_from_json(jp, array_key));
    return out;
}

std::vector<CaseRecord> load_predictions_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open predictions: " + path);
    std::vector<CaseRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = path + ":" + std::to_string(lineno);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::parse, where + ": " + e.what());
        }
        CaseRecord record;
        try {
            record.case_id = doc.at("case_id").get<std::string>();
            record.reference = doc.at("reference").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::parse, where + ": " + e.what());
        }
        if (doc.contains("predictions")) {
            if (!doc["predictions"].is_array())
                fail(ErrorCode::parse, where + ": predictions is not an array");
            for (const auto& jp : doc["predictions"])
                record.predictions.push_back(prediction_from_json(jp, where));
        } else if (doc.contains("answer")) {
            try {
                record.predictions = parse_diagnosis_answer(doc["answer"].get<std::string>());
            } catch (const Error& e) {
                fail(e.code(), where + ": " + e.what());
            }
        } else {
            fail(ErrorCode::parse, where + ": record needs 'predictions' or 'answer'");
        }
        if (record.predictions.empty())
            fail(ErrorCode::validation, where + ": record has no predictions");
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<EvalReportRow> evaluate(const DiseaseTaxonomy& tax,
                                    const std::vector<CaseRecord>& records, std::size_t max_k) {
    if (max_k < 1) fail(ErrorCode::invalid_argument, "evaluate: max_k must be >= 1");
    std::vector<EvalReportRow> rows;
    for (std::size_t k = 1; k <= max_k; ++k) {
        EvalReportRow row;
        row.k = k;
        std::size_t hits = 0;
        for (const auto& record : records) {
            bool hit = false;
            for (std::size_t j = 0; j < record.predictions.size() && j < k; ++j) {
                const Verdict v =
                    classify_prediction(tax, record.reference, record.predictions[j].disease);
                ++row.verdict_counts[static_cast<std::size_t>(v.category)];
                hit = hit || v.truth;
            }
            if (hit) ++hits;
        }
        row.accuracy =
            records.empty() ? 0.0
                            : static_cast<double>(hits) / static_cast<double>(records.size());
        rows.push_back(row);
    }
    return rows;
}

} // namespace dermbench::taxonomy
