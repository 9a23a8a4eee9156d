#include "wvqa/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wvqa/digest.hpp"
#include "wvqa/error.hpp"
#include "wvqa/text.hpp"

namespace wvqa {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 7> kCategoryNames = {
    "anatomic_location", "wound_type",    "wound_thickness", "tissue_color",
    "drainage_type",     "drainage_amount", "infection",
};

size_t category_index(MetadataCategory c) {
    return static_cast<size_t>(c);
}

}  // namespace

std::string_view to_string(MetadataCategory category) {
    return kCategoryNames[category_index(category)];
}

std::optional<MetadataCategory> category_from_string(std::string_view name) {
    for (size_t i = 0; i < kCategoryNames.size(); ++i) {
        if (kCategoryNames[i] == name) return kAllCategories[i];
    }
    return std::nullopt;
}

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "train";
}

std::optional<Split> split_from_string(std::string_view name) {
    if (name == "train") return Split::train;
    if (name == "validation") return Split::validation;
    if (name == "test") return Split::test;
    return std::nullopt;
}

std::string_view to_string(Language language) {
    return language == Language::zh ? "zh" : "en";
}

std::optional<Language> language_from_string(std::string_view name) {
    if (name == "en") return Language::en;
    if (name == "zh") return Language::zh;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Vocabularies
// ---------------------------------------------------------------------------

bool MetadataVocabulary::contains(std::string_view label) const {
    std::string normalized = text::to_lower(text::trim(label));
    return std::find(allowed_values.begin(), allowed_values.end(), normalized) !=
           allowed_values.end();
}

namespace {

MetadataVocabulary make_vocab(MetadataCategory category, std::vector<std::string> values,
                              bool multi_label) {
    MetadataVocabulary v;
    v.category = category;
    v.multi_label = multi_label;
    std::set<std::string> seen;
    for (auto& raw : values) {
        std::string normalized = text::to_lower(text::trim(raw));
        if (normalized.empty()) {
            throw ConfigError("vocabulary for " + std::string(to_string(category)) +
                              " contains an empty label");
        }
        if (!seen.insert(normalized).second) {
            throw ConfigError("vocabulary for " + std::string(to_string(category)) +
                              " contains duplicate label '" + normalized + "'");
        }
        v.allowed_values.push_back(std::move(normalized));
    }
    if (v.allowed_values.empty()) {
        throw ConfigError("vocabulary for " + std::string(to_string(category)) + " is empty");
    }
    return v;
}

}  // namespace

VocabularySet VocabularySet::defaults() {
    VocabularySet set;
    set.vocabs_[category_index(MetadataCategory::anatomic_location)] = make_vocab(
        MetadataCategory::anatomic_location,
        {"lower leg", "upper leg", "knee", "foot", "toe", "ankle", "fingernail", "finger",
         "hand", "wrist", "arm", "elbow", "shoulder", "abdomen", "chest", "back", "buttock",
         "hip", "head", "face", "neck", "other"},
        /*multi_label=*/true);
    set.vocabs_[category_index(MetadataCategory::wound_type)] = make_vocab(
        MetadataCategory::wound_type,
        {"surgical", "traumatic", "pressure ulcer", "diabetic ulcer", "venous ulcer",
         "arterial ulcer", "burn", "abrasion", "laceration", "bite", "blister", "other"},
        /*multi_label=*/false);
    set.vocabs_[category_index(MetadataCategory::wound_thickness)] = make_vocab(
        MetadataCategory::wound_thickness,
        {"superficial", "partial thickness", "full thickness"},
        /*multi_label=*/false);
    set.vocabs_[category_index(MetadataCategory::tissue_color)] = make_vocab(
        MetadataCategory::tissue_color,
        {"pink", "red and moist", "yellow", "black", "mixed", "not applicable"},
        /*multi_label=*/false);
    set.vocabs_[category_index(MetadataCategory::drainage_type)] = make_vocab(
        MetadataCategory::drainage_type,
        {"serous", "serosanguinous", "sanguineous", "purulent", "none"},
        /*multi_label=*/false);
    set.vocabs_[category_index(MetadataCategory::drainage_amount)] = make_vocab(
        MetadataCategory::drainage_amount,
        {"none", "scant", "minimal", "moderate", "heavy"},
        /*multi_label=*/false);
    set.vocabs_[category_index(MetadataCategory::infection)] = make_vocab(
        MetadataCategory::infection, {"yes", "no", "unsure"}, /*multi_label=*/false);
    return set;
}

VocabularySet VocabularySet::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("vocabulary file must be a JSON object");
    VocabularySet set = defaults();
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto category = category_from_string(it.key());
        if (!category) throw ConfigError("unknown vocabulary category '" + it.key() + "'");
        if (!it.value().is_array()) {
            throw ConfigError("vocabulary for '" + it.key() + "' must be an array of labels");
        }
        std::vector<std::string> values;
        for (const auto& v : it.value()) values.push_back(v.get<std::string>());
        bool multi = (*category == MetadataCategory::anatomic_location);
        set.vocabs_[category_index(*category)] = make_vocab(*category, std::move(values), multi);
    }
    return set;
}

VocabularySet VocabularySet::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open vocabulary file: " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError("invalid vocabulary file " + path + ": " + e.what());
    }
    return from_json(j);
}

const MetadataVocabulary& VocabularySet::at(MetadataCategory category) const {
    return vocabs_[category_index(category)];
}

json VocabularySet::to_json() const {
    json j = json::object();
    for (const auto& v : vocabs_) {
        j[std::string(to_string(v.category))] = v.allowed_values;
    }
    return j;
}

// ---------------------------------------------------------------------------
// IAA table
// ---------------------------------------------------------------------------

IAATable IAATable::defaults() {
    IAATable t;
    t.set(MetadataCategory::wound_type, 1.0);
    t.set(MetadataCategory::tissue_color, 0.97);
    t.set(MetadataCategory::infection, 0.97);
    t.set(MetadataCategory::drainage_type, 0.92);
    t.set(MetadataCategory::wound_thickness, 0.89);
    t.set(MetadataCategory::drainage_amount, 0.86);
    t.set(MetadataCategory::anatomic_location, 0.81);
    return t;
}

IAATable IAATable::from_json(const json& j) {
    IAATable t = defaults();
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto category = category_from_string(it.key());
        if (!category) throw ConfigError("unknown IAA category '" + it.key() + "'");
        t.set(*category, it.value().get<double>());
    }
    return t;
}

double IAATable::at(MetadataCategory category) const {
    return agreement_[category_index(category)];
}

void IAATable::set(MetadataCategory category, double agreement) {
    if (agreement < 0.0 || agreement > 1.0) {
        throw ConfigError("IAA for " + std::string(to_string(category)) +
                          " must lie in [0,1]");
    }
    agreement_[category_index(category)] = agreement;
}

json IAATable::to_json() const {
    json j = json::object();
    for (auto category : kAllCategories) {
        j[std::string(to_string(category))] = at(category);
    }
    return j;
}

// ---------------------------------------------------------------------------
// Cases
// ---------------------------------------------------------------------------

std::string Case::query_text() const {
    if (title.empty()) return content;
    if (content.empty()) return title;
    return title + " " + content;
}

namespace {

const std::set<std::string> kCaseKeys = {
    "case_id", "split", "title", "content", "image_refs",
    "responses", "gold_metadata", "language",
};

const std::set<std::string> kResponseKeys = {
    "text", "expertise_level", "validated_md", "most_frequent",
    "answers_completely", "precomputed_weight",
};

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) {
            throw ParseError(where + ": unknown field '" + it.key() + "' (schema_strict)");
        }
    }
}

ExpertResponse response_from_json(const json& j, bool strict, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": response entry must be an object");
    if (strict) reject_unknown_keys(j, kResponseKeys, where);
    ExpertResponse r;
    if (!j.contains("text") || !j.at("text").is_string()) {
        throw ParseError(where + ": response missing string field 'text'");
    }
    r.text = j.at("text").get<std::string>();
    if (text::normalize_whitespace(r.text).empty()) {
        throw ParseError(where + ": response text is empty");
    }
    if (j.contains("expertise_level") && !j.at("expertise_level").is_null()) {
        int level = j.at("expertise_level").get<int>();
        if (level < 0 || level > 9) {
            throw ParseError(where + ": expertise_level must be in 0..9");
        }
        r.expertise_level = level;
    }
    auto read_bool = [&](const char* key) -> std::optional<bool> {
        if (j.contains(key) && !j.at(key).is_null()) return j.at(key).get<bool>();
        return std::nullopt;
    };
    r.validated_md = read_bool("validated_md");
    r.most_frequent = read_bool("most_frequent");
    r.answers_completely = read_bool("answers_completely");
    if (j.contains("precomputed_weight") && !j.at("precomputed_weight").is_null()) {
        double w = j.at("precomputed_weight").get<double>();
        if (w < 0.0 || w > 1.0) {
            throw ParseError(where + ": precomputed_weight must lie in [0,1]");
        }
        r.precomputed_weight = w;
    }
    return r;
}

std::vector<std::string> labels_from_json(const json& value, const std::string& where) {
    std::vector<std::string> labels;
    if (value.is_string()) {
        labels.push_back(value.get<std::string>());
    } else if (value.is_array()) {
        for (const auto& v : value) {
            if (!v.is_string()) throw ParseError(where + ": labels must be strings");
            labels.push_back(v.get<std::string>());
        }
    } else {
        throw ParseError(where + ": label value must be a string or array of strings");
    }
    for (auto& label : labels) label = text::to_lower(text::trim(label));
    return labels;
}

}  // namespace

Case case_from_json(const json& j, const LoadOptions& options, const std::string& where,
                    std::vector<std::string>* warnings) {
    if (!j.is_object()) throw ParseError(where + ": case must be a JSON object");
    if (options.schema_strict) reject_unknown_keys(j, kCaseKeys, where);

    Case c;
    if (!j.contains("case_id") || !j.at("case_id").is_string() ||
        j.at("case_id").get<std::string>().empty()) {
        throw ParseError(where + ": missing non-empty string field 'case_id'");
    }
    c.case_id = j.at("case_id").get<std::string>();
    const std::string ctx = where + " (case " + c.case_id + ")";

    if (j.contains("split")) {
        auto split = split_from_string(j.at("split").get<std::string>());
        if (!split) throw ParseError(ctx + ": unknown split '" + j.at("split").get<std::string>() + "'");
        c.split = *split;
    }
    if (j.contains("language")) {
        auto lang = language_from_string(j.at("language").get<std::string>());
        if (!lang) throw ParseError(ctx + ": unknown language");
        c.language = *lang;
    }
    c.title = j.value("title", std::string{});
    c.content = j.value("content", std::string{});

    if (j.contains("image_refs")) {
        for (const auto& ref : j.at("image_refs")) {
            c.image_refs.push_back(ref.get<std::string>());
        }
    }
    if (warnings && (c.image_refs.empty() || c.image_refs.size() > 2)) {
        warnings->push_back(ctx + ": expected 1..2 image_refs, found " +
                            std::to_string(c.image_refs.size()));
    }

    if (j.contains("responses")) {
        size_t i = 0;
        for (const auto& rj : j.at("responses")) {
            c.responses.push_back(response_from_json(
                rj, options.schema_strict, ctx + " response[" + std::to_string(i) + "]"));
            ++i;
        }
    }

    if (j.contains("gold_metadata") && !j.at("gold_metadata").is_null()) {
        LabelAssignment assignment;
        const json& gm = j.at("gold_metadata");
        if (!gm.is_object()) throw ParseError(ctx + ": gold_metadata must be an object");
        for (auto it = gm.begin(); it != gm.end(); ++it) {
            auto category = category_from_string(it.key());
            if (!category) {
                throw ParseError(ctx + ": unknown metadata category '" + it.key() + "'");
            }
            auto labels = labels_from_json(it.value(), ctx);
            const auto& vocab = options.vocab.at(*category);
            if (!vocab.multi_label && labels.size() > 1) {
                throw ParseError(ctx + ": single-label category " + it.key() + " holds " +
                                 std::to_string(labels.size()) + " labels");
            }
            for (const auto& label : labels) {
                if (!vocab.contains(label)) {
                    throw ParseError(ctx + ": unknown label for " + it.key() + ": '" + label + "'");
                }
            }
            assignment[*category] = std::move(labels);
        }
        c.gold_metadata = std::move(assignment);
    }
    return c;
}

json case_to_json(const Case& c) {
    json j = json::object();
    j["case_id"] = c.case_id;
    j["split"] = std::string(to_string(c.split));
    j["language"] = std::string(to_string(c.language));
    j["title"] = c.title;
    j["content"] = c.content;
    j["image_refs"] = c.image_refs;
    json responses = json::array();
    for (const auto& r : c.responses) {
        json rj = json::object();
        rj["text"] = r.text;
        if (r.expertise_level) rj["expertise_level"] = *r.expertise_level;
        if (r.validated_md) rj["validated_md"] = *r.validated_md;
        if (r.most_frequent) rj["most_frequent"] = *r.most_frequent;
        if (r.answers_completely) rj["answers_completely"] = *r.answers_completely;
        if (r.precomputed_weight) rj["precomputed_weight"] = *r.precomputed_weight;
        responses.push_back(std::move(rj));
    }
    j["responses"] = std::move(responses);
    if (c.gold_metadata) {
        json gm = json::object();
        for (const auto& [category, labels] : *c.gold_metadata) {
            const std::string key(to_string(category));
            if (category == MetadataCategory::anatomic_location) {
                gm[key] = labels;
            } else {
                gm[key] = labels.empty() ? std::string{} : labels.front();
            }
        }
        j["gold_metadata"] = std::move(gm);
    }
    return j;
}

Dataset load_dataset(const std::string& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset file: " + path);

    Dataset dataset;
    std::set<std::string> seen_ids;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(where + ": malformed JSON: " + e.what());
        }
        Case c = case_from_json(j, options, where, &dataset.warnings);
        if (!seen_ids.insert(c.case_id).second) {
            throw ParseError(where + ": duplicate case_id '" + c.case_id + "'");
        }
        dataset.cases.push_back(std::move(c));
    }
    return dataset;
}

std::string dataset_to_jsonl(const std::vector<Case>& cases) {
    std::string out;
    for (const auto& c : cases) {
        out += case_to_json(c).dump();
        out += '\n';
    }
    return out;
}

std::string corpus_digest(const std::vector<Case>& cases) {
    return sha256_hex(dataset_to_jsonl(cases));
}

SplitStats compute_split_stats(const std::vector<Case>& cases, Split split) {
    SplitStats stats;
    size_t query_words = 0;
    size_t response_words = 0;
    for (const auto& c : cases) {
        if (c.split != split) continue;
        ++stats.case_count;
        stats.image_count += c.image_refs.size();
        stats.response_count += c.responses.size();
        query_words += text::whitespace_words(c.query_text()).size();
        for (const auto& r : c.responses) {
            response_words += text::whitespace_words(r.text).size();
        }
    }
    if (stats.case_count == 0) {
        throw Error("no cases in split '" + std::string(to_string(split)) + "'");
    }
    stats.responses_per_case =
        static_cast<double>(stats.response_count) / static_cast<double>(stats.case_count);
    stats.avg_query_words =
        static_cast<double>(query_words) / static_cast<double>(stats.case_count);
    stats.avg_response_words =
        stats.response_count == 0
            ? 0.0
            : static_cast<double>(response_words) / static_cast<double>(stats.response_count);
    return stats;
}

ValidationReport validate_labels(const LabelAssignment& assignment, const VocabularySet& vocab) {
    ValidationReport report;
    for (const auto& [category, labels] : assignment) {
        const auto& v = vocab.at(category);
        if (!v.multi_label && labels.size() > 1) {
            report.violations.push_back(
                {category, "single-label category holds " + std::to_string(labels.size())});
        }
        for (const auto& label : labels) {
            if (!v.contains(label)) {
                report.violations.push_back(
                    {category, "unknown label '" + label + "' for " + std::string(to_string(category))});
            }
        }
    }
    return report;
}

CaseIndex::CaseIndex(const std::vector<Case>& cases) {
    for (const auto& c : cases) {
        by_id_.emplace(c.case_id, &c);
    }
}

const Case* CaseIndex::find(std::string_view case_id) const {
    auto it = by_id_.find(case_id);
    return it == by_id_.end() ? nullptr : it->second;
}

const Case& CaseIndex::at(std::string_view case_id) const {
    const Case* c = find(case_id);
    if (!c) throw Error("unknown case_id '" + std::string(case_id) + "'");
    return *c;
}

}  // namespace wvqa
