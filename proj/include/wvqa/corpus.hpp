#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace wvqa {

// ---------------------------------------------------------------------------
// Metadata categories and vocabularies
// ---------------------------------------------------------------------------

enum class MetadataCategory {
    anatomic_location,
    wound_type,
    wound_thickness,
    tissue_color,
    drainage_type,
    drainage_amount,
    infection,
};

inline constexpr std::array<MetadataCategory, 7> kAllCategories = {
    MetadataCategory::anatomic_location, MetadataCategory::wound_type,
    MetadataCategory::wound_thickness,   MetadataCategory::tissue_color,
    MetadataCategory::drainage_type,     MetadataCategory::drainage_amount,
    MetadataCategory::infection,
};

/// Categories predicted by the two-stage metadata pipeline.
inline constexpr std::array<MetadataCategory, 4> kSelectedCategories = {
    MetadataCategory::anatomic_location,
    MetadataCategory::wound_type,
    MetadataCategory::tissue_color,
    MetadataCategory::drainage_type,
};

std::string_view to_string(MetadataCategory category);
std::optional<MetadataCategory> category_from_string(std::string_view name);

/// Allowed label set for one metadata category. Values are stored
/// case-normalized (lowercase) and must be unique.
struct MetadataVocabulary {
    MetadataCategory category = MetadataCategory::anatomic_location;
    std::vector<std::string> allowed_values;
    bool multi_label = false;

    bool contains(std::string_view label) const;
};

/// The complete set of seven category vocabularies.
class VocabularySet {
public:
    /// Built-in default label sets (overridable via a vocabulary file).
    static VocabularySet defaults();
    static VocabularySet from_json(const nlohmann::json& j);
    static VocabularySet load(const std::string& path);

    const MetadataVocabulary& at(MetadataCategory category) const;
    nlohmann::json to_json() const;

private:
    std::array<MetadataVocabulary, 7> vocabs_;
};

/// Per-category inter-annotator agreement fractions.
class IAATable {
public:
    /// wound_type 1.0, tissue_color 0.97, infection 0.97, drainage_type 0.92,
    /// wound_thickness 0.89, drainage_amount 0.86, anatomic_location 0.81.
    static IAATable defaults();
    static IAATable from_json(const nlohmann::json& j);

    double at(MetadataCategory category) const;
    void set(MetadataCategory category, double agreement);
    nlohmann::json to_json() const;

private:
    std::array<double, 7> agreement_{};
};

// ---------------------------------------------------------------------------
// Cases
// ---------------------------------------------------------------------------

enum class Split { train, validation, test };
enum class Language { en, zh };

std::string_view to_string(Split split);
std::optional<Split> split_from_string(std::string_view name);
std::string_view to_string(Language language);
std::optional<Language> language_from_string(std::string_view name);

struct ExpertResponse {
    std::string text;
    std::optional<int> expertise_level;      // 0-9
    std::optional<bool> validated_md;
    std::optional<bool> most_frequent;
    std::optional<bool> answers_completely;
    std::optional<double> precomputed_weight;  // in [0,1] when present
};

/// Per-category gold label lists; single-label categories hold one entry.
using LabelAssignment = std::map<MetadataCategory, std::vector<std::string>>;

struct Case {
    std::string case_id;
    Split split = Split::train;
    std::string title;
    std::string content;
    std::vector<std::string> image_refs;  // relative paths or data: URIs, never decoded
    std::vector<ExpertResponse> responses;
    std::optional<LabelAssignment> gold_metadata;
    Language language = Language::en;

    /// Text used for embedding and prompts: title + " " + content.
    std::string query_text() const;
};

struct SplitStats {
    std::size_t case_count = 0;
    std::size_t image_count = 0;
    std::size_t response_count = 0;
    double responses_per_case = 0.0;
    double avg_query_words = 0.0;
    double avg_response_words = 0.0;
};

// ---------------------------------------------------------------------------
// Loading / serialization
// ---------------------------------------------------------------------------

struct LoadOptions {
    bool schema_strict = false;
    VocabularySet vocab = VocabularySet::defaults();
};

struct Dataset {
    std::vector<Case> cases;
    std::vector<std::string> warnings;
};

/// Parse one case object. `where` names the source (file:line) for errors.
Case case_from_json(const nlohmann::json& j, const LoadOptions& options,
                    const std::string& where, std::vector<std::string>* warnings);

/// Canonical JSON form; load(serialize(x)) is field-identical.
nlohmann::json case_to_json(const Case& c);

/// Load a UTF-8 JSONL dataset, one case object per line. Blank lines are
/// skipped. Errors name the offending line or case_id.
Dataset load_dataset(const std::string& path, const LoadOptions& options = {});

/// Serialize back to JSONL (one canonical JSON object per line).
std::string dataset_to_jsonl(const std::vector<Case>& cases);

/// SHA-256 over the canonical JSONL form; recorded in run manifests.
std::string corpus_digest(const std::vector<Case>& cases);

/// Stats for one split; throws if the split is empty.
SplitStats compute_split_stats(const std::vector<Case>& cases, Split split);

struct LabelViolation {
    MetadataCategory category = MetadataCategory::anatomic_location;
    std::string message;
};

struct ValidationReport {
    std::vector<LabelViolation> violations;
    bool ok() const { return violations.empty(); }
};

/// Report out-of-vocabulary labels and cardinality violations. Never throws.
ValidationReport validate_labels(const LabelAssignment& assignment, const VocabularySet& vocab);

/// Case lookup by id over a loaded (immutable) dataset.
class CaseIndex {
public:
    explicit CaseIndex(const std::vector<Case>& cases);
    const Case* find(std::string_view case_id) const;
    const Case& at(std::string_view case_id) const;  // throws if missing

private:
    std::map<std::string, const Case*, std::less<>> by_id_;
};

}  // namespace wvqa
