#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wvqa/corpus.hpp"

namespace wvqa {

enum class ExampleOrder { similar_first, similar_last };

std::string_view to_string(ExampleOrder order);
std::optional<ExampleOrder> example_order_from_string(std::string_view name);

struct FewShotConfig {
    int k = 5;  // >= 1; 25 for the large-context model profile
    ExampleOrder order = ExampleOrder::similar_first;
};

struct LabelScore {
    std::string label;
    double score = 0.0;  // in [0,1]
};

/// One category's predicted labels plus the field-level confidence.
/// For anatomic_location the labels list holds every location kept after the
/// 0.25 score cut, sorted by descending score, and field_confidence is the
/// mean of the kept scores; single-label categories hold one entry.
struct FieldConfidence {
    MetadataCategory category = MetadataCategory::anatomic_location;
    std::vector<LabelScore> labels;
    double field_confidence = 0.0;
};

struct MetadataPrediction {
    std::map<MetadataCategory, FieldConfidence> fields;
    double overall_certainty = 0.0;  // recomputed mean of field confidences
    std::vector<std::string> warnings;

    bool empty() const;
    /// Mean of the present field confidences (0 when no fields).
    double recompute_overall() const;
};

enum class GateState { assert_fact, caution };

std::string_view to_string(GateState state);

/// Pure function of field confidences and the threshold: assert when
/// confidence >= threshold, caution otherwise.
struct GateDecision {
    std::map<MetadataCategory, GateState> states;
    double threshold = 0.7;
};

GateDecision apply_confidence_gate(const MetadataPrediction& prediction, double threshold);

/// All-caution empty prediction used when stage-1 output cannot be parsed.
MetadataPrediction fallback_prediction();

/// Gold labels rendered as an all-confident prediction (ablation prompts).
/// Only categories present in both `categories` and the case's gold labels
/// are included.
MetadataPrediction prediction_from_gold(const Case& c,
                                        const std::vector<MetadataCategory>& categories);

nlohmann::json prediction_to_json(const MetadataPrediction& prediction);
MetadataPrediction prediction_from_json(const nlohmann::json& j);
nlohmann::json decision_to_json(const GateDecision& decision);
GateDecision decision_from_json(const nlohmann::json& j);

}  // namespace wvqa
