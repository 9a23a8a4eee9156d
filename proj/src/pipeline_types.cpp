#include "wvqa/pipeline_types.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "wvqa/error.hpp"

namespace wvqa {

using nlohmann::json;

std::string_view to_string(ExampleOrder order) {
    return order == ExampleOrder::similar_last ? "similar_last" : "similar_first";
}

std::optional<ExampleOrder> example_order_from_string(std::string_view name) {
    if (name == "similar_first") return ExampleOrder::similar_first;
    if (name == "similar_last") return ExampleOrder::similar_last;
    return std::nullopt;
}

bool MetadataPrediction::empty() const {
    for (const auto& [category, field] : fields) {
        if (!field.labels.empty()) return false;
    }
    return true;
}

double MetadataPrediction::recompute_overall() const {
    if (fields.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [category, field] : fields) sum += field.field_confidence;
    return sum / static_cast<double>(fields.size());
}

std::string_view to_string(GateState state) {
    return state == GateState::assert_fact ? "assert" : "caution";
}

GateDecision apply_confidence_gate(const MetadataPrediction& prediction, double threshold) {
    if (threshold <= 0.0 || threshold > 1.0) {
        throw Error("gate threshold must lie in (0,1]");
    }
    GateDecision decision;
    decision.threshold = threshold;
    for (const auto& [category, field] : prediction.fields) {
        decision.states[category] =
            field.field_confidence >= threshold ? GateState::assert_fact : GateState::caution;
    }
    return decision;
}

MetadataPrediction fallback_prediction() {
    MetadataPrediction prediction;
    for (auto category : kSelectedCategories) {
        prediction.fields[category] = FieldConfidence{category, {}, 0.0};
    }
    prediction.overall_certainty = 0.0;
    return prediction;
}

MetadataPrediction prediction_from_gold(const Case& c,
                                        const std::vector<MetadataCategory>& categories) {
    MetadataPrediction prediction;
    if (!c.gold_metadata) return prediction;
    for (auto category : categories) {
        auto it = c.gold_metadata->find(category);
        if (it == c.gold_metadata->end()) continue;
        FieldConfidence field;
        field.category = category;
        for (const auto& label : it->second) field.labels.push_back({label, 1.0});
        field.field_confidence = 1.0;
        prediction.fields[category] = std::move(field);
    }
    prediction.overall_certainty = prediction.recompute_overall();
    return prediction;
}

json prediction_to_json(const MetadataPrediction& prediction) {
    json fields = json::object();
    for (const auto& [category, field] : prediction.fields) {
        json labels = json::array();
        for (const auto& ls : field.labels) {
            labels.push_back({{"label", ls.label}, {"score", ls.score}});
        }
        fields[std::string(to_string(category))] = {
            {"labels", std::move(labels)},
            {"confidence", field.field_confidence},
        };
    }
    json j;
    j["fields"] = std::move(fields);
    j["overall_certainty"] = prediction.overall_certainty;
    if (!prediction.warnings.empty()) j["warnings"] = prediction.warnings;
    return j;
}

MetadataPrediction prediction_from_json(const json& j) {
    MetadataPrediction prediction;
    for (auto it = j.at("fields").begin(); it != j.at("fields").end(); ++it) {
        auto category = category_from_string(it.key());
        if (!category) throw ParseError("unknown category '" + it.key() + "' in prediction");
        FieldConfidence field;
        field.category = *category;
        for (const auto& ls : it.value().at("labels")) {
            field.labels.push_back({ls.at("label").get<std::string>(),
                                    ls.at("score").get<double>()});
        }
        field.field_confidence = it.value().at("confidence").get<double>();
        prediction.fields[*category] = std::move(field);
    }
    prediction.overall_certainty = j.at("overall_certainty").get<double>();
    if (j.contains("warnings")) {
        prediction.warnings = j.at("warnings").get<std::vector<std::string>>();
    }
    return prediction;
}

json decision_to_json(const GateDecision& decision) {
    json states = json::object();
    for (const auto& [category, state] : decision.states) {
        states[std::string(to_string(category))] = std::string(to_string(state));
    }
    json j;
    j["threshold"] = decision.threshold;
    j["states"] = std::move(states);
    return j;
}

GateDecision decision_from_json(const json& j) {
    GateDecision decision;
    decision.threshold = j.at("threshold").get<double>();
    for (auto it = j.at("states").begin(); it != j.at("states").end(); ++it) {
        auto category = category_from_string(it.key());
        if (!category) throw ParseError("unknown category '" + it.key() + "' in decision");
        decision.states[*category] = it.value().get<std::string>() == "assert"
                                         ? GateState::assert_fact
                                         : GateState::caution;
    }
    return decision;
}

}  // namespace wvqa
