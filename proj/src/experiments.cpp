#include "wvqa/experiments.hpp"

#include <algorithm>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "wvqa/error.hpp"
#include "wvqa/prompts.hpp"
#include "wvqa/text.hpp"

namespace wvqa::experiments {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Ablation configurations
// ---------------------------------------------------------------------------

std::string AblationConfig::name() const {
    switch (kind) {
        case Kind::all_metadata: return "all_metadata";
        case Kind::no_metadata: return "no_metadata";
        case Kind::without_category:
            return "without_" + std::string(to_string(*removed));
    }
    return "all_metadata";
}

std::vector<MetadataCategory> AblationConfig::included_categories() const {
    std::vector<MetadataCategory> included;
    if (kind == Kind::no_metadata) return included;
    for (auto category : kAllCategories) {
        if (kind == Kind::without_category && category == *removed) continue;
        included.push_back(category);
    }
    return included;
}

std::vector<AblationConfig> AblationConfig::all_nine() {
    std::vector<AblationConfig> configs;
    configs.push_back({Kind::all_metadata, std::nullopt});
    configs.push_back({Kind::no_metadata, std::nullopt});
    for (auto category : kAllCategories) {
        configs.push_back({Kind::without_category, category});
    }
    return configs;
}

AblationConfig AblationConfig::from_name(const std::string& name) {
    if (name == "all_metadata") return {Kind::all_metadata, std::nullopt};
    if (name == "no_metadata") return {Kind::no_metadata, std::nullopt};
    constexpr std::string_view prefix = "without_";
    if (name.rfind(prefix, 0) == 0) {
        auto category = category_from_string(name.substr(prefix.size()));
        if (category) return {Kind::without_category, *category};
    }
    throw Error("unknown ablation configuration '" + name + "'");
}

// ---------------------------------------------------------------------------
// Drops
// ---------------------------------------------------------------------------

double compute_drop(double score, double baseline) {
    return score - baseline;
}

std::vector<AblationResult> ablation_from_scores(
    const std::map<std::string, double>& score_by_config) {
    auto baseline_it = score_by_config.find("all_metadata");
    if (baseline_it == score_by_config.end()) {
        throw Error("ablation scores are missing the all_metadata baseline");
    }
    const double baseline = baseline_it->second;

    std::vector<AblationResult> results;
    for (const auto& config : AblationConfig::all_nine()) {
        auto it = score_by_config.find(config.name());
        if (it == score_by_config.end()) {
            throw Error("ablation scores are missing configuration '" + config.name() + "'");
        }
        AblationResult result;
        result.config = config;
        result.delta_bleu = it->second;
        if (config.kind != AblationConfig::Kind::all_metadata) {
            result.performance_drop = compute_drop(it->second, baseline);
        }
        results.push_back(std::move(result));
    }
    return results;
}

// ---------------------------------------------------------------------------
// Full ablation run
// ---------------------------------------------------------------------------

namespace {

std::vector<metrics::WeightedReference> weighted_references(const Case& c) {
    std::vector<metrics::WeightedReference> references;
    for (const auto& r : c.responses) {
        auto tokens = text::metric_tokens(r.text);
        if (tokens.empty()) continue;
        references.push_back({std::move(tokens), metrics::response_weight(r)});
    }
    return references;
}

}  // namespace

std::vector<AblationResult> run_ablation(const std::vector<Case>& cases, Gateway& gateway,
                                         const PipelineOptions& options,
                                         std::vector<std::string>* warnings) {
    std::vector<const Case*> usable;
    for (const auto& c : cases) {
        if (!c.gold_metadata) {
            if (warnings) {
                warnings->push_back("case " + c.case_id +
                                    " skipped in ablation: no gold metadata");
            }
            continue;
        }
        if (c.responses.empty()) {
            if (warnings) {
                warnings->push_back("case " + c.case_id + " skipped in ablation: no references");
            }
            continue;
        }
        usable.push_back(&c);
    }
    if (usable.empty()) throw Error("run_ablation: no cases with gold metadata and references");

    std::vector<AblationResult> results;
    std::map<std::string, double> scores;
    for (const auto& config : AblationConfig::all_nine()) {
        try {
            metrics::CorpusDeltaBleu corpus_bleu;
            for (const Case* c : usable) {
                auto prediction = prediction_from_gold(*c, config.included_categories());
                auto decision = apply_confidence_gate(prediction, options.gate_threshold);
                auto bundle = prompts::build_gated_response_prompt(*c, prediction, decision);
                auto request = prompts::to_chat_request(bundle, options.decoding);
                auto completion = gateway.complete(request);
                corpus_bleu.add(text::metric_tokens(completion.completion.text),
                                weighted_references(*c));
            }
            scores[config.name()] = corpus_bleu.score();
        } catch (const std::exception& e) {
            AblationResult failed;
            failed.config = config;
            failed.failed = true;
            failed.error = e.what();
            results.push_back(std::move(failed));
        }
    }

    if (!scores.count("all_metadata")) {
        // baseline itself failed; report raw scores without drops
        for (const auto& config : AblationConfig::all_nine()) {
            auto it = scores.find(config.name());
            if (it == scores.end()) continue;
            AblationResult result;
            result.config = config;
            result.delta_bleu = it->second;
            results.push_back(std::move(result));
        }
        return results;
    }

    double baseline = scores.at("all_metadata");
    for (const auto& config : AblationConfig::all_nine()) {
        auto it = scores.find(config.name());
        if (it == scores.end()) continue;  // already recorded as failed
        AblationResult result;
        result.config = config;
        result.delta_bleu = it->second;
        if (config.kind != AblationConfig::Kind::all_metadata) {
            result.performance_drop = compute_drop(it->second, baseline);
        }
        results.push_back(std::move(result));
    }
    std::sort(results.begin(), results.end(), [](const AblationResult& a, const AblationResult& b) {
        auto order = [](const AblationResult& r) {
            const auto nine = AblationConfig::all_nine();
            for (size_t i = 0; i < nine.size(); ++i) {
                if (nine[i].name() == r.config.name()) return i;
            }
            return nine.size();
        };
        return order(a) < order(b);
    });
    return results;
}

// ---------------------------------------------------------------------------
// Feature selection
// ---------------------------------------------------------------------------

std::vector<MetadataCategory> FeatureSelection::categories() const {
    std::vector<MetadataCategory> out;
    out.reserve(selected.size());
    for (const auto& f : selected) out.push_back(f.category);
    return out;
}

FeatureSelection select_features(const std::vector<AblationResult>& ablation,
                                 const IAATable& iaa, SelectionRule rule) {
    std::map<MetadataCategory, double> drop_by_category;
    for (const auto& result : ablation) {
        if (result.config.kind != AblationConfig::Kind::without_category || result.failed) {
            continue;
        }
        if (!result.performance_drop) {
            throw Error("select_features: leave-one-out row '" + result.config.name() +
                        "' has no drop");
        }
        drop_by_category[*result.config.removed] = *result.performance_drop;
    }
    if (drop_by_category.size() != kAllCategories.size()) {
        throw Error("select_features: ablation must cover all 7 categories, found " +
                    std::to_string(drop_by_category.size()));
    }

    FeatureSelection selection;
    selection.rule = rule;

    std::vector<SelectedFeature> eligible;
    for (const auto& [category, drop] : drop_by_category) {
        if (drop >= 0.0) continue;  // only degradations signal importance
        double agreement = iaa.at(category);
        if (agreement < rule.iaa_floor) {
            selection.warnings.push_back(std::string(to_string(category)) +
                                         " excluded: IAA below floor");
            continue;
        }
        eligible.push_back({category, drop, agreement});
    }
    std::sort(eligible.begin(), eligible.end(), [](const SelectedFeature& a,
                                                   const SelectedFeature& b) {
        if (a.drop != b.drop) return a.drop < b.drop;  // most negative first
        return to_string(a.category) < to_string(b.category);
    });
    if (static_cast<int>(eligible.size()) < rule.top_k_by_negative_drop) {
        selection.warnings.push_back("only " + std::to_string(eligible.size()) +
                                     " categories have negative drops (requested " +
                                     std::to_string(rule.top_k_by_negative_drop) + ")");
    }
    if (static_cast<int>(eligible.size()) > rule.top_k_by_negative_drop) {
        eligible.resize(static_cast<size_t>(rule.top_k_by_negative_drop));
    }
    selection.selected = std::move(eligible);
    return selection;
}

// ---------------------------------------------------------------------------
// Manifests and reports
// ---------------------------------------------------------------------------

json RunManifest::to_json() const {
    json j;
    j["tool_version"] = tool_version;
    j["timestamp_utc"] = timestamp_utc;
    j["config_digest"] = config_digest;
    j["config"] = config;
    json providers_json = json::array();
    for (const auto& p : providers) {
        providers_json.push_back({{"name", p.name}, {"model", p.model}, {"version", p.version}});
    }
    j["providers"] = std::move(providers_json);
    j["embedder"] = {{"name", embedder.name}, {"version", embedder.version},
                     {"dim", embedder.dim}};
    j["corpus_digest"] = corpus_digest;
    j["cache"] = {{"hits", cache_hits}, {"provider_calls", provider_calls}};
    if (report) j["metric_report"] = metrics::report_to_json(*report);
    return j;
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.timestamp_utc = j.at("timestamp_utc").get<std::string>();
    m.config_digest = j.at("config_digest").get<std::string>();
    m.config = j.at("config");
    for (const auto& p : j.at("providers")) {
        m.providers.push_back({p.at("name").get<std::string>(), p.at("model").get<std::string>(),
                               p.at("version").get<std::string>()});
    }
    m.embedder = {j.at("embedder").at("name").get<std::string>(),
                  j.at("embedder").at("version").get<std::string>(),
                  j.at("embedder").at("dim").get<int>()};
    m.corpus_digest = j.at("corpus_digest").get<std::string>();
    m.cache_hits = j.at("cache").at("hits").get<int64_t>();
    m.provider_calls = j.at("cache").at("provider_calls").get<int64_t>();
    if (j.contains("metric_report")) {
        m.report = metrics::report_from_json(j.at("metric_report"));
    }
    return m;
}

namespace {

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string drop_cell(const AblationResult& r, bool signed_plus) {
    if (!r.performance_drop) return "-";
    double d = *r.performance_drop;
    if (signed_plus && d > 0) return "+" + fmt3(d);
    return fmt3(d);
}

}  // namespace

std::string ablation_report(const std::vector<AblationResult>& results, ReportFormat format) {
    if (format == ReportFormat::json) {
        json rows = json::array();
        for (const auto& r : results) {
            json row;
            row["configuration"] = r.config.name();
            if (r.failed) {
                row["failed"] = true;
                row["error"] = r.error;
            } else {
                row["delta_bleu"] = r.delta_bleu;
                if (r.performance_drop) row["performance_drop"] = *r.performance_drop;
            }
            rows.push_back(std::move(row));
        }
        return json{{"ablation", rows}}.dump(2) + "\n";
    }
    if (format == ReportFormat::csv) {
        std::string out = "configuration,delta_bleu,performance_drop\n";
        for (const auto& r : results) {
            out += r.config.name();
            out += ',';
            out += r.failed ? "failed" : fmt3(r.delta_bleu);
            out += ',';
            if (!r.failed && r.performance_drop) out += fmt3(*r.performance_drop);
            out += '\n';
        }
        return out;
    }
    std::string out = "| System Configuration | deltaBLEU | Performance Drop |\n";
    out += "|---|---|---|\n";
    for (const auto& r : results) {
        out += "| " + r.config.name() + " | ";
        out += r.failed ? "failed" : fmt3(r.delta_bleu);
        out += " | " + (r.failed ? std::string("-") : drop_cell(r, true)) + " |\n";
    }
    return out;
}

std::string manifest_report(const RunManifest& manifest, ReportFormat format) {
    if (format == ReportFormat::json) return manifest.to_json().dump(2) + "\n";
    if (format == ReportFormat::csv) {
        std::string out = "key,value\n";
        out += "tool_version," + manifest.tool_version + "\n";
        out += "timestamp_utc," + manifest.timestamp_utc + "\n";
        out += "config_digest," + manifest.config_digest + "\n";
        out += "corpus_digest," + manifest.corpus_digest + "\n";
        out += "cache_hits," + std::to_string(manifest.cache_hits) + "\n";
        out += "provider_calls," + std::to_string(manifest.provider_calls) + "\n";
        return out;
    }
    std::string out = "# Run manifest\n\n";
    out += "- tool: " + manifest.tool_version + "\n";
    out += "- timestamp: " + manifest.timestamp_utc + "\n";
    out += "- config digest: " + manifest.config_digest + "\n";
    out += "- corpus digest: " + manifest.corpus_digest + "\n";
    for (const auto& p : manifest.providers) {
        out += "- provider: " + p.name + " / " + p.model + " (v" + p.version + ")\n";
    }
    out += "- embedder: " + manifest.embedder.name + " dim " +
           std::to_string(manifest.embedder.dim) + "\n";
    out += "- cache hits: " + std::to_string(manifest.cache_hits) + ", provider calls: " +
           std::to_string(manifest.provider_calls) + "\n";
    return out;
}

json selection_to_json(const FeatureSelection& selection) {
    json selected = json::array();
    for (const auto& f : selection.selected) {
        selected.push_back({{"category", std::string(to_string(f.category))},
                            {"drop", f.drop},
                            {"iaa", f.iaa}});
    }
    json j;
    j["selected"] = std::move(selected);
    j["rule"] = {{"top_k_by_negative_drop", selection.rule.top_k_by_negative_drop},
                 {"iaa_floor", selection.rule.iaa_floor}};
    if (!selection.warnings.empty()) j["warnings"] = selection.warnings;
    return j;
}

}  // namespace wvqa::experiments
