#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wvqa/corpus.hpp"
#include "wvqa/metrics.hpp"
#include "wvqa/modelgate.hpp"
#include "wvqa/pipelines.hpp"

namespace wvqa::experiments {

// ---------------------------------------------------------------------------
// Ablation
// ---------------------------------------------------------------------------

/// The nine ablation configurations: full context, no metadata, and
/// leave-one-out for each of the seven categories.
struct AblationConfig {
    enum class Kind { all_metadata, no_metadata, without_category };
    Kind kind = Kind::all_metadata;
    std::optional<MetadataCategory> removed;  // set only for without_category

    std::string name() const;
    /// Categories embedded in the prompt under this configuration.
    std::vector<MetadataCategory> included_categories() const;

    static std::vector<AblationConfig> all_nine();
    static AblationConfig from_name(const std::string& name);
};

struct AblationResult {
    AblationConfig config;
    double delta_bleu = 0.0;
    std::optional<double> performance_drop;  // score - baseline; unset on baseline row
    bool failed = false;
    std::string error;
};

/// Signed drop: score - baseline.
double compute_drop(double score, double baseline);

/// Arithmetic layer: fill drops against the all-metadata baseline from a
/// score per configuration (order of the input map does not matter).
std::vector<AblationResult> ablation_from_scores(
    const std::map<std::string, double>& score_by_config);

/// Full ablation study: for each configuration, generate a response per case
/// with gold metadata embedded (the removed category excluded), then score
/// the configuration with corpus-level deltaBLEU against the weighted
/// references. A configuration whose generation fails is marked failed;
/// the others proceed.
std::vector<AblationResult> run_ablation(const std::vector<Case>& cases, Gateway& gateway,
                                         const PipelineOptions& options,
                                         std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// Feature selection
// ---------------------------------------------------------------------------

struct SelectionRule {
    int top_k_by_negative_drop = 4;
    double iaa_floor = 0.8;
};

struct SelectedFeature {
    MetadataCategory category;
    double drop = 0.0;
    double iaa = 0.0;
};

struct FeatureSelection {
    std::vector<SelectedFeature> selected;  // ordered by most negative drop
    SelectionRule rule;
    std::vector<std::string> warnings;

    std::vector<MetadataCategory> categories() const;
};

/// Rank categories by most negative drop, excluding non-negative drops and
/// categories whose IAA falls below the floor; keep the top k. The ablation
/// input must cover all seven categories.
FeatureSelection select_features(const std::vector<AblationResult>& ablation,
                                 const IAATable& iaa, SelectionRule rule = {});

// ---------------------------------------------------------------------------
// Run manifests and reports
// ---------------------------------------------------------------------------

/// Frozen record of one experiment; together with the response cache it
/// makes a re-run bit-identical.
struct RunManifest {
    std::string tool_version;
    std::string timestamp_utc;
    std::string config_digest;
    nlohmann::json config;  // embedded config document (round-trips)
    std::vector<ProviderIdentity> providers;
    EmbedderIdentity embedder;
    std::string corpus_digest;
    int64_t cache_hits = 0;
    int64_t provider_calls = 0;
    std::optional<metrics::MetricReport> report;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

enum class ReportFormat { json, csv, markdown };

/// Ablation table in the requested format; deterministic row order
/// (baseline, no-metadata, then leave-one-out in category order).
std::string ablation_report(const std::vector<AblationResult>& results, ReportFormat format);

std::string manifest_report(const RunManifest& manifest, ReportFormat format);

nlohmann::json selection_to_json(const FeatureSelection& selection);

}  // namespace wvqa::experiments
