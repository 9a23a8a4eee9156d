#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wvqa/corpus.hpp"
#include "wvqa/modelgate.hpp"
#include "wvqa/pipeline_types.hpp"
#include "wvqa/prompts.hpp"
#include "wvqa/retrieval.hpp"

namespace wvqa {

// ---------------------------------------------------------------------------
// Stage-1 output parsing
// ---------------------------------------------------------------------------

/// Parse the classifier's JSON output. Strict mode requires the raw text to
/// be exactly one JSON object; lenient mode salvages the first balanced JSON
/// object embedded in prose. Locations with score <= 0.25 are dropped and the
/// rest re-sorted descending; overall certainty is recomputed from the field
/// confidences and overrides the model-reported value (with a warning) when
/// they disagree beyond 1e-6. Out-of-vocabulary labels raise ParseError.
MetadataPrediction parse_classification_json(const std::string& raw, const VocabularySet& vocab,
                                             bool lenient = false);

/// First balanced top-level JSON object inside `raw` (string-literal aware);
/// nullopt when none exists.
std::optional<std::string> extract_json_object(const std::string& raw);

// ---------------------------------------------------------------------------
// Token budget
// ---------------------------------------------------------------------------

struct BudgetResult {
    std::string text;
    bool violation = false;
};

/// Count whitespace tokens against the budget; flag overruns. Truncation to
/// the first `budget` tokens only when requested.
BudgetResult enforce_token_budget(const std::string& text, int budget = 50,
                                  bool truncate = false);

// ---------------------------------------------------------------------------
// Pipeline runners
// ---------------------------------------------------------------------------

struct PipelineOptions {
    Decoding decoding;
    double gate_threshold = 0.7;
    int classification_fewshot_k = 5;
    int budget_tokens = 50;
    bool budget_truncate = false;
    bool lenient_parse = false;
    int concurrency = 4;
};

/// Per-case outcome; failed cases carry `error` and never abort the batch.
struct CaseRunResult {
    std::string case_id;
    std::string response_text;
    std::string prompt_digest;  // digest of the generation request
    std::optional<MetadataPrediction> prediction;
    std::optional<GateDecision> decision;
    std::optional<std::string> stage1_digest;
    bool budget_violation = false;
    bool parse_fallback = false;
    std::optional<std::string> error;

    bool failed() const { return error.has_value(); }
};

/// Mined few-shot generation: retrieve top-k training neighbours, render the
/// few-shot prompt, complete through the gateway. Results keep input order.
std::vector<CaseRunResult> run_fewshot_pipeline(const std::vector<Case>& cases,
                                                const CaseIndex& train_cases,
                                                const EmbeddingIndex& index,
                                                EmbeddingProvider& embedder,
                                                const FewShotConfig& config, Gateway& gateway,
                                                const PipelineOptions& options);

/// Two-stage metadata pipeline: classify with confidence scores, gate at the
/// threshold, then generate the gated response. A stage-1 parse failure falls
/// back to an all-caution empty prediction; stage 2 still runs.
std::vector<CaseRunResult> run_metadata_pipeline(const std::vector<Case>& cases,
                                                 const CaseIndex& train_cases,
                                                 const EmbeddingIndex& index,
                                                 EmbeddingProvider& embedder,
                                                 const VocabularySet& vocab, Gateway& gateway,
                                                 const PipelineOptions& options);

/// Training cases with gold metadata most similar to the query, for stage-1
/// few-shot examples.
std::vector<const Case*> classification_examples(const Case& test_case,
                                                 const CaseIndex& train_cases,
                                                 const EmbeddingIndex& index,
                                                 EmbeddingProvider& embedder, int k);

/// One JSONL line per case: {case_id, response_text, prediction?, decision?,
/// prompt_digest, ...flags}. Deterministic field order.
std::string results_to_jsonl(const std::vector<CaseRunResult>& results);
std::vector<CaseRunResult> results_from_jsonl(const std::string& jsonl);

}  // namespace wvqa
