#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wvqa/corpus.hpp"
#include "wvqa/embedding.hpp"

namespace wvqa::metrics {

// ---------------------------------------------------------------------------
// Response weights
// ---------------------------------------------------------------------------

/// The four quality criteria behind reference weights. A criterion whose
/// source field is absent counts as not met.
struct WeightCriteria {
    bool expertise_ge_4 = false;
    bool validated_md = false;
    bool most_frequent = false;
    bool answers_completely = false;

    static WeightCriteria from_response(const ExpertResponse& response);
};

/// Weight rule: base 1.0, discounted to 0.9 when the answer is incomplete,
/// minus 0.1 per unmet criterion among expertise/validation/frequency;
/// clamped at 0. Image over all inputs is {0.6, 0.7, 0.8, 0.9, 1.0}.
double compute_response_weight(const WeightCriteria& criteria);

/// Weight for a reference response: precomputed_weight when present,
/// otherwise computed from the criteria fields.
double response_weight(const ExpertResponse& response);

// ---------------------------------------------------------------------------
// deltaBLEU
// ---------------------------------------------------------------------------

struct WeightedReference {
    std::vector<std::string> tokens;
    double weight = 1.0;
};

/// Sentence-level weighted multi-reference BLEU on the 0-100 scale.
///
/// Per candidate n-gram type, matched credit is the maximum over references
/// containing the n-gram of (reference weight x occurrence count clipped
/// against that reference). Modified precision p_n divides total credit by
/// the candidate n-gram count. Orders with no candidate n-grams are dropped
/// from the geometric mean (effective order); zero numerators are smoothed
/// with a 1e-9 epsilon so no-overlap candidates score ~0 instead of -inf.
/// The brevity penalty uses the reference length closest to the candidate's
/// (ties to the shorter).
double sentence_delta_bleu(const std::vector<std::string>& candidate,
                           const std::vector<WeightedReference>& references, int max_n = 4);

/// Corpus-level deltaBLEU: numerators/denominators and lengths are summed
/// over cases before the geometric mean; raw counts, no smoothing.
class CorpusDeltaBleu {
public:
    explicit CorpusDeltaBleu(int max_n = 4);

    void add(const std::vector<std::string>& candidate,
             const std::vector<WeightedReference>& references);

    double score() const;
    size_t case_count() const { return cases_; }

private:
    int max_n_;
    size_t cases_ = 0;
    std::vector<double> matched_;
    std::vector<double> total_;
    long long candidate_length_ = 0;
    long long reference_length_ = 0;
};

// ---------------------------------------------------------------------------
// ROUGE
// ---------------------------------------------------------------------------

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// N-gram overlap with per-type clipping; 0 when either side has no n-grams.
PRF rouge_n(const std::vector<std::string>& candidate, const std::vector<std::string>& reference,
            int n);

/// Longest-common-subsequence ROUGE: recall = LCS/|ref|, precision = LCS/|cand|.
PRF rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

/// Summary-level ROUGE-L: texts are split into sentences (newline/terminal
/// punctuation); per reference sentence the union of LCS matches across
/// candidate sentences is counted, with double-counting capped by token
/// budgets on both sides.
PRF rouge_lsum(std::string_view candidate_text, std::string_view reference_text);

/// Dynamic-programming LCS length (shared by rouge_l / rouge_lsum).
size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

// ---------------------------------------------------------------------------
// Embedding-based semantic score
// ---------------------------------------------------------------------------

/// BERTScore-style greedy token matching: recall is the mean over reference
/// tokens of the best cosine against candidate tokens; precision symmetric;
/// f1 harmonic. Token vectors come from the embedding provider.
PRF semantic_score(std::string_view candidate, std::string_view reference,
                   EmbeddingProvider& embedder);

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

enum class AggregateMode { mean_of_mean, mean_of_max };

/// Collapse one case's per-reference scores (mean or max).
double aggregate_case(const std::vector<double>& per_reference_scores, AggregateMode mode);

/// Collapse per-case score lists, then average across cases.
double aggregate_multi_reference(const std::vector<std::vector<double>>& per_case_scores,
                                 AggregateMode mode);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Flat metric report mirroring the published table rows. Missing inputs stay
/// unset; derive() fills the *_avg fields from present constituents.
struct MetricReport {
    std::optional<double> delta_bleu;  // 0-100 scale
    std::optional<double> rouge_1;
    std::optional<double> rouge_2;
    std::optional<double> rouge_l;
    std::optional<double> rouge_lsum;
    std::optional<double> bert_mean_of_mean;
    std::optional<double> bert_mean_of_max;
    std::map<std::string, double> judge_scores;

    std::optional<double> rouge_avg;
    std::optional<double> bert_avg;
    std::optional<double> judge_avg;
};

/// Fill derived averages; throws naming the first missing constituent.
MetricReport aggregate_report(const MetricReport& inputs);

/// Fill whatever derived averages have all constituents present.
MetricReport aggregate_report_partial(const MetricReport& inputs);

nlohmann::json report_to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& j);

/// CSV table, one row per named system, fixed column order.
std::string reports_to_csv(const std::vector<std::pair<std::string, MetricReport>>& reports);

}  // namespace wvqa::metrics
