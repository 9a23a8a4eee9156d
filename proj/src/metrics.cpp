#include "wvqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "wvqa/error.hpp"
#include "wvqa/text.hpp"

namespace wvqa::metrics {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Response weights
// ---------------------------------------------------------------------------

WeightCriteria WeightCriteria::from_response(const ExpertResponse& response) {
    WeightCriteria c;
    c.expertise_ge_4 = response.expertise_level.has_value() && *response.expertise_level >= 4;
    c.validated_md = response.validated_md.value_or(false);
    c.most_frequent = response.most_frequent.value_or(false);
    c.answers_completely = response.answers_completely.value_or(false);
    return c;
}

double compute_response_weight(const WeightCriteria& criteria) {
    double weight = criteria.answers_completely ? 1.0 : 0.9;
    if (!criteria.expertise_ge_4) weight -= 0.1;
    if (!criteria.validated_md) weight -= 0.1;
    if (!criteria.most_frequent) weight -= 0.1;
    return std::max(weight, 0.0);
}

double response_weight(const ExpertResponse& response) {
    if (response.precomputed_weight) return *response.precomputed_weight;
    return compute_response_weight(WeightCriteria::from_response(response));
}

// ---------------------------------------------------------------------------
// n-gram machinery
// ---------------------------------------------------------------------------

namespace {

constexpr double kSentenceEpsilon = 1e-9;

using NgramCounts = std::unordered_map<std::string, int>;

std::string ngram_key(const std::vector<std::string>& tokens, size_t start, int n) {
    std::string key;
    for (int i = 0; i < n; ++i) {
        if (i) key.push_back('\x1f');
        key += tokens[start + i];
    }
    return key;
}

NgramCounts count_ngrams(const std::vector<std::string>& tokens, int n) {
    NgramCounts counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        ++counts[ngram_key(tokens, i, n)];
    }
    return counts;
}

/// Weighted matched credit for one order: per candidate n-gram type, the best
/// reference gives weight x clipped occurrence count.
double weighted_matches(const NgramCounts& candidate_counts,
                        const std::vector<std::pair<NgramCounts, double>>& reference_counts) {
    double credit = 0.0;
    for (const auto& [gram, cand_count] : candidate_counts) {
        double best = 0.0;
        for (const auto& [ref_counts, weight] : reference_counts) {
            auto it = ref_counts.find(gram);
            if (it == ref_counts.end()) continue;
            best = std::max(best, weight * std::min(cand_count, it->second));
        }
        credit += best;
    }
    return credit;
}

/// Reference length closest to the candidate's; ties go to the shorter.
long long closest_reference_length(size_t candidate_length,
                                   const std::vector<WeightedReference>& references) {
    long long best_len = 0;
    long long best_diff = -1;
    for (const auto& ref : references) {
        auto len = static_cast<long long>(ref.tokens.size());
        long long diff = std::llabs(len - static_cast<long long>(candidate_length));
        if (best_diff < 0 || diff < best_diff || (diff == best_diff && len < best_len)) {
            best_diff = diff;
            best_len = len;
        }
    }
    return best_len;
}

void check_bleu_inputs(const std::vector<WeightedReference>& references, int max_n) {
    if (references.empty()) throw Error("delta_bleu: empty reference list");
    if (max_n < 1) throw Error("delta_bleu: max_n must be >= 1");
    for (const auto& ref : references) {
        if (ref.tokens.empty()) throw Error("delta_bleu: reference token sequence is empty");
        if (ref.weight < 0.0 || ref.weight > 1.0) {
            throw Error("delta_bleu: reference weight must lie in [0,1]");
        }
    }
}

}  // namespace

double sentence_delta_bleu(const std::vector<std::string>& candidate,
                           const std::vector<WeightedReference>& references, int max_n) {
    check_bleu_inputs(references, max_n);
    if (candidate.empty()) return 0.0;

    double log_sum = 0.0;
    int effective_orders = 0;
    for (int n = 1; n <= max_n; ++n) {
        auto denom = static_cast<double>(
            std::max<long long>(static_cast<long long>(candidate.size()) - n + 1, 0));
        if (denom == 0.0) continue;  // effective order: short candidates skip high n
        std::vector<std::pair<NgramCounts, double>> ref_counts;
        ref_counts.reserve(references.size());
        for (const auto& ref : references) {
            ref_counts.emplace_back(count_ngrams(ref.tokens, n), ref.weight);
        }
        double num = weighted_matches(count_ngrams(candidate, n), ref_counts);
        double p = (num + kSentenceEpsilon) / (denom + kSentenceEpsilon);
        log_sum += std::log(p);
        ++effective_orders;
    }
    if (effective_orders == 0) return 0.0;

    long long ref_len = closest_reference_length(candidate.size(), references);
    auto cand_len = static_cast<long long>(candidate.size());
    double bp = cand_len >= ref_len
                    ? 1.0
                    : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
    return bp * std::exp(log_sum / effective_orders) * 100.0;
}

CorpusDeltaBleu::CorpusDeltaBleu(int max_n) : max_n_(max_n) {
    if (max_n_ < 1) throw Error("delta_bleu: max_n must be >= 1");
    matched_.assign(static_cast<size_t>(max_n_), 0.0);
    total_.assign(static_cast<size_t>(max_n_), 0.0);
}

void CorpusDeltaBleu::add(const std::vector<std::string>& candidate,
                          const std::vector<WeightedReference>& references) {
    check_bleu_inputs(references, max_n_);
    ++cases_;
    for (int n = 1; n <= max_n_; ++n) {
        auto denom = static_cast<long long>(candidate.size()) - n + 1;
        if (denom <= 0) continue;
        std::vector<std::pair<NgramCounts, double>> ref_counts;
        ref_counts.reserve(references.size());
        for (const auto& ref : references) {
            ref_counts.emplace_back(count_ngrams(ref.tokens, n), ref.weight);
        }
        matched_[n - 1] += weighted_matches(count_ngrams(candidate, n), ref_counts);
        total_[n - 1] += static_cast<double>(denom);
    }
    candidate_length_ += static_cast<long long>(candidate.size());
    reference_length_ += closest_reference_length(candidate.size(), references);
}

double CorpusDeltaBleu::score() const {
    if (cases_ == 0 || candidate_length_ == 0) return 0.0;
    double log_sum = 0.0;
    int effective_orders = 0;
    for (int n = 0; n < max_n_; ++n) {
        if (total_[n] == 0.0) continue;
        double p = matched_[n] / total_[n];
        if (p == 0.0) return 0.0;  // raw counts at corpus level, no smoothing
        log_sum += std::log(p);
        ++effective_orders;
    }
    if (effective_orders == 0) return 0.0;
    double bp = candidate_length_ >= reference_length_
                    ? 1.0
                    : std::exp(1.0 - static_cast<double>(reference_length_) /
                                         static_cast<double>(candidate_length_));
    return bp * std::exp(log_sum / effective_orders) * 100.0;
}

// ---------------------------------------------------------------------------
// ROUGE
// ---------------------------------------------------------------------------

namespace {

PRF make_prf(double hits, double candidate_total, double reference_total) {
    PRF score;
    score.precision = candidate_total > 0.0 ? hits / candidate_total : 0.0;
    score.recall = reference_total > 0.0 ? hits / reference_total : 0.0;
    double pr = score.precision + score.recall;
    score.f1 = pr > 0.0 ? 2.0 * score.precision * score.recall / pr : 0.0;
    return score;
}

}  // namespace

PRF rouge_n(const std::vector<std::string>& candidate, const std::vector<std::string>& reference,
            int n) {
    if (n < 1) throw Error("rouge_n: n must be >= 1");
    NgramCounts cand = count_ngrams(candidate, n);
    NgramCounts ref = count_ngrams(reference, n);
    double hits = 0.0;
    for (const auto& [gram, count] : cand) {
        auto it = ref.find(gram);
        if (it != ref.end()) hits += std::min(count, it->second);
    }
    auto cand_total = static_cast<double>(
        std::max<long long>(static_cast<long long>(candidate.size()) - n + 1, 0));
    auto ref_total = static_cast<double>(
        std::max<long long>(static_cast<long long>(reference.size()) - n + 1, 0));
    return make_prf(hits, cand_total, ref_total);
}

size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<size_t> prev(b.size() + 1, 0);
    std::vector<size_t> curr(b.size() + 1, 0);
    for (size_t i = 1; i <= a.size(); ++i) {
        for (size_t j = 1; j <= b.size(); ++j) {
            curr[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], curr[j - 1]);
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

PRF rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
    auto lcs = static_cast<double>(lcs_length(candidate, reference));
    return make_prf(lcs, static_cast<double>(candidate.size()),
                    static_cast<double>(reference.size()));
}

namespace {

/// Reference-side indices matched by the canonical LCS backtrack.
std::vector<size_t> lcs_match_positions(const std::vector<std::string>& reference,
                                        const std::vector<std::string>& candidate) {
    size_t m = reference.size(), n = candidate.size();
    if (m == 0 || n == 0) return {};
    std::vector<std::vector<unsigned short>> dp(m + 1, std::vector<unsigned short>(n + 1, 0));
    for (size_t i = 1; i <= m; ++i) {
        for (size_t j = 1; j <= n; ++j) {
            dp[i][j] = reference[i - 1] == candidate[j - 1]
                           ? static_cast<unsigned short>(dp[i - 1][j - 1] + 1)
                           : std::max(dp[i - 1][j], dp[i][j - 1]);
        }
    }
    std::vector<size_t> positions;
    size_t i = m, j = n;
    while (i > 0 && j > 0) {
        if (reference[i - 1] == candidate[j - 1] && dp[i][j] == dp[i - 1][j - 1] + 1) {
            positions.push_back(i - 1);
            --i;
            --j;
        } else if (dp[i - 1][j] >= dp[i][j - 1]) {
            --i;
        } else {
            --j;
        }
    }
    std::reverse(positions.begin(), positions.end());
    return positions;
}

}  // namespace

PRF rouge_lsum(std::string_view candidate_text, std::string_view reference_text) {
    std::vector<std::vector<std::string>> cand_sents;
    for (const auto& s : text::split_sentences(candidate_text)) {
        auto tokens = text::metric_tokens(s);
        if (!tokens.empty()) cand_sents.push_back(std::move(tokens));
    }
    std::vector<std::vector<std::string>> ref_sents;
    for (const auto& s : text::split_sentences(reference_text)) {
        auto tokens = text::metric_tokens(s);
        if (!tokens.empty()) ref_sents.push_back(std::move(tokens));
    }

    size_t cand_total = 0, ref_total = 0;
    std::unordered_map<std::string, int> cand_budget, ref_budget;
    for (const auto& s : cand_sents) {
        cand_total += s.size();
        for (const auto& t : s) ++cand_budget[t];
    }
    for (const auto& s : ref_sents) {
        ref_total += s.size();
        for (const auto& t : s) ++ref_budget[t];
    }
    if (cand_total == 0 || ref_total == 0) return {};

    double hits = 0.0;
    for (const auto& ref_sent : ref_sents) {
        std::set<size_t> matched;
        for (const auto& cand_sent : cand_sents) {
            for (size_t pos : lcs_match_positions(ref_sent, cand_sent)) {
                matched.insert(pos);
            }
        }
        // union hits, capped by remaining token budgets on both sides
        for (size_t pos : matched) {
            const std::string& token = ref_sent[pos];
            auto cit = cand_budget.find(token);
            auto rit = ref_budget.find(token);
            if (cit != cand_budget.end() && cit->second > 0 && rit->second > 0) {
                hits += 1.0;
                --cit->second;
                --rit->second;
            }
        }
    }
    return make_prf(hits, static_cast<double>(cand_total), static_cast<double>(ref_total));
}

// ---------------------------------------------------------------------------
// Semantic score
// ---------------------------------------------------------------------------

PRF semantic_score(std::string_view candidate, std::string_view reference,
                   EmbeddingProvider& embedder) {
    auto cand_tokens = text::metric_tokens(candidate);
    auto ref_tokens = text::metric_tokens(reference);
    if (cand_tokens.empty() || ref_tokens.empty()) return {};

    std::vector<std::string> all;
    all.reserve(cand_tokens.size() + ref_tokens.size());
    all.insert(all.end(), cand_tokens.begin(), cand_tokens.end());
    all.insert(all.end(), ref_tokens.begin(), ref_tokens.end());
    auto vectors = embedder.embed(all);

    auto cosine_at = [&](size_t i, size_t j) {
        return cosine_similarity(vectors[i], vectors[cand_tokens.size() + j]);
    };

    double recall_sum = 0.0;
    for (size_t j = 0; j < ref_tokens.size(); ++j) {
        double best = -1.0;
        for (size_t i = 0; i < cand_tokens.size(); ++i) best = std::max(best, cosine_at(i, j));
        recall_sum += best;
    }
    double precision_sum = 0.0;
    for (size_t i = 0; i < cand_tokens.size(); ++i) {
        double best = -1.0;
        for (size_t j = 0; j < ref_tokens.size(); ++j) best = std::max(best, cosine_at(i, j));
        precision_sum += best;
    }

    PRF score;
    score.precision = precision_sum / static_cast<double>(cand_tokens.size());
    score.recall = recall_sum / static_cast<double>(ref_tokens.size());
    double pr = score.precision + score.recall;
    score.f1 = pr > 0.0 ? 2.0 * score.precision * score.recall / pr : 0.0;
    return score;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

double aggregate_case(const std::vector<double>& per_reference_scores, AggregateMode mode) {
    if (per_reference_scores.empty()) {
        throw Error("aggregate: empty per-reference score list");
    }
    if (mode == AggregateMode::mean_of_max) {
        return *std::max_element(per_reference_scores.begin(), per_reference_scores.end());
    }
    return std::accumulate(per_reference_scores.begin(), per_reference_scores.end(), 0.0) /
           static_cast<double>(per_reference_scores.size());
}

double aggregate_multi_reference(const std::vector<std::vector<double>>& per_case_scores,
                                 AggregateMode mode) {
    if (per_case_scores.empty()) throw Error("aggregate: empty case list");
    double sum = 0.0;
    for (const auto& scores : per_case_scores) {
        sum += aggregate_case(scores, mode);
    }
    return sum / static_cast<double>(per_case_scores.size());
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

double require(const std::optional<double>& value, const char* field) {
    if (!value) throw Error(std::string("aggregate_report: missing constituent '") + field + "'");
    return *value;
}

std::optional<double> derive_rouge(const MetricReport& r, bool strict) {
    if (strict || (r.rouge_1 && r.rouge_2 && r.rouge_l && r.rouge_lsum)) {
        return (require(r.rouge_1, "rouge_1") + require(r.rouge_2, "rouge_2") +
                require(r.rouge_l, "rouge_l") + require(r.rouge_lsum, "rouge_lsum")) /
               4.0;
    }
    return std::nullopt;
}

std::optional<double> derive_bert(const MetricReport& r, bool strict) {
    if (strict || (r.bert_mean_of_mean && r.bert_mean_of_max)) {
        return (require(r.bert_mean_of_mean, "bert_mean_of_mean") +
                require(r.bert_mean_of_max, "bert_mean_of_max")) /
               2.0;
    }
    return std::nullopt;
}

std::optional<double> derive_judge(const MetricReport& r, bool strict) {
    if (r.judge_scores.empty()) {
        if (strict) throw Error("aggregate_report: missing constituent 'judge_scores'");
        return std::nullopt;
    }
    double sum = 0.0;
    for (const auto& [name, score] : r.judge_scores) sum += score;
    return sum / static_cast<double>(r.judge_scores.size());
}

}  // namespace

MetricReport aggregate_report(const MetricReport& inputs) {
    MetricReport report = inputs;
    report.rouge_avg = derive_rouge(inputs, /*strict=*/true);
    report.bert_avg = derive_bert(inputs, /*strict=*/true);
    report.judge_avg = derive_judge(inputs, /*strict=*/true);
    return report;
}

MetricReport aggregate_report_partial(const MetricReport& inputs) {
    MetricReport report = inputs;
    report.rouge_avg = derive_rouge(inputs, /*strict=*/false);
    report.bert_avg = derive_bert(inputs, /*strict=*/false);
    report.judge_avg = derive_judge(inputs, /*strict=*/false);
    return report;
}

json report_to_json(const MetricReport& report) {
    json j = json::object();
    auto put = [&](const char* key, const std::optional<double>& value) {
        if (value) j[key] = *value;
    };
    put("delta_bleu", report.delta_bleu);
    put("rouge_1", report.rouge_1);
    put("rouge_2", report.rouge_2);
    put("rouge_l", report.rouge_l);
    put("rouge_lsum", report.rouge_lsum);
    put("bert_mean_of_mean", report.bert_mean_of_mean);
    put("bert_mean_of_max", report.bert_mean_of_max);
    if (!report.judge_scores.empty()) j["judge_scores"] = report.judge_scores;
    put("rouge_avg", report.rouge_avg);
    put("bert_avg", report.bert_avg);
    put("judge_avg", report.judge_avg);
    return j;
}

MetricReport report_from_json(const json& j) {
    MetricReport report;
    auto get = [&](const char* key) -> std::optional<double> {
        if (j.contains(key)) return j.at(key).get<double>();
        return std::nullopt;
    };
    report.delta_bleu = get("delta_bleu");
    report.rouge_1 = get("rouge_1");
    report.rouge_2 = get("rouge_2");
    report.rouge_l = get("rouge_l");
    report.rouge_lsum = get("rouge_lsum");
    report.bert_mean_of_mean = get("bert_mean_of_mean");
    report.bert_mean_of_max = get("bert_mean_of_max");
    if (j.contains("judge_scores")) {
        report.judge_scores = j.at("judge_scores").get<std::map<std::string, double>>();
    }
    report.rouge_avg = get("rouge_avg");
    report.bert_avg = get("bert_avg");
    report.judge_avg = get("judge_avg");
    return report;
}

std::string reports_to_csv(const std::vector<std::pair<std::string, MetricReport>>& reports) {
    std::string out =
        "system,delta_bleu,rouge_1,rouge_2,rouge_l,rouge_lsum,"
        "bert_mean_of_mean,bert_mean_of_max,rouge_avg,bert_avg,judge_avg\n";
    auto cell = [](const std::optional<double>& value) -> std::string {
        if (!value) return "";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", *value);
        return buf;
    };
    for (const auto& [system, r] : reports) {
        out += system;
        for (const auto& v : {r.delta_bleu, r.rouge_1, r.rouge_2, r.rouge_l, r.rouge_lsum,
                              r.bert_mean_of_mean, r.bert_mean_of_max, r.rouge_avg, r.bert_avg,
                              r.judge_avg}) {
            out += ',';
            out += cell(v);
        }
        out += '\n';
    }
    return out;
}

}  // namespace wvqa::metrics
