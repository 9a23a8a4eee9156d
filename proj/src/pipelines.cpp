#include "wvqa/pipelines.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "wvqa/error.hpp"
#include "wvqa/text.hpp"

namespace wvqa {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Stage-1 output parsing
// ---------------------------------------------------------------------------

std::optional<std::string> extract_json_object(const std::string& raw) {
    auto start = raw.find('{');
    while (start != std::string::npos) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (size_t i = start; i < raw.size(); ++i) {
            char c = raw[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                --depth;
                if (depth == 0) return raw.substr(start, i - start + 1);
            }
        }
        start = raw.find('{', start + 1);
    }
    return std::nullopt;
}

namespace {

constexpr double kLocationScoreCut = 0.25;
constexpr double kCertaintyTolerance = 1e-6;

double read_score(const json& j, const std::string& what) {
    if (!j.is_number()) throw ParseError("classification: " + what + " is not a number");
    double v = j.get<double>();
    if (v < 0.0 || v > 1.0) throw ParseError("classification: " + what + " outside [0,1]");
    return v;
}

std::string checked_label(const json& j, MetadataCategory category, const VocabularySet& vocab) {
    if (!j.is_string()) {
        throw ParseError("classification: label for " + std::string(to_string(category)) +
                         " is not a string");
    }
    std::string label = text::to_lower(text::trim(j.get<std::string>()));
    if (!vocab.at(category).contains(label)) {
        throw ParseError("classification: unknown label '" + label + "' for " +
                         std::string(to_string(category)));
    }
    return label;
}

}  // namespace

MetadataPrediction parse_classification_json(const std::string& raw, const VocabularySet& vocab,
                                             bool lenient) {
    json j;
    if (lenient) {
        auto object = extract_json_object(raw);
        if (!object) throw ParseError("classification: no JSON object found in output");
        try {
            j = json::parse(*object);
        } catch (const json::exception& e) {
            throw ParseError(std::string("classification: invalid JSON: ") + e.what());
        }
    } else {
        try {
            j = json::parse(raw);
        } catch (const json::exception& e) {
            throw ParseError(std::string("classification: output is not strict JSON: ") +
                             e.what());
        }
    }
    if (!j.is_object() || !j.contains("predictions") || !j.contains("scores")) {
        throw ParseError("classification: output must hold 'predictions' and 'scores'");
    }
    const json& predictions = j.at("predictions");
    const json& scores = j.at("scores");

    MetadataPrediction prediction;

    // anatomic_location: list of {label, score}, cut at 0.25, sorted descending
    {
        if (!predictions.contains("anatomic_locations") ||
            !predictions.at("anatomic_locations").is_array()) {
            throw ParseError("classification: missing 'anatomic_locations' list");
        }
        FieldConfidence field;
        field.category = MetadataCategory::anatomic_location;
        for (const auto& entry : predictions.at("anatomic_locations")) {
            if (!entry.is_object() || !entry.contains("label") || !entry.contains("score")) {
                throw ParseError("classification: location entries need label + score");
            }
            LabelScore ls;
            ls.label = checked_label(entry.at("label"), MetadataCategory::anatomic_location, vocab);
            ls.score = read_score(entry.at("score"), "location score");
            if (ls.score <= kLocationScoreCut) continue;  // dropped, not an error
            field.labels.push_back(std::move(ls));
        }
        std::stable_sort(field.labels.begin(), field.labels.end(),
                         [](const LabelScore& a, const LabelScore& b) {
                             if (a.score != b.score) return a.score > b.score;
                             return a.label < b.label;
                         });
        double sum = 0.0;
        for (const auto& ls : field.labels) sum += ls.score;
        field.field_confidence =
            field.labels.empty() ? 0.0 : sum / static_cast<double>(field.labels.size());
        prediction.fields[MetadataCategory::anatomic_location] = std::move(field);
    }

    // single-label categories with their reported confidences
    const std::vector<std::pair<MetadataCategory, const char*>> singles = {
        {MetadataCategory::wound_type, "wound_type"},
        {MetadataCategory::tissue_color, "tissue_color"},
        {MetadataCategory::drainage_type, "drainage_type"},
    };
    for (const auto& [category, key] : singles) {
        if (!predictions.contains(key)) {
            throw ParseError(std::string("classification: missing '") + key + "'");
        }
        FieldConfidence field;
        field.category = category;
        LabelScore ls;
        ls.label = checked_label(predictions.at(key), category, vocab);
        std::string score_key = std::string(key) + "_confidence";
        if (!scores.contains(score_key)) {
            throw ParseError("classification: missing score '" + score_key + "'");
        }
        ls.score = read_score(scores.at(score_key), score_key);
        field.field_confidence = ls.score;
        field.labels.push_back(std::move(ls));
        prediction.fields[category] = std::move(field);
    }

    prediction.overall_certainty = prediction.recompute_overall();
    if (scores.contains("overall_certainty")) {
        double reported = read_score(scores.at("overall_certainty"), "overall_certainty");
        if (std::fabs(reported - prediction.overall_certainty) > kCertaintyTolerance) {
            std::ostringstream warning;
            warning << "reported overall_certainty " << reported
                    << " disagrees with recomputed mean " << prediction.overall_certainty
                    << "; recomputed value kept";
            prediction.warnings.push_back(warning.str());
        }
    }
    return prediction;
}

// ---------------------------------------------------------------------------
// Token budget
// ---------------------------------------------------------------------------

BudgetResult enforce_token_budget(const std::string& raw_text, int budget, bool truncate) {
    if (budget < 1) throw Error("token budget must be >= 1");
    BudgetResult result;
    result.text = raw_text;
    auto words = text::whitespace_words(raw_text);
    result.violation = static_cast<int>(words.size()) > budget;
    if (result.violation && truncate) {
        std::string truncated;
        for (int i = 0; i < budget; ++i) {
            if (i) truncated += ' ';
            truncated += words[static_cast<size_t>(i)];
        }
        result.text = std::move(truncated);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

namespace {

/// Run `body(i)` for every index over a bounded worker pool; results land in
/// caller-provided storage so output order matches input order.
void parallel_for(size_t count, int concurrency, const std::function<void(size_t)>& body) {
    if (count == 0) return;
    int workers = std::max(1, std::min<int>(concurrency, static_cast<int>(count)));
    if (workers == 1) {
        for (size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

std::vector<const Case*> classification_examples(const Case& test_case,
                                                 const CaseIndex& train_cases,
                                                 const EmbeddingIndex& index,
                                                 EmbeddingProvider& embedder, int k) {
    if (k < 1) return {};
    auto hits = index.top_k(test_case.query_text(), static_cast<int>(index.size()), embedder);
    std::vector<const Case*> examples;
    for (const auto& hit : hits) {
        const Case* c = train_cases.find(hit.case_id);
        if (c && c->gold_metadata) {
            examples.push_back(c);
            if (static_cast<int>(examples.size()) == k) break;
        }
    }
    return examples;
}

std::vector<CaseRunResult> run_fewshot_pipeline(const std::vector<Case>& cases,
                                                const CaseIndex& train_cases,
                                                const EmbeddingIndex& index,
                                                EmbeddingProvider& embedder,
                                                const FewShotConfig& config, Gateway& gateway,
                                                const PipelineOptions& options) {
    if (config.k < 1) throw ConfigError("fewshot k must be >= 1");
    std::vector<CaseRunResult> results(cases.size());
    parallel_for(cases.size(), options.concurrency, [&](size_t i) {
        const Case& c = cases[i];
        CaseRunResult& result = results[i];
        result.case_id = c.case_id;
        try {
            auto hits = index.top_k(c.query_text(), config.k, embedder);
            auto bundle = prompts::build_fewshot_prompt(c, hits, train_cases, config);
            auto request = prompts::to_chat_request(bundle, options.decoding);
            result.prompt_digest = request_digest(gateway.identity(), request);
            auto completion = gateway.complete(request);
            result.response_text = completion.completion.text;
        } catch (const std::exception& e) {
            result.error = e.what();
        }
    });
    return results;
}

std::vector<CaseRunResult> run_metadata_pipeline(const std::vector<Case>& cases,
                                                 const CaseIndex& train_cases,
                                                 const EmbeddingIndex& index,
                                                 EmbeddingProvider& embedder,
                                                 const VocabularySet& vocab, Gateway& gateway,
                                                 const PipelineOptions& options) {
    std::vector<CaseRunResult> results(cases.size());
    parallel_for(cases.size(), options.concurrency, [&](size_t i) {
        const Case& c = cases[i];
        CaseRunResult& result = results[i];
        result.case_id = c.case_id;
        try {
            // stage 1: few-shot classification
            auto examples = classification_examples(c, train_cases, index, embedder,
                                                    options.classification_fewshot_k);
            auto stage1_bundle = prompts::build_classification_prompt(c, examples, vocab);
            auto stage1_request = prompts::to_chat_request(stage1_bundle, options.decoding);
            result.stage1_digest = request_digest(gateway.identity(), stage1_request);
            auto stage1 = gateway.complete(stage1_request);

            MetadataPrediction prediction;
            try {
                prediction =
                    parse_classification_json(stage1.completion.text, vocab, options.lenient_parse);
            } catch (const ParseError& e) {
                prediction = fallback_prediction();
                prediction.warnings.push_back(e.what());
                result.parse_fallback = true;
            }
            auto decision = apply_confidence_gate(prediction, options.gate_threshold);

            // stage 2: gated response generation
            auto stage2_bundle = prompts::build_gated_response_prompt(c, prediction, decision);
            auto stage2_request = prompts::to_chat_request(stage2_bundle, options.decoding);
            result.prompt_digest = request_digest(gateway.identity(), stage2_request);
            auto stage2 = gateway.complete(stage2_request);

            auto budget = enforce_token_budget(stage2.completion.text, options.budget_tokens,
                                               options.budget_truncate);
            result.response_text = budget.text;
            result.budget_violation = budget.violation;
            result.prediction = std::move(prediction);
            result.decision = decision;
        } catch (const std::exception& e) {
            result.error = e.what();
        }
    });
    return results;
}

// ---------------------------------------------------------------------------
// Result serialization
// ---------------------------------------------------------------------------

std::string results_to_jsonl(const std::vector<CaseRunResult>& results) {
    std::string out;
    for (const auto& r : results) {
        json j = json::object();
        j["case_id"] = r.case_id;
        j["response_text"] = r.response_text;
        j["prompt_digest"] = r.prompt_digest;
        if (r.prediction) j["prediction"] = prediction_to_json(*r.prediction);
        if (r.decision) j["decision"] = decision_to_json(*r.decision);
        if (r.stage1_digest) j["stage1_digest"] = *r.stage1_digest;
        if (r.budget_violation) j["budget_violation"] = true;
        if (r.parse_fallback) j["parse_fallback"] = true;
        if (r.error) j["error"] = *r.error;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<CaseRunResult> results_from_jsonl(const std::string& jsonl) {
    std::vector<CaseRunResult> results;
    std::istringstream in(jsonl);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("results line " + std::to_string(line_no) + ": " + e.what());
        }
        CaseRunResult r;
        r.case_id = j.at("case_id").get<std::string>();
        r.response_text = j.value("response_text", std::string{});
        r.prompt_digest = j.value("prompt_digest", std::string{});
        if (j.contains("prediction")) r.prediction = prediction_from_json(j.at("prediction"));
        if (j.contains("decision")) r.decision = decision_from_json(j.at("decision"));
        if (j.contains("stage1_digest")) r.stage1_digest = j.at("stage1_digest").get<std::string>();
        r.budget_violation = j.value("budget_violation", false);
        r.parse_fallback = j.value("parse_fallback", false);
        if (j.contains("error")) r.error = j.at("error").get<std::string>();
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace wvqa
