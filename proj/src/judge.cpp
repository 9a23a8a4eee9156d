#include "wvqa/judge.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <regex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "wvqa/error.hpp"
#include "wvqa/prompts.hpp"
#include "wvqa/text.hpp"

namespace wvqa::judge {

using nlohmann::json;

namespace {

const std::regex kNumberPattern(R"((\d+(?:\.\d+)?))");

std::optional<double> scale_value(const std::string& token) {
    if (token == "0" || token == "0.0" || token == "0.00") return 0.0;
    if (token == "0.5" || token == "0.50") return 0.5;
    if (token == "1" || token == "1.0" || token == "1.00") return 1.0;
    return std::nullopt;
}

std::optional<std::string> first_number(const std::string& s, size_t from) {
    std::smatch match;
    std::string tail = s.substr(from);
    if (std::regex_search(tail, match, kNumberPattern)) return match[1].str();
    return std::nullopt;
}

}  // namespace

double parse_rating(const std::string& raw, bool strict) {
    std::string lowered = text::to_lower(raw);
    auto marker = lowered.find("rating");
    std::optional<std::string> token;
    if (marker != std::string::npos) {
        token = first_number(raw, marker);
    } else if (strict) {
        throw ParseError("judge output has no RATING marker");
    } else {
        token = first_number(raw, 0);
    }
    if (!token) throw ParseError("judge output contains no rating value");
    auto value = scale_value(*token);
    if (!value) {
        throw ParseError("judge rating '" + *token + "' is not on the {0, 0.5, 1.0} scale");
    }
    return *value;
}

JudgePanelResult panel_average(const std::map<std::string, std::vector<JudgeRating>>& ratings) {
    if (ratings.empty()) throw Error("panel_average: no judges");

    // all judges must cover an identical case set
    std::set<std::string> union_ids;
    for (const auto& [judge_name, list] : ratings) {
        for (const auto& r : list) union_ids.insert(r.case_id);
    }
    std::vector<std::string> missing;
    for (const auto& [judge_name, list] : ratings) {
        std::set<std::string> ids;
        for (const auto& r : list) ids.insert(r.case_id);
        for (const auto& id : union_ids) {
            if (!ids.count(id)) missing.push_back(judge_name + " is missing " + id);
        }
    }
    if (!missing.empty()) {
        std::string what = "panel_average: case-set mismatch:";
        for (const auto& m : missing) what += " " + m + ";";
        throw Error(what);
    }

    JudgePanelResult result;
    for (const auto& [judge_name, list] : ratings) {
        if (list.empty()) throw Error("panel_average: judge '" + judge_name + "' has no ratings");
        double sum = 0.0;
        for (const auto& r : list) {
            if (r.value != 0.0 && r.value != 0.5 && r.value != 1.0) {
                throw Error("panel_average: rating outside the three-step scale for case " +
                            r.case_id);
            }
            sum += r.value;
        }
        result.per_judge_mean[judge_name] = sum / static_cast<double>(list.size());
    }
    double sum = 0.0;
    for (const auto& [judge_name, mean] : result.per_judge_mean) sum += mean;
    result.panel_average = sum / static_cast<double>(result.per_judge_mean.size());
    return result;
}

JudgeRunResult run_judges(const std::vector<Case>& cases,
                          const std::map<std::string, std::string>& candidates_by_case,
                          std::vector<Gateway*> judges, const Decoding& decoding,
                          bool strict_parse, int concurrency) {
    if (judges.empty()) throw Error("run_judges: no judges configured");

    struct Task {
        const Case* c;
        Gateway* judge;
    };
    std::vector<Task> tasks;
    for (Gateway* judge : judges) {
        for (const auto& c : cases) tasks.push_back({&c, judge});
    }

    JudgeRunResult result;
    std::mutex mutex;
    std::atomic<size_t> next{0};
    int workers = std::max(1, std::min<int>(concurrency, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                const Task& task = tasks[i];
                const std::string judge_name = task.judge->identity().name;
                auto candidate = candidates_by_case.find(task.c->case_id);
                if (candidate == candidates_by_case.end()) {
                    std::lock_guard<std::mutex> lock(mutex);
                    result.failures.push_back(judge_name + "/" + task.c->case_id +
                                              ": no candidate response");
                    continue;
                }
                try {
                    std::vector<std::string> references;
                    for (const auto& r : task.c->responses) references.push_back(r.text);
                    auto bundle =
                        prompts::build_judge_prompt(*task.c, references, candidate->second);
                    auto request = prompts::to_chat_request(bundle, decoding);
                    auto completion = task.judge->complete(request);
                    double value = parse_rating(completion.completion.text, strict_parse);
                    std::lock_guard<std::mutex> lock(mutex);
                    result.ratings.push_back({value, judge_name, task.c->case_id});
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(mutex);
                    result.failures.push_back(judge_name + "/" + task.c->case_id + ": " +
                                              e.what());
                }
            }
        });
    }
    for (auto& t : pool) t.join();

    // deterministic ordering regardless of completion order
    std::sort(result.ratings.begin(), result.ratings.end(),
              [](const JudgeRating& a, const JudgeRating& b) {
                  if (a.judge_name != b.judge_name) return a.judge_name < b.judge_name;
                  return a.case_id < b.case_id;
              });
    std::sort(result.failures.begin(), result.failures.end());

    if (result.failures.empty() && !result.ratings.empty()) {
        std::map<std::string, std::vector<JudgeRating>> by_judge;
        for (const auto& r : result.ratings) by_judge[r.judge_name].push_back(r);
        result.panel = panel_average(by_judge);
    }
    return result;
}

json panel_to_json(const JudgeRunResult& result) {
    json j;
    j["per_judge_mean"] = result.panel.per_judge_mean;
    j["panel_average"] = result.panel.panel_average;
    j["rating_count"] = result.ratings.size();
    if (!result.failures.empty()) j["failures"] = result.failures;
    return j;
}

}  // namespace wvqa::judge
