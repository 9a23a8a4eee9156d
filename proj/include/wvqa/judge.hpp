#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wvqa/corpus.hpp"
#include "wvqa/modelgate.hpp"
#include "wvqa/pipelines.hpp"

namespace wvqa::judge {

/// One judge's rating for one case; the value is restricted to the
/// three-step scale {0.0, 0.5, 1.0}.
struct JudgeRating {
    double value = 0.0;
    std::string judge_name;
    std::string case_id;
};

/// Extract the rating from raw judge output. The first number following the
/// "RATING" marker (case-insensitive) is taken; bare "1" reads as 1.0 and
/// bare "0" as 0.0. Lenient mode (default) falls back to the first number
/// anywhere in the text when no marker exists; strict mode requires the
/// marker. Any value outside the three-step scale is a parse error.
double parse_rating(const std::string& raw, bool strict = false);

struct JudgePanelResult {
    std::map<std::string, double> per_judge_mean;
    double panel_average = 0.0;
};

/// Per-judge means over cases, then the mean of judge means. All judges must
/// have rated the same case set; mismatches raise an error listing the
/// missing case_ids.
JudgePanelResult panel_average(const std::map<std::string, std::vector<JudgeRating>>& ratings);

/// Run every configured judge over (case, candidate) pairs through the
/// gateway; unparsable ratings are recorded as per-case failures.
struct JudgeRunResult {
    std::vector<JudgeRating> ratings;
    std::vector<std::string> failures;  // "<judge>/<case_id>: reason"
    JudgePanelResult panel;
};

JudgeRunResult run_judges(const std::vector<Case>& cases,
                          const std::map<std::string, std::string>& candidates_by_case,
                          std::vector<Gateway*> judges, const Decoding& decoding,
                          bool strict_parse = false, int concurrency = 4);

nlohmann::json panel_to_json(const JudgeRunResult& result);

}  // namespace wvqa::judge
