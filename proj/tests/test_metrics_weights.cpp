#include <doctest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "wvqa/error.hpp"
#include "wvqa/metrics.hpp"

using namespace wvqa;
using namespace wvqa::metrics;

TEST_SUITE("metrics.weights") {

TEST_CASE("published weight rules") {
    WeightCriteria all_met{true, true, true, true};
    CHECK(compute_response_weight(all_met) == doctest::Approx(1.0));

    WeightCriteria only_d_unmet{true, true, true, false};
    CHECK(compute_response_weight(only_d_unmet) == doctest::Approx(0.9));

    WeightCriteria abc_unmet{false, false, false, true};
    CHECK(compute_response_weight(abc_unmet) == doctest::Approx(0.7));

    WeightCriteria nothing{false, false, false, false};
    CHECK(compute_response_weight(nothing) == doctest::Approx(0.6));
}

TEST_CASE("all 16 combinations stay within the five-value image and are monotone") {
    std::set<double> image;
    for (int mask = 0; mask < 16; ++mask) {
        WeightCriteria c;
        c.expertise_ge_4 = mask & 1;
        c.validated_md = mask & 2;
        c.most_frequent = mask & 4;
        c.answers_completely = mask & 8;
        double w = compute_response_weight(c);
        image.insert(w);
        CHECK(w >= 0.6);
        CHECK(w <= 1.0);

        // flipping any unmet criterion to met never lowers the weight
        for (int bit = 0; bit < 4; ++bit) {
            if (mask & (1 << bit)) continue;
            WeightCriteria improved = c;
            if (bit == 0) improved.expertise_ge_4 = true;
            if (bit == 1) improved.validated_md = true;
            if (bit == 2) improved.most_frequent = true;
            if (bit == 3) improved.answers_completely = true;
            CHECK(compute_response_weight(improved) >= w - 1e-12);
        }
    }
    std::set<double> allowed = {0.6, 0.7, 0.8, 0.9, 1.0};
    for (double w : image) CHECK(allowed.count(w) == 1);
}

TEST_CASE("criteria derived from responses treat absent fields as unmet") {
    ExpertResponse r;
    r.text = "advice";
    CHECK(response_weight(r) == doctest::Approx(0.6));

    r.expertise_level = 4;
    CHECK(response_weight(r) == doctest::Approx(0.7));
    r.expertise_level = 3;
    CHECK(response_weight(r) == doctest::Approx(0.6));

    r.expertise_level = 9;
    r.validated_md = true;
    r.most_frequent = true;
    r.answers_completely = true;
    CHECK(response_weight(r) == doctest::Approx(1.0));

    r.precomputed_weight = 0.42;  // wins over criteria
    CHECK(response_weight(r) == doctest::Approx(0.42));
}

}  // TEST_SUITE

TEST_SUITE("metrics.aggregate") {

TEST_CASE("per-case aggregation modes") {
    CHECK(aggregate_case({0.4, 0.8}, AggregateMode::mean_of_mean) == doctest::Approx(0.6));
    CHECK(aggregate_case({0.4, 0.8}, AggregateMode::mean_of_max) == doctest::Approx(0.8));
    CHECK(aggregate_case({0.5, 0.5, 0.5}, AggregateMode::mean_of_mean) == doctest::Approx(0.5));
    CHECK(aggregate_case({0.5, 0.5, 0.5}, AggregateMode::mean_of_max) == doctest::Approx(0.5));
    CHECK_THROWS_AS(aggregate_case({}, AggregateMode::mean_of_mean), Error);
}

TEST_CASE("across cases: mean of per-case aggregates") {
    std::vector<std::vector<double>> cases = {{0.2, 0.6}, {1.0}};
    CHECK(aggregate_multi_reference(cases, AggregateMode::mean_of_mean) == doctest::Approx(0.7));
    CHECK(aggregate_multi_reference(cases, AggregateMode::mean_of_max) == doctest::Approx(0.8));
    CHECK_THROWS_AS(aggregate_multi_reference({}, AggregateMode::mean_of_max), Error);
}

TEST_CASE("aggregate_report derives the published table cells") {
    MetricReport r;
    r.rouge_1 = 0.8100;
    r.rouge_2 = 0.5361;
    r.rouge_l = 0.4555;
    r.rouge_lsum = 0.4553;
    r.bert_mean_of_mean = 0.6218;
    r.bert_mean_of_max = 0.6690;
    r.judge_scores = {{"judge-a", 0.6823}, {"judge-b", 0.6452}, {"judge-c", 0.7151}};

    auto derived = aggregate_report(r);
    REQUIRE(derived.rouge_avg.has_value());
    REQUIRE(derived.bert_avg.has_value());
    REQUIRE(derived.judge_avg.has_value());
    CHECK(std::abs(*derived.rouge_avg - 0.5642) < 5e-4);
    CHECK(std::abs(*derived.bert_avg - 0.6454) < 5e-4);
    CHECK(std::abs(*derived.judge_avg - 0.6809) < 5e-4);

    // derived fields equal the arithmetic means of their constituents
    CHECK(*derived.rouge_avg ==
          doctest::Approx((0.8100 + 0.5361 + 0.4555 + 0.4553) / 4.0).epsilon(1e-12));
    CHECK(*derived.bert_avg == doctest::Approx((0.6218 + 0.6690) / 2.0).epsilon(1e-12));
    CHECK(*derived.judge_avg ==
          doctest::Approx((0.6823 + 0.6452 + 0.7151) / 3.0).epsilon(1e-12));
}

TEST_CASE("missing constituents are named") {
    MetricReport r;
    r.rouge_1 = 0.5;
    CHECK_THROWS_WITH_AS(aggregate_report(r), doctest::Contains("rouge_2"), Error);

    // partial derivation fills what it can
    r.bert_mean_of_mean = 0.6;
    r.bert_mean_of_max = 0.7;
    auto partial = aggregate_report_partial(r);
    CHECK(!partial.rouge_avg.has_value());
    CHECK(partial.bert_avg == doctest::Approx(0.65));
    CHECK(!partial.judge_avg.has_value());
}

TEST_CASE("report JSON round-trip and CSV header") {
    MetricReport r;
    r.delta_bleu = 13.0379;
    r.rouge_1 = 0.7118;
    r.rouge_2 = 0.5128;
    r.rouge_l = 0.4517;
    r.rouge_lsum = 0.4572;
    r.bert_mean_of_mean = 0.6188;
    r.bert_mean_of_max = 0.6743;
    r.judge_scores = {{"judge-a", 0.6349}};
    auto derived = aggregate_report(r);

    auto j = report_to_json(derived);
    auto back = report_from_json(j);
    CHECK(back.delta_bleu == derived.delta_bleu);
    CHECK(back.rouge_avg == derived.rouge_avg);
    CHECK(back.judge_scores == derived.judge_scores);

    auto csv = reports_to_csv({{"system-a", derived}});
    CHECK(csv.rfind("system,delta_bleu,rouge_1,rouge_2,rouge_l,rouge_lsum,"
                    "bert_mean_of_mean,bert_mean_of_max,rouge_avg,bert_avg,judge_avg\n",
                    0) == 0);
    CHECK(csv.find("system-a,13.0379,") != std::string::npos);
}

}  // TEST_SUITE
