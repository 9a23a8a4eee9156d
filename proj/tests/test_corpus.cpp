#include <doctest.h>

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "support/fixtures.hpp"
#include "wvqa/corpus.hpp"
#include "wvqa/error.hpp"

using namespace wvqa;
using nlohmann::json;

namespace {

std::string write_lines(const std::filesystem::path& dir, const std::string& name,
                        const std::vector<std::string>& lines) {
    auto path = dir / name;
    std::ofstream out(path);
    for (const auto& line : lines) out << line << '\n';
    return path.string();
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("vocabulary invariants") {
    auto vocab = VocabularySet::defaults();
    int multi = 0;
    for (auto category : kAllCategories) {
        const auto& v = vocab.at(category);
        CHECK(!v.allowed_values.empty());
        if (v.multi_label) ++multi;
    }
    CHECK(multi == 1);
    CHECK(vocab.at(MetadataCategory::anatomic_location).multi_label);
    CHECK(vocab.at(MetadataCategory::anatomic_location).contains("Lower Leg"));
    CHECK(!vocab.at(MetadataCategory::wound_type).contains("volcanic"));
}

TEST_CASE("IAA defaults match the published agreement values") {
    auto iaa = IAATable::defaults();
    CHECK(iaa.at(MetadataCategory::wound_type) == doctest::Approx(1.0));
    CHECK(iaa.at(MetadataCategory::tissue_color) == doctest::Approx(0.97));
    CHECK(iaa.at(MetadataCategory::infection) == doctest::Approx(0.97));
    CHECK(iaa.at(MetadataCategory::drainage_type) == doctest::Approx(0.92));
    CHECK(iaa.at(MetadataCategory::wound_thickness) == doctest::Approx(0.89));
    CHECK(iaa.at(MetadataCategory::drainage_amount) == doctest::Approx(0.86));
    CHECK(iaa.at(MetadataCategory::anatomic_location) == doctest::Approx(0.81));
}

TEST_CASE("load_dataset accepts valid lines") {
    auto dir = fixtures::scratch_dir("corpus-valid");
    auto path = write_lines(dir, "data.jsonl", {
        R"({"case_id":"a","split":"train","title":"t1","content":"c1","image_refs":["i.jpg"],"responses":[{"text":"r1"}]})",
        R"({"case_id":"b","split":"train","title":"t2","content":"c2","image_refs":["i.jpg"],"responses":[{"text":"r2"}]})",
        R"({"case_id":"c","split":"test","title":"t3","content":"c3","image_refs":["i.jpg","j.jpg"],"responses":[{"text":"r3"}]})",
    });
    auto dataset = load_dataset(path);
    CHECK(dataset.cases.size() == 3);
    CHECK(dataset.warnings.empty());
    CHECK(dataset.cases[2].image_refs.size() == 2);
}

TEST_CASE("malformed line errors name the line number") {
    auto dir = fixtures::scratch_dir("corpus-badjson");
    auto path = write_lines(dir, "data.jsonl", {
        R"({"case_id":"a","title":"t","content":"c"})",
        R"(not json)",
    });
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains(":2"), ParseError);
}

TEST_CASE("unknown gold label errors name case and category") {
    auto dir = fixtures::scratch_dir("corpus-badlabel");
    auto path = write_lines(dir, "data.jsonl", {
        R"({"case_id":"bad1","title":"t","content":"c","gold_metadata":{"wound_type":"volcanic"}})",
    });
    CHECK_THROWS_WITH_AS(load_dataset(path),
                         doctest::Contains("unknown label for wound_type"), ParseError);
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("bad1"), ParseError);
}

TEST_CASE("duplicate case_id rejected") {
    auto dir = fixtures::scratch_dir("corpus-dup");
    auto path = write_lines(dir, "data.jsonl", {
        R"({"case_id":"a","title":"t","content":"c"})",
        R"({"case_id":"a","title":"t","content":"c"})",
    });
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("duplicate"), ParseError);
}

TEST_CASE("image_refs outside 1..2 warns but loads") {
    auto dir = fixtures::scratch_dir("corpus-imgs");
    auto path = write_lines(dir, "data.jsonl", {
        R"({"case_id":"a","title":"t","content":"c","image_refs":[]})",
        R"({"case_id":"b","title":"t","content":"c","image_refs":["1.jpg","2.jpg","3.jpg"]})",
    });
    auto dataset = load_dataset(path);
    CHECK(dataset.cases.size() == 2);
    CHECK(dataset.warnings.size() == 2);
}

TEST_CASE("schema_strict rejects unknown fields, default ignores them") {
    auto dir = fixtures::scratch_dir("corpus-strict");
    auto path = write_lines(dir, "data.jsonl", {
        R"({"case_id":"a","title":"t","content":"c","mystery":1})",
    });
    CHECK(load_dataset(path).cases.size() == 1);
    LoadOptions strict;
    strict.schema_strict = true;
    CHECK_THROWS_WITH_AS(load_dataset(path, strict), doctest::Contains("mystery"), ParseError);
}

TEST_CASE("multi-label allowed only for anatomic_location") {
    auto dir = fixtures::scratch_dir("corpus-multi");
    auto ok = write_lines(dir, "ok.jsonl", {
        R"({"case_id":"a","title":"t","content":"c","gold_metadata":{"anatomic_location":["lower leg","abdomen"]}})",
    });
    CHECK(load_dataset(ok).cases.size() == 1);
    auto bad = write_lines(dir, "bad.jsonl", {
        R"({"case_id":"a","title":"t","content":"c","gold_metadata":{"wound_type":["surgical","traumatic"]}})",
    });
    CHECK_THROWS_WITH_AS(load_dataset(bad), doctest::Contains("single-label"), ParseError);
}

TEST_CASE("round-trip: serialize(load(x)) is field-identical to canonical x") {
    auto cases = fixtures::small_train_corpus();
    auto dir = fixtures::scratch_dir("corpus-roundtrip");
    auto path = fixtures::write_jsonl(dir / "data.jsonl", cases);
    auto loaded = load_dataset(path);
    REQUIRE(loaded.cases.size() == cases.size());
    CHECK(dataset_to_jsonl(loaded.cases) == dataset_to_jsonl(cases));
    CHECK(corpus_digest(loaded.cases) == corpus_digest(cases));

    // loaded gold assignments validate cleanly
    auto vocab = VocabularySet::defaults();
    for (const auto& c : loaded.cases) {
        REQUIRE(c.gold_metadata.has_value());
        CHECK(validate_labels(*c.gold_metadata, vocab).ok());
    }
}

TEST_CASE("validate_labels reports violations without throwing") {
    auto vocab = VocabularySet::defaults();
    LabelAssignment ok;
    ok[MetadataCategory::anatomic_location] = {"lower leg", "abdomen"};
    ok[MetadataCategory::wound_type] = {"surgical"};
    CHECK(validate_labels(ok, vocab).ok());

    LabelAssignment bad;
    bad[MetadataCategory::wound_type] = {"surgical", "traumatic"};
    bad[MetadataCategory::tissue_color] = {"plaid"};
    auto report = validate_labels(bad, vocab);
    REQUIRE(report.violations.size() == 2);
    CHECK(report.violations[0].message == "single-label category holds 2");
}

TEST_CASE("split stats: counts, ratios, word averages") {
    std::vector<Case> cases;
    cases.push_back(fixtures::make_case("a", Split::train, "a b", "c", {"w x y z", "p q"}));
    cases.push_back(fixtures::make_case("b", Split::train, "a b c", "", {"r s t u"}));
    cases.push_back(fixtures::make_case("z", Split::test, "t", "", {"x"}));

    auto stats = compute_split_stats(cases, Split::train);
    CHECK(stats.case_count == 2);
    CHECK(stats.response_count == 3);
    CHECK(stats.responses_per_case == doctest::Approx(1.5));
    CHECK(stats.avg_query_words == doctest::Approx(3.0));  // (3 + 3) / 2
    CHECK(stats.avg_response_words == doctest::Approx(10.0 / 3.0));

    CHECK_THROWS_AS(compute_split_stats(cases, Split::validation), Error);
}

TEST_CASE("split stats: one case 'a b c' query -> 3 words; 2 cases 4 responses -> 2.0") {
    std::vector<Case> cases;
    cases.push_back(fixtures::make_case("a", Split::train, "a b c", "", {"r"}));
    auto stats = compute_split_stats(cases, Split::train);
    CHECK(stats.avg_query_words == doctest::Approx(3.0));

    std::vector<Case> pair;
    pair.push_back(fixtures::make_case("a", Split::train, "t", "", {"r1", "r2"}));
    pair.push_back(fixtures::make_case("b", Split::train, "t", "", {"r3", "r4"}));
    CHECK(compute_split_stats(pair, Split::train).responses_per_case == doctest::Approx(2.0));
}

TEST_CASE("table-shaped fixtures: 279 train cases; 93 test cases with 3 responses each") {
    std::vector<Case> cases;
    for (int i = 0; i < 279; ++i) {
        cases.push_back(fixtures::make_case("train-" + std::to_string(i), Split::train,
                                            "query title", "query content", {"response"}));
    }
    for (int i = 0; i < 93; ++i) {
        cases.push_back(fixtures::make_case("test-" + std::to_string(i), Split::test, "query",
                                            "content", {"r1", "r2", "r3"}));
    }
    auto dir = fixtures::scratch_dir("corpus-table1");
    auto path = fixtures::write_jsonl(dir / "table1.jsonl", cases);
    auto dataset = load_dataset(path);

    auto train = compute_split_stats(dataset.cases, Split::train);
    CHECK(train.case_count == 279);
    auto test = compute_split_stats(dataset.cases, Split::test);
    CHECK(test.case_count == 93);
    CHECK(test.response_count == 279);
    CHECK(test.responses_per_case == doctest::Approx(3.0));
}

TEST_CASE("split stats are order-independent") {
    auto cases = fixtures::small_eval_corpus(Split::test, 7);
    auto stats1 = compute_split_stats(cases, Split::test);
    std::reverse(cases.begin(), cases.end());
    auto stats2 = compute_split_stats(cases, Split::test);
    CHECK(stats1.avg_query_words == stats2.avg_query_words);
    CHECK(stats1.avg_response_words == stats2.avg_response_words);
    CHECK(stats1.case_count == stats2.case_count);
}

TEST_CASE("case index lookups") {
    auto cases = fixtures::small_train_corpus();
    CaseIndex index(cases);
    CHECK(index.find("train-1") != nullptr);
    CHECK(index.find("nope") == nullptr);
    CHECK(index.at("train-2").case_id == "train-2");
    CHECK_THROWS_AS(index.at("nope"), Error);
}

}  // TEST_SUITE
