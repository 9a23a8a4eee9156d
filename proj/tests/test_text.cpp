#include <doctest.h>

#include "wvqa/text.hpp"

using namespace wvqa;

TEST_SUITE("text") {

TEST_CASE("whitespace_words splits on any whitespace run") {
    CHECK(text::whitespace_words("a b c").size() == 3);
    CHECK(text::whitespace_words("  a\t\nb  ").size() == 2);
    CHECK(text::whitespace_words("").empty());
    CHECK(text::whitespace_words("   ").empty());
}

TEST_CASE("metric_tokens lowercases and isolates punctuation") {
    auto tokens = text::metric_tokens("Clean the Wound, then re-dress it.");
    std::vector<std::string> expected = {"clean", "the", "wound", ",",  "then",
                                         "re",    "-",   "dress", "it", "."};
    CHECK(tokens == expected);
}

TEST_CASE("metric_tokens on empty input") {
    CHECK(text::metric_tokens("").empty());
    CHECK(text::metric_tokens(" .. ").size() == 2);
}

TEST_CASE("word_tokens drops punctuation entirely") {
    auto tokens = text::word_tokens("Wound-care, ASAP!");
    std::vector<std::string> expected = {"wound", "care", "asap"};
    CHECK(tokens == expected);
}

TEST_CASE("split_sentences on newline and terminal punctuation") {
    auto s = text::split_sentences("First sentence. Second one!\nThird line\nlast? tail");
    REQUIRE(s.size() == 5);
    CHECK(s[0] == "First sentence.");
    CHECK(s[1] == "Second one!");
    CHECK(s[2] == "Third line");
    CHECK(s[3] == "last?");
    CHECK(s[4] == "tail");
}

TEST_CASE("split_sentences keeps terminal runs together") {
    auto s = text::split_sentences("Really?! Yes...");
    REQUIRE(s.size() == 2);
    CHECK(s[0] == "Really?!");
    CHECK(s[1] == "Yes...");
}

TEST_CASE("normalize_whitespace collapses runs") {
    CHECK(text::normalize_whitespace("  a  b \n c ") == "a b c");
    CHECK(text::normalize_whitespace("\t\n") == "");
}

}  // TEST_SUITE
