#pragma once

// Shared synthetic fixtures for unit and acceptance tests.

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "wvqa/corpus.hpp"

namespace fixtures {

inline wvqa::Case make_case(std::string id, wvqa::Split split, std::string title,
                            std::string content, std::vector<std::string> responses = {}) {
    wvqa::Case c;
    c.case_id = std::move(id);
    c.split = split;
    c.title = std::move(title);
    c.content = std::move(content);
    c.image_refs = {"images/" + c.case_id + ".jpg"};
    for (auto& text : responses) {
        wvqa::ExpertResponse r;
        r.text = std::move(text);
        r.expertise_level = 5;
        r.validated_md = true;
        r.most_frequent = true;
        r.answers_completely = true;
        c.responses.push_back(std::move(r));
    }
    return c;
}

inline void add_gold(wvqa::Case& c) {
    wvqa::LabelAssignment gold;
    gold[wvqa::MetadataCategory::anatomic_location] = {"lower leg"};
    gold[wvqa::MetadataCategory::wound_type] = {"surgical"};
    gold[wvqa::MetadataCategory::wound_thickness] = {"superficial"};
    gold[wvqa::MetadataCategory::tissue_color] = {"pink"};
    gold[wvqa::MetadataCategory::drainage_type] = {"serous"};
    gold[wvqa::MetadataCategory::drainage_amount] = {"scant"};
    gold[wvqa::MetadataCategory::infection] = {"no"};
    c.gold_metadata = gold;
}

/// Ten distinct training cases with responses and gold metadata, plus a
/// helper to synthesize an evaluation split. Word choices keep case texts
/// lexically distinct so hashed bag-of-words retrieval is unambiguous.
inline std::vector<wvqa::Case> small_train_corpus() {
    const std::vector<std::pair<std::string, std::string>> topics = {
        {"cut on finger", "knife slipped while cooking and the finger is bleeding"},
        {"blister on heel", "new boots rubbed the heel raw during a long hike"},
        {"surgical site redness", "the incision from surgery looks red and warm"},
        {"scrape on knee", "fell off a bike and scraped the knee on gravel"},
        {"burn from stove", "touched a hot pan and the palm has a small burn"},
        {"dog bite on arm", "a dog bit the forearm and the skin is punctured"},
        {"pressure sore", "bedbound parent developed a sore on the tailbone"},
        {"ulcer on ankle", "a slow healing open spot above the ankle keeps weeping"},
        {"infected toenail", "the toenail edge is swollen with pus and pain"},
        {"stitches itching", "stitches from last week itch and the area is pink"},
    };
    std::vector<wvqa::Case> cases;
    int index = 0;
    for (const auto& [title, content] : topics) {
        ++index;
        auto c = make_case("train-" + std::to_string(index), wvqa::Split::train, title, content,
                           {"keep the " + title + " clean and covered; seek care if it worsens"});
        add_gold(c);
        cases.push_back(std::move(c));
    }
    return cases;
}

inline std::vector<wvqa::Case> small_eval_corpus(wvqa::Split split = wvqa::Split::test,
                                                 int count = 10) {
    const std::vector<std::pair<std::string, std::string>> topics = {
        {"red swollen cut", "a cut from yesterday is now red and swollen"},
        {"weeping wound", "clear fluid keeps leaking from a scrape"},
        {"dark scab", "the scab turned dark and the skin around is tender"},
        {"incision opening", "part of the incision looks like it is opening"},
        {"painful blister", "a blister filled with fluid hurts when walking"},
        {"bruised stitches", "the stitched area is bruised and slightly warm"},
        {"oozing burn", "the burn blistered and is oozing a little"},
        {"itchy rash near wound", "an itchy rash appeared around the healing wound"},
        {"slow healing sore", "a sore on the shin has not closed in two weeks"},
        {"bleeding after fall", "a graze keeps bleeding through the bandage"},
    };
    std::vector<wvqa::Case> cases;
    for (int i = 0; i < count; ++i) {
        const auto& [title, content] = topics[static_cast<size_t>(i) % topics.size()];
        auto c = make_case("eval-" + std::to_string(i + 1), split, title, content,
                           {"clean gently, cover with a sterile dressing, watch for infection",
                            "see a clinician if redness spreads or fever develops"});
        add_gold(c);
        cases.push_back(std::move(c));
    }
    return cases;
}

inline std::string write_jsonl(const std::filesystem::path& path,
                               const std::vector<wvqa::Case>& cases) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    out << wvqa::dataset_to_jsonl(cases);
    return path.string();
}

/// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "wvqa-tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixtures
