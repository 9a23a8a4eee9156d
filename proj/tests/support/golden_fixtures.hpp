#pragma once

// Frozen inputs behind the golden prompt renders. Any change here invalidates
// the checked-in golden files on purpose.

#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "wvqa/pipeline_types.hpp"
#include "wvqa/prompts.hpp"
#include "wvqa/retrieval.hpp"

namespace golden {

inline wvqa::Case test_case() {
    auto c = fixtures::make_case(
        "golden-1", wvqa::Split::test, "Deep cut on the shin",
        "I cut my shin on a metal edge two days ago and the area around it is getting redder.");
    c.image_refs = {"images/golden-1a.jpg", "images/golden-1b.jpg"};
    return c;
}

inline std::vector<wvqa::Case> train_examples() {
    std::vector<wvqa::Case> cases;
    auto a = fixtures::make_case(
        "train-a", wvqa::Split::train, "Cut from garden tool",
        "Sliced my calf with a trimmer, bleeding stopped but the edges look open.",
        {"Clean the cut with running water, apply a sterile dressing, and have it assessed "
         "for closure within 24 hours."});
    fixtures::add_gold(a);
    auto b = fixtures::make_case(
        "train-b", wvqa::Split::train, "Red area around stitches",
        "My stitched knee wound is warm and pink around the edges since yesterday.",
        {"Some redness is normal, but spreading warmth can signal infection; watch for fever "
         "and see your clinician if it worsens."});
    fixtures::add_gold(b);
    cases.push_back(std::move(a));
    cases.push_back(std::move(b));
    return cases;
}

inline std::vector<wvqa::RetrievalHit> hits() {
    return {{"train-a", 0.91, 1}, {"train-b", 0.84, 2}};
}

inline wvqa::MetadataPrediction prediction() {
    using wvqa::MetadataCategory;
    wvqa::MetadataPrediction p;
    p.fields[MetadataCategory::anatomic_location] = {
        MetadataCategory::anatomic_location, {{"lower leg", 0.92}}, 0.92};
    p.fields[MetadataCategory::wound_type] = {
        MetadataCategory::wound_type, {{"traumatic", 0.88}}, 0.88};
    p.fields[MetadataCategory::tissue_color] = {
        MetadataCategory::tissue_color, {{"pink", 0.55}}, 0.55};
    p.fields[MetadataCategory::drainage_type] = {
        MetadataCategory::drainage_type, {{"serous", 0.71}}, 0.71};
    p.overall_certainty = p.recompute_overall();
    return p;
}

inline std::string render(const wvqa::prompts::PromptBundle& bundle) {
    std::string out = "=== SYSTEM ===\n";
    out += bundle.system_prompt;
    out += "\n=== USER ===\n";
    out += bundle.user_prompt;
    out += "\n=== ATTACHMENTS ===\n";
    for (const auto& a : bundle.attachments) {
        out += a.ref;
        out += '\n';
    }
    return out;
}

inline wvqa::prompts::PromptBundle fewshot_bundle() {
    auto examples = train_examples();
    wvqa::CaseIndex index(examples);
    wvqa::FewShotConfig config;
    config.k = 2;
    return wvqa::prompts::build_fewshot_prompt(test_case(), hits(), index, config);
}

inline wvqa::prompts::PromptBundle classification_bundle() {
    auto examples = train_examples();
    std::vector<const wvqa::Case*> pointers;
    for (const auto& c : examples) pointers.push_back(&c);
    return wvqa::prompts::build_classification_prompt(test_case(), pointers,
                                                      wvqa::VocabularySet::defaults());
}

inline wvqa::prompts::PromptBundle gated_response_bundle() {
    auto p = prediction();
    auto decision = wvqa::apply_confidence_gate(p, 0.7);
    return wvqa::prompts::build_gated_response_prompt(test_case(), p, decision);
}

inline wvqa::prompts::PromptBundle judge_bundle() {
    std::vector<std::string> references = {
        "Clean it twice daily and cover with a non-stick dressing.",
        "Spreading redness two days in deserves a clinician's look to rule out infection."};
    return wvqa::prompts::build_judge_prompt(
        test_case(), references,
        "Wash with mild soap, keep it covered, and seek care if redness spreads or you develop "
        "fever.");
}

}  // namespace golden
