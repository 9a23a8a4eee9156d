#pragma once

#include <string>
#include <vector>

#include "wvqa/corpus.hpp"
#include "wvqa/modelgate.hpp"
#include "wvqa/pipeline_types.hpp"
#include "wvqa/retrieval.hpp"

namespace wvqa::prompts {

/// Rendered prompt plus the case's image attachments. Renders are pure
/// functions of their inputs and are pinned by golden-file tests.
struct PromptBundle {
    std::string system_prompt;
    std::string user_prompt;
    std::vector<Attachment> attachments;
    std::vector<std::string> warnings;
};

ChatRequest to_chat_request(const PromptBundle& bundle, const Decoding& decoding);

/// Few-shot generation prompt: task bullets, an EXAMPLES block built from the
/// retrieved training cases (ordered per config), then the test query.
PromptBundle build_fewshot_prompt(const Case& test_case, const std::vector<RetrievalHit>& hits,
                                  const CaseIndex& train_cases, const FewShotConfig& config);

/// Stage-1 classification prompt embedding the allowed values for the four
/// predicted categories and gold-labelled few-shot examples.
PromptBundle build_classification_prompt(const Case& test_case,
                                         const std::vector<const Case*>& examples,
                                         const VocabularySet& vocab);

/// Stage-2 response prompt: predicted metadata with confidences, asserted
/// fields phrased as factual observations, cautioned fields carrying the
/// template's caution instruction, and the 50-token budget instruction.
PromptBundle build_gated_response_prompt(const Case& test_case,
                                         const MetadataPrediction& prediction,
                                         const GateDecision& decision);

/// LLM-as-judge prompt with QUERY / REFERENCE RESPONSES / CANDIDATE RESPONSE
/// slots filled; the three-step rating rubric is fixed template text.
PromptBundle build_judge_prompt(const Case& query_case,
                                const std::vector<std::string>& references,
                                const std::string& candidate);

}  // namespace wvqa::prompts
