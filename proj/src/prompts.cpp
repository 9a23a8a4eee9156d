#include "wvqa/prompts.hpp"

#include <algorithm>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "wvqa/error.hpp"

namespace wvqa::prompts {

namespace {

// --- Few-shot generation (mined prompting) ---------------------------------

constexpr const char* kFewShotSystem =
    "You are a clinical AI assistant with expertise in wound care and infection "
    "prevention, responsible for answering patient queries.";

constexpr const char* kFewShotTaskHeader =
    "Given the patient's query and associated wound images, your task is to:\n"
    "- Analyze the query and images together\n"
    "- Identify likely wound condition or stage\n"
    "- Suggest appropriate wound care steps (cleaning, dressing, follow-up)\n"
    "- Warn if urgent medical attention is required\n"
    "- Keep the tone concise, clinical, and avoid unnecessary details\n";

constexpr const char* kFewShotClosing =
    "Now, based on the format of the above examples, generate a response for the "
    "following query. Strictly follow the example style and do not include any "
    "headings in your response.\n"
    "\n"
    "Patient Query:\n"
    "\n"
    "Query Title: ";

// --- Metadata pipeline (classification + gated response) -------------------

constexpr const char* kClassificationSystem =
    "You are a wound-care classification assistant. Return wound metadata with "
    "calibrated confidence scores. For each field: Choose ONLY from allowed values. "
    "Provide a numeric confidence score in [0,1] (0=very unsure, 1=highly certain). "
    "For anatomic locations (multi-label), include each predicted body location as "
    "an object with label + score. Only include locations you believe are present "
    "(score greater than 0.25). Sort them by descending score. If you are unsure "
    "for a field, output a best guess with a low score; do NOT invent values "
    "outside the allowed lists. Compute an overall certainty = average of all "
    "individual field confidences (use mean of chosen location scores for anatomic "
    "locations). Output STRICT valid JSON only, matching this schema: predictions "
    "with anatomic locations, wound type, tissue color, drainage type; scores with "
    "anatomic locations confidence, wound type confidence, tissue color confidence, "
    "drainage type confidence, overall certainty. No extra text.";

constexpr const char* kResponseSystem =
    "You are an expert wound care assistant specializing in interpreting wound "
    "images and providing concise, medically sound advice. Given a clinical query "
    "and one or more wound images, your job is to deliver short, accurate answers "
    "based on visible findings and basic wound care principles. Use clinical "
    "reasoning to interpret visual cues (e.g., redness, scabbing, swelling, "
    "sutures, necrosis, granulation tissue). You are a medical wound-care "
    "assistant. Provide clinically accurate and safe guidance based on the query, "
    "wound images, and metadata. Your responses should be medically helpful, "
    "crisp, and no longer than 2-3 sentences. Avoid lengthy explanations or "
    "disclaimers. If urgent care is required, clearly recommend it. Otherwise, "
    "suggest simple, evidence-based wound care actions.";

constexpr const char* kResponseTaskBlock =
    "You are a highly skilled clinical wound-care assistant trained to provide "
    "safe, concise, and medically sound advice.\n"
    "\n"
    "You will receive: The patient's wound query (title and content). Predicted "
    "wound metadata across 4 key wound-related categories. Confidence scores (0 "
    "to 1) for each metadata field.\n"
    "\n"
    "Your task is to:\n"
    "(1) Generate an initial clinical response based solely on the patient's "
    "query (title + content), without referring to the metadata.\n"
    "(2) Reflect on the predicted metadata and its confidence scores. Then, "
    "evaluate whether the initial response can be improved using this structured "
    "information.\n"
    "(3) If the metadata confidence is high (greater than 0.7), refine your "
    "response using these metadata details to make it more targeted and "
    "informative.\n"
    "(4) If confidence is low (less than 0.7), do not make firm assumptions "
    "based on those fields. Instead, express clinical caution or recommend "
    "seeking professional guidance.\n"
    "(5) Pay particular attention to the wound type and wound thickness fields. "
    "Avoid overconfident guidance when these have low confidence.\n"
    "(6) Ensure that metadata like anatomic locations and tissue color (when "
    "reliable) inform and personalize your response.\n"
    "(7) Keep the final response clinically sound, concise (50 tokens or fewer), "
    "and empathetic.\n";

constexpr const char* kResponseClosing =
    "Only return the final response without any additional text and within 50 "
    "tokens.";

// --- LLM as judge -----------------------------------------------------------

constexpr const char* kJudgeSystem = "You are a helpful medical assistant.";

constexpr const char* kJudgeRubric =
    "Given a patient QUERY, and a list of REFERENCE RESPONSES, please evaluate a "
    "CANDIDATE RESPONSE using a three-step rating described below.\n"
    "\n"
    "Rating: 0 - CANDIDATE RESPONSE is incomplete and may contain medically "
    "incorrect advice.\n"
    "\n"
    "Rating: 0.5 - CANDIDATE RESPONSE is incomplete but has partially correct "
    "medical advice.\n"
    "\n"
    "Rating: 1.0 - CANDIDATE RESPONSE is complete and has medically correct "
    "advice.\n"
    "\n"
    "The REFERENCE RESPONSES represent answers given by domain experts and can "
    "be used as references for evaluation.\n";

std::string format_score(double score) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", score);
    return buf;
}

std::vector<Attachment> case_attachments(const Case& c) {
    std::vector<Attachment> attachments;
    attachments.reserve(c.image_refs.size());
    for (const auto& ref : c.image_refs) attachments.push_back({ref});
    return attachments;
}

std::string render_field_line(const FieldConfidence& field, GateState state) {
    std::string labels;
    if (field.labels.empty()) {
        labels = "unspecified";
    } else if (field.category == MetadataCategory::anatomic_location) {
        for (size_t i = 0; i < field.labels.size(); ++i) {
            if (i) labels += ", ";
            labels += field.labels[i].label + " (" + format_score(field.labels[i].score) + ")";
        }
    } else {
        labels = field.labels.front().label;
    }
    std::string line = "- " + std::string(to_string(field.category)) + ": " + labels +
                       " (confidence " + format_score(field.field_confidence) + "): ";
    if (state == GateState::assert_fact) {
        line += "treat this as a factual observation.";
    } else {
        line +=
            "low confidence, do not make firm assumptions based on this field; "
            "express clinical caution or recommend seeking professional guidance.";
    }
    return line;
}

}  // namespace

ChatRequest to_chat_request(const PromptBundle& bundle, const Decoding& decoding) {
    ChatRequest request;
    request.system_prompt = bundle.system_prompt;
    ChatMessage message;
    message.role = ChatMessage::Role::user;
    message.text = bundle.user_prompt;
    message.attachments = bundle.attachments;
    request.messages.push_back(std::move(message));
    request.decoding = decoding;
    return request;
}

PromptBundle build_fewshot_prompt(const Case& test_case, const std::vector<RetrievalHit>& hits,
                                  const CaseIndex& train_cases, const FewShotConfig& config) {
    PromptBundle bundle;
    bundle.system_prompt = kFewShotSystem;
    bundle.attachments = case_attachments(test_case);

    std::vector<RetrievalHit> ordered = hits;
    if (config.order == ExampleOrder::similar_last) {
        std::reverse(ordered.begin(), ordered.end());
    }

    std::string examples;
    size_t index = 0;
    for (const auto& hit : ordered) {
        const Case& example = train_cases.at(hit.case_id);
        if (example.responses.empty()) {
            throw Error("few-shot example case '" + hit.case_id + "' has no responses");
        }
        ++index;
        examples += "Example " + std::to_string(index) + ":\n";
        examples += "Query Title: " + example.title + "\n";
        examples += "Query Content: " + example.content + "\n";
        examples += "Response: " + example.responses.front().text + "\n\n";
    }
    if (ordered.empty()) {
        bundle.warnings.push_back("few-shot prompt rendered with an empty EXAMPLES block");
    }

    bundle.user_prompt = std::string(kFewShotTaskHeader) + "\nEXAMPLES:\n\n" + examples +
                         kFewShotClosing + test_case.title + "\n\nQuery Content: " +
                         test_case.content + "\n";
    return bundle;
}

PromptBundle build_classification_prompt(const Case& test_case,
                                         const std::vector<const Case*>& examples,
                                         const VocabularySet& vocab) {
    PromptBundle bundle;
    bundle.system_prompt = kClassificationSystem;
    bundle.attachments = case_attachments(test_case);

    std::string allowed;
    for (auto category : kSelectedCategories) {
        const auto& v = vocab.at(category);
        allowed += std::string(to_string(category));
        if (v.multi_label) allowed += " (multi-label)";
        allowed += ": ";
        for (size_t i = 0; i < v.allowed_values.size(); ++i) {
            if (i) allowed += " | ";
            allowed += v.allowed_values[i];
        }
        allowed += "\n";
    }

    std::string shots;
    size_t index = 0;
    for (const Case* example : examples) {
        if (!example || !example->gold_metadata) continue;
        nlohmann::json labels = nlohmann::json::object();
        for (auto category : kSelectedCategories) {
            auto it = example->gold_metadata->find(category);
            if (it == example->gold_metadata->end()) continue;
            if (category == MetadataCategory::anatomic_location) {
                labels["anatomic_locations"] = it->second;
            } else {
                labels[std::string(to_string(category))] =
                    it->second.empty() ? std::string{} : it->second.front();
            }
        }
        ++index;
        shots += "Example " + std::to_string(index) + ":\n";
        shots += "Title: " + example->title + "\n";
        shots += "Content: " + example->content + "\n";
        shots += "Labels: " + labels.dump() + "\n\n";
    }
    if (index == 0) {
        bundle.warnings.push_back("classification prompt rendered with no few-shot examples");
    }

    bundle.user_prompt = "CLASSIFY THE FOLLOWING IMAGES AND QUERY.\n\nAllowed values:\n" +
                         allowed + "\nFEW SHOT EXAMPLES:\n\n" + shots + "Patient Query:\nTitle: " +
                         test_case.title + "\nContent: " + test_case.content + "\n";
    return bundle;
}

PromptBundle build_gated_response_prompt(const Case& test_case,
                                         const MetadataPrediction& prediction,
                                         const GateDecision& decision) {
    PromptBundle bundle;
    bundle.system_prompt = kResponseSystem;
    bundle.attachments = case_attachments(test_case);

    std::string metadata;
    for (const auto& [category, field] : prediction.fields) {
        auto it = decision.states.find(category);
        GateState state = it == decision.states.end() ? GateState::caution : it->second;
        metadata += render_field_line(field, state) + "\n";
    }
    if (prediction.fields.empty()) {
        metadata = "(no metadata predictions available)\n";
    }

    bundle.user_prompt = std::string(kResponseTaskBlock) + "\nPatient Query:\nTitle: " +
                         test_case.title + "\nContent: " + test_case.content +
                         "\n\nPredicted Metadata:\n" + metadata + "\n" + kResponseClosing;
    return bundle;
}

PromptBundle build_judge_prompt(const Case& query_case,
                                const std::vector<std::string>& references,
                                const std::string& candidate) {
    if (references.empty()) throw Error("judge prompt requires at least one reference");
    if (candidate.empty()) throw Error("judge prompt requires a non-empty candidate");

    PromptBundle bundle;
    bundle.system_prompt = kJudgeSystem;

    std::string refs;
    for (size_t i = 0; i < references.size(); ++i) {
        refs += std::to_string(i + 1) + ". " + references[i] + "\n";
    }

    std::string query = query_case.title;
    if (!query_case.content.empty()) {
        if (!query.empty()) query += "\n";
        query += query_case.content;
    }

    bundle.user_prompt = std::string(kJudgeRubric) + "\nQUERY:\n" + query +
                         "\n\nREFERENCE RESPONSES:\n" + refs + "\nCANDIDATE RESPONSE:\n" +
                         candidate + "\n\nRATING:";
    return bundle;
}

}  // namespace wvqa::prompts
