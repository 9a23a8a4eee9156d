#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wvqa/corpus.hpp"
#include "wvqa/embedding.hpp"
#include "wvqa/modelgate.hpp"
#include "wvqa/pipeline_types.hpp"

namespace wvqa {

/// One chat-provider block. kind "stub" runs offline (fixture table +
/// canned/echo fallback); kind "http" talks to an OpenAI-style endpoint with
/// credentials taken from the named environment variable.
struct ChatProviderConfig {
    std::string kind = "stub";  // stub | http
    std::string name;           // label recorded in manifests
    std::string model = "stub-model";
    std::string endpoint;
    std::string api_key_env;
    double timeout_seconds = 120.0;
    std::string fixtures_path;            // stub only
    std::string stub_fallback = "canned";  // canned | echo
};

struct EmbeddingProviderConfig {
    std::string kind = "hashed-bow";  // hashed-bow | http
    int dim = 256;
    std::string name;
    std::string version = "1";
    std::string endpoint;
    std::string api_key_env;
    double timeout_seconds = 60.0;
};

struct RunConfig {
    std::map<Split, std::string> corpus_paths;
    std::string vocabulary_path;
    bool schema_strict = false;

    ChatProviderConfig generation;
    EmbeddingProviderConfig embedding;
    std::vector<ChatProviderConfig> judges;

    int fewshot_k = 5;
    ExampleOrder fewshot_order = ExampleOrder::similar_first;
    int classification_fewshot_k = 5;
    double gate_threshold = 0.7;
    int budget_tokens = 50;
    bool budget_truncate = false;
    bool lenient_parse = false;

    Decoding decoding;  // temperature 0.0, seed fixed by default

    std::string output_dir = "out";
    std::string cache_dir = "cache";
    int concurrency = 4;
    Split run_split = Split::test;
};

/// Parse the config document (JSON with // comments allowed). Validates
/// ranges (threshold in (0,1], k >= 1) and that referenced corpus paths
/// exist. Throws ConfigError.
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json(const nlohmann::json& j, const std::string& base_dir = "");

/// Canonical JSON used for the manifest embed and the config digest;
/// config_from_json(config_to_json(c)) == c.
nlohmann::json config_to_json(const RunConfig& config);

bool operator==(const ChatProviderConfig& a, const ChatProviderConfig& b);
bool operator==(const EmbeddingProviderConfig& a, const EmbeddingProviderConfig& b);
bool operator==(const RunConfig& a, const RunConfig& b);

/// Instantiate providers from config blocks.
std::unique_ptr<ChatProvider> make_chat_provider(const ChatProviderConfig& config);
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingProviderConfig& config);

}  // namespace wvqa
