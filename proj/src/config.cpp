#include "wvqa/config.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "wvqa/error.hpp"

namespace wvqa {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ChatProviderConfig chat_provider_from_json(const json& j, const std::string& what) {
    ChatProviderConfig c;
    c.kind = j.value("kind", c.kind);
    if (c.kind != "stub" && c.kind != "http") {
        throw ConfigError(what + ": provider kind must be 'stub' or 'http'");
    }
    c.name = j.value("name", c.kind);
    c.model = j.value("model", c.model);
    c.endpoint = j.value("endpoint", c.endpoint);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.fixtures_path = j.value("fixtures", c.fixtures_path);
    c.stub_fallback = j.value("stub_fallback", c.stub_fallback);
    if (c.stub_fallback != "canned" && c.stub_fallback != "echo") {
        throw ConfigError(what + ": stub_fallback must be 'canned' or 'echo'");
    }
    if (c.kind == "http" && c.endpoint.empty()) {
        throw ConfigError(what + ": http provider needs an endpoint");
    }
    return c;
}

json chat_provider_to_json(const ChatProviderConfig& c) {
    json j;
    j["kind"] = c.kind;
    j["name"] = c.name;
    j["model"] = c.model;
    j["endpoint"] = c.endpoint;
    j["api_key_env"] = c.api_key_env;
    j["timeout_seconds"] = c.timeout_seconds;
    j["fixtures"] = c.fixtures_path;
    j["stub_fallback"] = c.stub_fallback;
    return j;
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    if (path.empty() || base_dir.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base_dir) / p).string();
}

}  // namespace

RunConfig run_config_from_json(const json& j, const std::string& base_dir) {
    RunConfig config;

    if (j.contains("corpus")) {
        const json& corpus = j.at("corpus");
        for (auto split : {Split::train, Split::validation, Split::test}) {
            std::string key(to_string(split));
            if (corpus.contains(key) && !corpus.at(key).get<std::string>().empty()) {
                config.corpus_paths[split] =
                    resolve_path(base_dir, corpus.at(key).get<std::string>());
            }
        }
        config.vocabulary_path =
            resolve_path(base_dir, corpus.value("vocabulary", std::string{}));
        config.schema_strict = corpus.value("schema_strict", false);
    }

    if (j.contains("providers")) {
        const json& providers = j.at("providers");
        if (providers.contains("generation")) {
            config.generation =
                chat_provider_from_json(providers.at("generation"), "providers.generation");
            config.generation.fixtures_path =
                resolve_path(base_dir, config.generation.fixtures_path);
        }
        if (providers.contains("embedding")) {
            const json& e = providers.at("embedding");
            config.embedding.kind = e.value("kind", config.embedding.kind);
            if (config.embedding.kind != "hashed-bow" && config.embedding.kind != "http") {
                throw ConfigError("providers.embedding: kind must be 'hashed-bow' or 'http'");
            }
            config.embedding.dim = e.value("dim", config.embedding.dim);
            config.embedding.name = e.value("name", config.embedding.kind);
            config.embedding.version = e.value("version", config.embedding.version);
            config.embedding.endpoint = e.value("endpoint", config.embedding.endpoint);
            config.embedding.api_key_env = e.value("api_key_env", config.embedding.api_key_env);
            config.embedding.timeout_seconds =
                e.value("timeout_seconds", config.embedding.timeout_seconds);
            if (config.embedding.kind == "http" && config.embedding.endpoint.empty()) {
                throw ConfigError("providers.embedding: http provider needs an endpoint");
            }
        }
        if (providers.contains("judges")) {
            int index = 0;
            for (const auto& judge : providers.at("judges")) {
                config.judges.push_back(chat_provider_from_json(
                    judge, "providers.judges[" + std::to_string(index) + "]"));
                config.judges.back().fixtures_path =
                    resolve_path(base_dir, config.judges.back().fixtures_path);
                ++index;
            }
        }
    }

    if (j.contains("fewshot")) {
        const json& f = j.at("fewshot");
        config.fewshot_k = f.value("k", config.fewshot_k);
        if (f.contains("order")) {
            auto order = example_order_from_string(f.at("order").get<std::string>());
            if (!order) throw ConfigError("fewshot.order must be similar_first or similar_last");
            config.fewshot_order = *order;
        }
    }
    if (j.contains("classification")) {
        config.classification_fewshot_k =
            j.at("classification").value("fewshot_k", config.classification_fewshot_k);
        config.lenient_parse = j.at("classification").value("lenient_parse", config.lenient_parse);
    }
    if (j.contains("gate")) {
        config.gate_threshold = j.at("gate").value("threshold", config.gate_threshold);
    }
    if (j.contains("budget")) {
        config.budget_tokens = j.at("budget").value("tokens", config.budget_tokens);
        config.budget_truncate = j.at("budget").value("truncate", config.budget_truncate);
    }
    if (j.contains("decoding")) {
        const json& d = j.at("decoding");
        config.decoding.temperature = d.value("temperature", config.decoding.temperature);
        config.decoding.max_tokens = d.value("max_tokens", config.decoding.max_tokens);
        if (d.contains("seed") && !d.at("seed").is_null()) {
            config.decoding.seed = d.at("seed").get<int64_t>();
        }
    }
    config.output_dir = resolve_path(base_dir, j.value("output_dir", config.output_dir));
    config.cache_dir = resolve_path(base_dir, j.value("cache_dir", config.cache_dir));
    config.concurrency = j.value("concurrency", config.concurrency);
    if (j.contains("split")) {
        auto split = split_from_string(j.at("split").get<std::string>());
        if (!split) throw ConfigError("split must be train|validation|test");
        config.run_split = *split;
    }

    // range validation
    if (config.gate_threshold <= 0.0 || config.gate_threshold > 1.0) {
        throw ConfigError("gate.threshold must lie in (0,1]");
    }
    if (config.fewshot_k < 1) throw ConfigError("fewshot.k must be >= 1");
    if (config.classification_fewshot_k < 0) {
        throw ConfigError("classification.fewshot_k must be >= 0");
    }
    if (config.budget_tokens < 1) throw ConfigError("budget.tokens must be >= 1");
    if (config.concurrency < 1) throw ConfigError("concurrency must be >= 1");
    if (config.decoding.max_tokens < 1) throw ConfigError("decoding.max_tokens must be >= 1");
    if (config.decoding.temperature < 0.0) {
        throw ConfigError("decoding.temperature must be >= 0");
    }

    for (const auto& [split, path] : config.corpus_paths) {
        if (!fs::exists(path)) {
            throw ConfigError("corpus path for split '" + std::string(to_string(split)) +
                              "' does not exist: " + path);
        }
    }
    if (!config.vocabulary_path.empty() && !fs::exists(config.vocabulary_path)) {
        throw ConfigError("vocabulary path does not exist: " + config.vocabulary_path);
    }
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError("invalid config file " + path + ": " + e.what());
    }
    return run_config_from_json(j, fs::path(path).parent_path().string());
}

json config_to_json(const RunConfig& config) {
    json corpus;
    for (const auto& [split, path] : config.corpus_paths) {
        corpus[std::string(to_string(split))] = path;
    }
    corpus["vocabulary"] = config.vocabulary_path;
    corpus["schema_strict"] = config.schema_strict;

    json embedding;
    embedding["kind"] = config.embedding.kind;
    embedding["dim"] = config.embedding.dim;
    embedding["name"] = config.embedding.name;
    embedding["version"] = config.embedding.version;
    embedding["endpoint"] = config.embedding.endpoint;
    embedding["api_key_env"] = config.embedding.api_key_env;
    embedding["timeout_seconds"] = config.embedding.timeout_seconds;

    json judges = json::array();
    for (const auto& judge : config.judges) judges.push_back(chat_provider_to_json(judge));

    json j;
    j["corpus"] = std::move(corpus);
    j["providers"] = {{"generation", chat_provider_to_json(config.generation)},
                      {"embedding", std::move(embedding)},
                      {"judges", std::move(judges)}};
    j["fewshot"] = {{"k", config.fewshot_k},
                    {"order", std::string(to_string(config.fewshot_order))}};
    j["classification"] = {{"fewshot_k", config.classification_fewshot_k},
                           {"lenient_parse", config.lenient_parse}};
    j["gate"] = {{"threshold", config.gate_threshold}};
    j["budget"] = {{"tokens", config.budget_tokens}, {"truncate", config.budget_truncate}};
    json decoding;
    decoding["temperature"] = config.decoding.temperature;
    decoding["max_tokens"] = config.decoding.max_tokens;
    if (config.decoding.seed) decoding["seed"] = *config.decoding.seed;
    j["decoding"] = std::move(decoding);
    j["output_dir"] = config.output_dir;
    j["cache_dir"] = config.cache_dir;
    j["concurrency"] = config.concurrency;
    j["split"] = std::string(to_string(config.run_split));
    return j;
}

bool operator==(const ChatProviderConfig& a, const ChatProviderConfig& b) {
    return a.kind == b.kind && a.name == b.name && a.model == b.model &&
           a.endpoint == b.endpoint && a.api_key_env == b.api_key_env &&
           a.timeout_seconds == b.timeout_seconds && a.fixtures_path == b.fixtures_path &&
           a.stub_fallback == b.stub_fallback;
}

bool operator==(const EmbeddingProviderConfig& a, const EmbeddingProviderConfig& b) {
    return a.kind == b.kind && a.dim == b.dim && a.name == b.name && a.version == b.version &&
           a.endpoint == b.endpoint && a.api_key_env == b.api_key_env &&
           a.timeout_seconds == b.timeout_seconds;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.corpus_paths == b.corpus_paths && a.vocabulary_path == b.vocabulary_path &&
           a.schema_strict == b.schema_strict && a.generation == b.generation &&
           a.embedding == b.embedding && a.judges == b.judges && a.fewshot_k == b.fewshot_k &&
           a.fewshot_order == b.fewshot_order &&
           a.classification_fewshot_k == b.classification_fewshot_k &&
           a.gate_threshold == b.gate_threshold && a.budget_tokens == b.budget_tokens &&
           a.budget_truncate == b.budget_truncate && a.lenient_parse == b.lenient_parse &&
           a.decoding.temperature == b.decoding.temperature &&
           a.decoding.max_tokens == b.decoding.max_tokens &&
           a.decoding.seed == b.decoding.seed && a.output_dir == b.output_dir &&
           a.cache_dir == b.cache_dir && a.concurrency == b.concurrency &&
           a.run_split == b.run_split;
}

std::unique_ptr<ChatProvider> make_chat_provider(const ChatProviderConfig& config) {
    if (config.kind == "stub") {
        auto fallback = config.stub_fallback == "echo" ? StubChatProvider::Fallback::echo_last_user
                                                       : StubChatProvider::Fallback::canned;
        auto stub = std::make_unique<StubChatProvider>(config.model, fallback,
                                                       config.name.empty() ? "stub" : config.name);
        if (!config.fixtures_path.empty()) stub->load_fixtures(config.fixtures_path);
        return stub;
    }
    HttpChatProvider::Options options;
    options.endpoint = config.endpoint;
    options.name = config.name;
    options.model = config.model;
    options.api_key_env = config.api_key_env;
    options.timeout_seconds = config.timeout_seconds;
    return std::make_unique<HttpChatProvider>(options);
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const EmbeddingProviderConfig& config) {
    if (config.kind == "hashed-bow") {
        return std::make_unique<HashedBowEmbedder>(config.dim);
    }
    HttpEmbeddingProvider::Options options;
    options.endpoint = config.endpoint;
    options.name = config.name;
    options.version = config.version;
    options.dim = config.dim;
    options.api_key_env = config.api_key_env;
    options.timeout_seconds = config.timeout_seconds;
    return std::make_unique<HttpEmbeddingProvider>(options);
}

}  // namespace wvqa
