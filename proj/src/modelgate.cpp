#include "wvqa/modelgate.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "wvqa/digest.hpp"
#include "wvqa/error.hpp"

namespace wvqa {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Canonicalization
// ---------------------------------------------------------------------------

std::string canonical_request_json(const ProviderIdentity& provider, const ChatRequest& request) {
    // nlohmann objects are key-sorted maps, so dump() is canonical by itself.
    json j;
    j["provider"] = {{"name", provider.name}, {"model", provider.model},
                     {"version", provider.version}};
    j["system_prompt"] = request.system_prompt;
    json messages = json::array();
    for (const auto& m : request.messages) {
        json mj;
        mj["role"] = m.role == ChatMessage::Role::user ? "user" : "assistant";
        mj["text"] = m.text;
        json atts = json::array();
        for (const auto& a : m.attachments) atts.push_back(a.ref);
        mj["attachments"] = std::move(atts);
        messages.push_back(std::move(mj));
    }
    j["messages"] = std::move(messages);
    json dec;
    dec["temperature"] = request.decoding.temperature;
    dec["max_tokens"] = request.decoding.max_tokens;
    if (request.decoding.seed) dec["seed"] = *request.decoding.seed;
    j["decoding"] = std::move(dec);
    return j.dump();
}

std::string request_digest(const ProviderIdentity& provider, const ChatRequest& request) {
    return sha256_hex(canonical_request_json(provider, request));
}

// ---------------------------------------------------------------------------
// Stub provider
// ---------------------------------------------------------------------------

StubChatProvider::StubChatProvider(std::string model, Fallback fallback, std::string name)
    : model_(std::move(model)), fallback_(fallback), name_(std::move(name)) {}

ProviderIdentity StubChatProvider::identity() const {
    return {name_, model_, "1"};
}

Completion StubChatProvider::complete(const ChatRequest& request) {
    calls_.fetch_add(1);
    if (request.messages.empty()) throw ProviderError(400, "stub: request has no messages");
    const std::string digest = request_digest(identity(), request);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = fixtures_.find(digest);
        if (it != fixtures_.end()) return {it->second, {}};
    }
    if (fallback_ == Fallback::echo_last_user) {
        for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
            if (it->role == ChatMessage::Role::user) return {it->text, {}};
        }
    }
    return {kNoFixture, {}};
}

void StubChatProvider::add_fixture(const std::string& digest, const std::string& text) {
    std::lock_guard<std::mutex> lock(mutex_);
    fixtures_[digest] = text;
}

void StubChatProvider::add_fixture_for(const ChatRequest& request, const std::string& text) {
    add_fixture(request_digest(identity(), request), text);
}

void StubChatProvider::load_fixtures(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open stub fixtures file: " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError("invalid stub fixtures file " + path + ": " + e.what());
    }
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto it = j.begin(); it != j.end(); ++it) {
        fixtures_[it.key()] = it.value().get<std::string>();
    }
}

// ---------------------------------------------------------------------------
// HTTP provider
// ---------------------------------------------------------------------------

HttpChatProvider::HttpChatProvider(Options options) : options_(std::move(options)) {
    if (options_.endpoint.empty()) throw ConfigError("chat provider endpoint is empty");
    if (options_.model.empty()) throw ConfigError("chat provider model identifier is empty");
}

ProviderIdentity HttpChatProvider::identity() const {
    return {options_.name.empty() ? "http" : options_.name, options_.model, options_.version};
}

namespace {

std::string mime_from_extension(const std::string& path) {
    auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == "jpg" || ext == "jpeg") return "image/jpeg";
    if (ext == "png") return "image/png";
    if (ext == "gif") return "image/gif";
    if (ext == "webp") return "image/webp";
    return "application/octet-stream";
}

std::string attachment_url(const Attachment& attachment) {
    if (attachment.ref.rfind("data:", 0) == 0) return attachment.ref;
    std::ifstream in(attachment.ref, std::ios::binary);
    if (!in) throw Error("cannot read attachment file: " + attachment.ref);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    return "data:" + mime_from_extension(attachment.ref) + ";base64," +
           base64_encode(bytes.str());
}

std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = endpoint.find('/', host_start);
    if (path_start == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

}  // namespace

json HttpChatProvider::wire_payload(const Options& options, const ChatRequest& request) {
    json payload;
    payload["model"] = options.model;
    payload["temperature"] = request.decoding.temperature;
    payload["max_tokens"] = request.decoding.max_tokens;
    if (request.decoding.seed) payload["seed"] = *request.decoding.seed;

    json messages = json::array();
    if (!request.system_prompt.empty()) {
        messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    }
    for (const auto& m : request.messages) {
        json mj;
        mj["role"] = m.role == ChatMessage::Role::user ? "user" : "assistant";
        if (m.attachments.empty()) {
            mj["content"] = m.text;
        } else {
            json parts = json::array();
            parts.push_back({{"type", "text"}, {"text", m.text}});
            for (const auto& a : m.attachments) {
                parts.push_back(
                    {{"type", "image_url"}, {"image_url", {{"url", attachment_url(a)}}}});
            }
            mj["content"] = std::move(parts);
        }
        messages.push_back(std::move(mj));
    }
    payload["messages"] = std::move(messages);
    return payload;
}

Completion HttpChatProvider::complete(const ChatRequest& request) {
    if (request.messages.empty()) throw ProviderError(400, "request has no messages");

    auto [base, path] = split_endpoint(options_.endpoint);
    httplib::Client client(base);
    client.set_read_timeout(static_cast<time_t>(options_.timeout_seconds), 0);
    client.set_connection_timeout(static_cast<time_t>(options_.timeout_seconds), 0);

    httplib::Headers headers;
    if (!options_.api_key_env.empty()) {
        const char* key = std::getenv(options_.api_key_env.c_str());
        if (!key) {
            throw ConfigError("environment variable " + options_.api_key_env +
                              " (provider credentials) is not set");
        }
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    auto res = client.Post(path, headers, wire_payload(options_, request).dump(),
                           "application/json");
    if (!res) {
        throw TransportError("chat request to " + options_.endpoint + " failed: " +
                             httplib::to_string(res.error()));
    }
    if (res->status >= 500) {
        throw TransportError("chat provider returned status " + std::to_string(res->status));
    }
    if (res->status >= 400) {
        throw ProviderError(res->status, "chat provider returned status " +
                                             std::to_string(res->status) + ": " + res->body);
    }

    json parsed;
    try {
        parsed = json::parse(res->body);
    } catch (const json::exception& e) {
        throw ProviderError(res->status, std::string("invalid chat response JSON: ") + e.what());
    }
    if (!parsed.contains("choices") || parsed["choices"].empty()) {
        throw ProviderError(res->status, "chat response has no choices");
    }
    Completion completion;
    completion.text = parsed["choices"][0]["message"]["content"].get<std::string>();
    if (parsed.contains("usage")) {
        completion.usage.prompt_tokens = parsed["usage"].value("prompt_tokens", 0);
        completion.usage.completion_tokens = parsed["usage"].value("completion_tokens", 0);
    }
    return completion;
}

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

ResponseCache::ResponseCache(std::string directory) : directory_(std::move(directory)) {
    fs::create_directories(directory_);
}

std::optional<Completion> ResponseCache::lookup(const std::string& digest) const {
    fs::path file = fs::path(directory_) / (digest + ".json");
    std::ifstream in(file);
    if (!in) return std::nullopt;
    try {
        json j = json::parse(in);
        Completion completion;
        completion.text = j.at("response").at("text").get<std::string>();
        completion.usage.prompt_tokens = j.at("response").value("prompt_tokens", 0);
        completion.usage.completion_tokens = j.at("response").value("completion_tokens", 0);
        return completion;
    } catch (const json::exception& e) {
        std::lock_guard<std::mutex> lock(mutex_);
        warnings_.push_back("corrupt cache entry " + file.string() + " treated as miss: " +
                            e.what());
        return std::nullopt;
    }
}

void ResponseCache::store(const std::string& digest, const ProviderIdentity& provider,
                          const std::string& canonical_request,
                          const Completion& completion) const {
    json j;
    j["digest"] = digest;
    j["provider"] = {{"name", provider.name}, {"model", provider.model},
                     {"version", provider.version}};
    j["request"] = json::parse(canonical_request);
    j["response"] = {{"text", completion.text},
                     {"prompt_tokens", completion.usage.prompt_tokens},
                     {"completion_tokens", completion.usage.completion_tokens}};

    fs::path final_path = fs::path(directory_) / (digest + ".json");
    // unique temp name per thread keeps concurrent writers from colliding
    std::ostringstream tmp_name;
    tmp_name << digest << ".tmp." << std::this_thread::get_id();
    fs::path tmp_path = fs::path(directory_) / tmp_name.str();
    {
        std::ofstream out(tmp_path);
        if (!out) throw Error("cache directory not writable: " + directory_);
        out << j.dump(2) << '\n';
    }
    fs::rename(tmp_path, final_path);
}

std::vector<std::string> ResponseCache::take_warnings() const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto out = std::move(warnings_);
    warnings_.clear();
    return out;
}

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

Gateway::Gateway(ChatProvider& provider, ResponseCache* cache)
    : Gateway(provider, cache, Options{}) {}

Gateway::Gateway(ChatProvider& provider, ResponseCache* cache, Options options)
    : provider_(provider), cache_(cache), options_(options),
      inflight_(options.max_inflight > 0 ? options.max_inflight : 1) {}

Completion Gateway::call_with_retry(const ChatRequest& request) {
    int attempt = 0;
    for (;;) {
        ++attempt;
        try {
            provider_calls_.fetch_add(1);
            return provider_.complete(request);
        } catch (const TransportError&) {
            if (attempt >= options_.max_attempts) throw;
            auto delay = std::chrono::milliseconds(options_.backoff_base_ms * (1 << (attempt - 1)));
            std::this_thread::sleep_for(delay);
        }
    }
}

Gateway::Result Gateway::complete(const ChatRequest& request) {
    requests_.fetch_add(1);
    const std::string digest = request_digest(provider_.identity(), request);
    if (cache_) {
        if (auto cached = cache_->lookup(digest)) {
            cache_hits_.fetch_add(1);
            return {*cached, true};
        }
    }
    inflight_.acquire();
    Completion completion;
    try {
        completion = call_with_retry(request);
    } catch (...) {
        inflight_.release();
        throw;
    }
    inflight_.release();
    if (cache_) {
        cache_->store(digest, provider_.identity(),
                      canonical_request_json(provider_.identity(), request), completion);
    }
    return {completion, false};
}

}  // namespace wvqa
