#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace wvqa {

// ---------------------------------------------------------------------------
// Requests
// ---------------------------------------------------------------------------

/// Opaque attachment reference: a relative file path or a data: URI.
/// The harness never decodes image content.
struct Attachment {
    std::string ref;
};

struct ChatMessage {
    enum class Role { user, assistant };
    Role role = Role::user;
    std::string text;
    std::vector<Attachment> attachments;
};

struct Decoding {
    double temperature = 0.0;
    int max_tokens = 1024;
    std::optional<int64_t> seed;
};

struct ChatRequest {
    std::string system_prompt;
    std::vector<ChatMessage> messages;  // at least one user message
    Decoding decoding;
};

struct Usage {
    int64_t prompt_tokens = 0;
    int64_t completion_tokens = 0;
};

struct Completion {
    std::string text;
    Usage usage;
};

struct ProviderIdentity {
    std::string name;
    std::string model;
    std::string version = "1";
};

// ---------------------------------------------------------------------------
// Digests
// ---------------------------------------------------------------------------

/// Byte-stable canonical JSON of (provider identity, request): object keys
/// sorted, no insignificant whitespace. Semantically identical requests
/// canonicalize to the same bytes on every platform.
std::string canonical_request_json(const ProviderIdentity& provider, const ChatRequest& request);

/// Cache key: sha256 hex over the canonical request JSON.
std::string request_digest(const ProviderIdentity& provider, const ChatRequest& request);

// ---------------------------------------------------------------------------
// Providers
// ---------------------------------------------------------------------------

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ProviderIdentity identity() const = 0;

    /// Returns provider text verbatim. Throws TransportError for retryable
    /// network failures, ProviderError for terminal (4xx) failures.
    virtual Completion complete(const ChatRequest& request) = 0;
};

/// Deterministic offline provider. Responses come from a fixture table keyed
/// by request digest; unknown digests fall back to either a canned marker
/// string or an echo of the last user message.
class StubChatProvider : public ChatProvider {
public:
    static constexpr const char* kNoFixture = "STUB-NO-FIXTURE";
    enum class Fallback { canned, echo_last_user };

    explicit StubChatProvider(std::string model = "stub-model",
                              Fallback fallback = Fallback::canned, std::string name = "stub");

    ProviderIdentity identity() const override;
    Completion complete(const ChatRequest& request) override;

    void add_fixture(const std::string& digest, const std::string& text);
    /// Convenience: register a response for a concrete request.
    void add_fixture_for(const ChatRequest& request, const std::string& text);
    void load_fixtures(const std::string& path);  // JSON {digest: text}

    int64_t calls() const { return calls_.load(); }

private:
    std::string model_;
    Fallback fallback_;
    std::string name_;
    mutable std::mutex mutex_;
    std::map<std::string, std::string> fixtures_;
    std::atomic<int64_t> calls_{0};
};

/// OpenAI-style chat-completions endpoint. Credentials come from the
/// environment variable named in the options; image attachments are forwarded
/// as data URLs (data: refs pass through, file paths are read and base64
/// encoded, never decoded as pixels).
class HttpChatProvider : public ChatProvider {
public:
    struct Options {
        std::string endpoint;  // e.g. http://host:port/v1/chat/completions
        std::string name;      // provider label
        std::string model;     // model identifier sent in the payload
        std::string version = "1";
        std::string api_key_env;
        double timeout_seconds = 120.0;
    };

    explicit HttpChatProvider(Options options);

    ProviderIdentity identity() const override;
    Completion complete(const ChatRequest& request) override;

    /// Payload shape sent on the wire (exposed for tests).
    static nlohmann::json wire_payload(const Options& options, const ChatRequest& request);

private:
    Options options_;
};

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

/// One human-inspectable JSON file per digest under a flat directory.
/// Writes go through a temp file + atomic rename so concurrent writers are
/// safe; corrupt entries are treated as misses with a warning.
class ResponseCache {
public:
    explicit ResponseCache(std::string directory);

    std::optional<Completion> lookup(const std::string& digest) const;
    void store(const std::string& digest, const ProviderIdentity& provider,
               const std::string& canonical_request, const Completion& completion) const;

    const std::string& directory() const { return directory_; }
    std::vector<std::string> take_warnings() const;

private:
    std::string directory_;
    mutable std::vector<std::string> warnings_;
    mutable std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

/// Uniform entry point: cache in front of a provider, bounded concurrent
/// in-flight requests, and bounded exponential-backoff retry (3 attempts)
/// for transport failures.
class Gateway {
public:
    struct Options {
        int max_inflight = 4;
        int max_attempts = 3;
        int backoff_base_ms = 100;
    };

    struct Result {
        Completion completion;
        bool cache_hit = false;
    };

    Gateway(ChatProvider& provider, ResponseCache* cache);
    Gateway(ChatProvider& provider, ResponseCache* cache, Options options);

    Result complete(const ChatRequest& request);

    ProviderIdentity identity() const { return provider_.identity(); }
    int64_t provider_calls() const { return provider_calls_.load(); }
    int64_t cache_hits() const { return cache_hits_.load(); }
    int64_t requests() const { return requests_.load(); }

private:
    Completion call_with_retry(const ChatRequest& request);

    ChatProvider& provider_;
    ResponseCache* cache_;
    Options options_;
    std::counting_semaphore<1 << 20> inflight_;
    std::atomic<int64_t> provider_calls_{0};
    std::atomic<int64_t> cache_hits_{0};
    std::atomic<int64_t> requests_{0};
};

}  // namespace wvqa
