#include "wvqa/embedding.hpp"

#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "wvqa/error.hpp"
#include "wvqa/text.hpp"

namespace wvqa {

using nlohmann::json;

std::vector<double> EmbeddingProvider::embed_one(const std::string& text) {
    return embed({text}).front();
}

// ---------------------------------------------------------------------------
// HashedBowEmbedder
// ---------------------------------------------------------------------------

HashedBowEmbedder::HashedBowEmbedder(int dim) : dim_(dim) {
    if (dim_ < 1) throw ConfigError("embedding dimension must be >= 1");
}

EmbedderIdentity HashedBowEmbedder::identity() const {
    return {"hashed-bow", "1", dim_};
}

size_t HashedBowEmbedder::bucket(const std::string& token) const {
    // FNV-1a over the token bytes, offset basis mixed with the public seed.
    uint64_t h = 1469598103934665603ULL ^ kHashSeed;
    for (unsigned char c : token) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return static_cast<size_t>(h % static_cast<uint64_t>(dim_));
}

std::vector<std::vector<double>> HashedBowEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        if (text::trim(t).empty()) {
            throw Error("cannot embed empty text");
        }
        std::vector<double> v(static_cast<size_t>(dim_), 0.0);
        for (const auto& token : text::word_tokens(t)) {
            v[bucket(token)] += 1.0;
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 0.0) {
            for (double& x : v) x /= norm;
        }
        out.push_back(std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// HttpEmbeddingProvider
// ---------------------------------------------------------------------------

HttpEmbeddingProvider::HttpEmbeddingProvider(Options options) : options_(std::move(options)) {
    if (options_.endpoint.empty()) throw ConfigError("embedding endpoint is empty");
    if (options_.dim < 1) throw ConfigError("embedding provider must declare dim >= 1");
}

EmbedderIdentity HttpEmbeddingProvider::identity() const {
    return {options_.name.empty() ? "http-embedding" : options_.name, options_.version,
            options_.dim};
}

namespace {

// Splits "http://host:port/path" into client base and path.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = endpoint.find('/', host_start);
    if (path_start == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

}  // namespace

std::vector<std::vector<double>> HttpEmbeddingProvider::embed(
    const std::vector<std::string>& texts) {
    for (const auto& t : texts) {
        if (text::trim(t).empty()) throw Error("cannot embed empty text");
    }
    auto [base, path] = split_endpoint(options_.endpoint);
    httplib::Client client(base);
    client.set_read_timeout(static_cast<time_t>(options_.timeout_seconds), 0);
    client.set_connection_timeout(static_cast<time_t>(options_.timeout_seconds), 0);
    httplib::Headers headers;
    if (!options_.api_key_env.empty()) {
        const char* key = std::getenv(options_.api_key_env.c_str());
        if (!key) {
            throw ConfigError("environment variable " + options_.api_key_env +
                              " (embedding credentials) is not set");
        }
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    json body;
    body["texts"] = texts;
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
        throw TransportError("embedding request to " + options_.endpoint + " failed: " +
                             httplib::to_string(res.error()));
    }
    if (res->status >= 400) {
        throw ProviderError(res->status, "embedding provider returned status " +
                                             std::to_string(res->status) + ": " + res->body);
    }

    json parsed;
    try {
        parsed = json::parse(res->body);
    } catch (const json::exception& e) {
        throw ProviderError(res->status, std::string("invalid embedding response JSON: ") + e.what());
    }
    if (!parsed.contains("vectors") || !parsed["vectors"].is_array()) {
        throw ProviderError(res->status, "embedding response missing 'vectors'");
    }
    int dim = parsed.value("dim", options_.dim);
    if (dim != options_.dim) {
        throw ProviderError(res->status,
                            "embedding response dim " + std::to_string(dim) +
                                " does not match declared dim " + std::to_string(options_.dim));
    }
    std::vector<std::vector<double>> out;
    for (const auto& vec : parsed["vectors"]) {
        std::vector<double> v = vec.get<std::vector<double>>();
        if (static_cast<int>(v.size()) != options_.dim) {
            throw ProviderError(res->status, "embedding vector has wrong dimension");
        }
        out.push_back(std::move(v));
    }
    if (out.size() != texts.size()) {
        throw ProviderError(res->status, "embedding response count mismatch");
    }
    return out;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw Error("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace wvqa
