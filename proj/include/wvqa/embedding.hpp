#pragma once

#include <memory>
#include <string>
#include <vector>

namespace wvqa {

/// Identity recorded in run manifests so results are attributable.
struct EmbedderIdentity {
    std::string name;
    std::string version;
    int dim = 0;
};

/// Pluggable text embedding provider. Implementations must be deterministic
/// for a fixed identity and safe to call from multiple threads.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual EmbedderIdentity identity() const = 0;
    virtual int dim() const = 0;

    /// Embed a batch of texts; one vector of `dim()` doubles per text.
    /// Throws TransportError / ProviderError on failure; empty (all
    /// whitespace) texts are rejected with an Error.
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;

    std::vector<double> embed_one(const std::string& text);
};

/// Offline fallback embedder: L2-normalized hashed bag-of-words over
/// lowercased word tokens. Fixed dimension (default 256) and a fixed public
/// hash seed make it deterministic and dependency-free. Texts that share no
/// word token map to orthogonal vectors absent hash-bucket collisions.
class HashedBowEmbedder : public EmbeddingProvider {
public:
    static constexpr int kDefaultDim = 256;
    static constexpr uint64_t kHashSeed = 0x9e3779b97f4a7c15ULL;

    explicit HashedBowEmbedder(int dim = kDefaultDim);

    EmbedderIdentity identity() const override;
    int dim() const override { return dim_; }
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

    /// Bucket index for one token (exposed for collision checks in tests).
    size_t bucket(const std::string& token) const;

private:
    int dim_;
};

/// Remote embedding endpoint speaking the documented JSON contract:
/// request {"texts": [...]}, response {"vectors": [[...]], "dim": N}.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    struct Options {
        std::string endpoint;      // e.g. http://host:port/embed
        std::string name;          // provider label for manifests
        std::string version = "1";
        int dim = 0;               // declared dimension; validated on responses
        std::string api_key_env;   // optional bearer-token environment variable
        double timeout_seconds = 60.0;
    };

    explicit HttpEmbeddingProvider(Options options);

    EmbedderIdentity identity() const override;
    int dim() const override { return options_.dim; }
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

private:
    Options options_;
};

/// Cosine similarity; zero vectors yield 0.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace wvqa
