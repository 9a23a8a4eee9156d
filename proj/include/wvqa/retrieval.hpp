#pragma once

#include <string>
#include <vector>

#include "wvqa/corpus.hpp"
#include "wvqa/embedding.hpp"

namespace wvqa {

struct RetrievalHit {
    std::string case_id;
    double similarity = 0.0;  // cosine, in [-1, 1]
    int rank = 0;             // 1-based
};

/// Exact-scan similarity index over training cases. Vectors are L2-normalized
/// at build time; the index is immutable afterwards and safe for concurrent
/// readers. Ranking is deterministic: similarity descending, ties broken by
/// ascending case_id, independent of insertion order.
class EmbeddingIndex {
public:
    /// Embed each case's title + " " + content and freeze the index.
    /// Throws on an empty case list, duplicate case_id, or embedding failure
    /// (no partial index is ever produced).
    static EmbeddingIndex build(const std::vector<Case>& cases, EmbeddingProvider& provider);

    std::vector<RetrievalHit> top_k(const std::string& query_text, int k,
                                    EmbeddingProvider& provider) const;

    size_t size() const { return entries_.size(); }
    int dim() const { return dim_; }

private:
    struct Entry {
        std::string case_id;
        std::vector<double> vector;  // unit length
    };

    std::vector<Entry> entries_;  // sorted by case_id
    int dim_ = 0;
};

/// Embed one text through the provider (error on empty text; propagates
/// provider failures).
std::vector<double> embed_text(const std::string& text, EmbeddingProvider& provider);

}  // namespace wvqa
