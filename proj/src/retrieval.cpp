#include "wvqa/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wvqa/error.hpp"
#include "wvqa/text.hpp"

namespace wvqa {

namespace {

void l2_normalize(std::vector<double>& v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (double& x : v) x /= norm;
    }
}

}  // namespace

std::vector<double> embed_text(const std::string& text_in, EmbeddingProvider& provider) {
    if (text::trim(text_in).empty()) throw Error("embed_text: text is empty");
    return provider.embed_one(text_in);
}

EmbeddingIndex EmbeddingIndex::build(const std::vector<Case>& cases,
                                     EmbeddingProvider& provider) {
    if (cases.empty()) throw Error("build_index: case list is empty");

    std::set<std::string> seen;
    std::vector<std::string> texts;
    texts.reserve(cases.size());
    for (const auto& c : cases) {
        if (!seen.insert(c.case_id).second) {
            throw Error("build_index: duplicate case_id '" + c.case_id + "'");
        }
        texts.push_back(c.query_text());
    }

    auto vectors = provider.embed(texts);
    if (vectors.size() != cases.size()) {
        throw Error("build_index: provider returned wrong vector count");
    }

    EmbeddingIndex index;
    index.dim_ = provider.dim();
    index.entries_.reserve(cases.size());
    for (size_t i = 0; i < cases.size(); ++i) {
        if (static_cast<int>(vectors[i].size()) != index.dim_) {
            throw Error("build_index: vector dimension mismatch for case '" +
                        cases[i].case_id + "'");
        }
        l2_normalize(vectors[i]);
        index.entries_.push_back({cases[i].case_id, std::move(vectors[i])});
    }
    std::sort(index.entries_.begin(), index.entries_.end(),
              [](const Entry& a, const Entry& b) { return a.case_id < b.case_id; });
    return index;
}

std::vector<RetrievalHit> EmbeddingIndex::top_k(const std::string& query_text, int k,
                                                EmbeddingProvider& provider) const {
    if (k < 1) throw Error("top_k: k must be >= 1");
    if (entries_.empty()) throw Error("top_k: index is empty");

    auto query = embed_text(query_text, provider);
    if (static_cast<int>(query.size()) != dim_) {
        throw Error("top_k: query vector dimension mismatch");
    }
    l2_normalize(query);

    std::vector<RetrievalHit> hits;
    hits.reserve(entries_.size());
    for (const auto& entry : entries_) {
        double dot = 0.0;
        for (size_t i = 0; i < entry.vector.size(); ++i) dot += query[i] * entry.vector[i];
        hits.push_back({entry.case_id, dot, 0});
    }
    std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.case_id < b.case_id;
    });
    if (hits.size() > static_cast<size_t>(k)) hits.resize(static_cast<size_t>(k));
    for (size_t i = 0; i < hits.size(); ++i) hits[i].rank = static_cast<int>(i) + 1;
    return hits;
}

}  // namespace wvqa
