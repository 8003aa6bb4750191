// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ltrr/common.hpp"
#include "ltrr/corpus.hpp"
#include "ltrr/embedding.hpp"
#include "ltrr/rerank.hpp"

namespace ltrr {

struct RankedItem {
    std::string doc_id;
    double score;
};

struct RankedList {
    std::string retriever_id;
    std::vector<RankedItem> items;  // scores non-increasing, doc_ids distinct
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// In-memory inverted index with BM25 scoring. Only documents containing at
/// least one query term are candidates; ties break by doc_id ascending.
class Bm25Index {
public:
    explicit Bm25Index(const std::vector<CorpusRecord>& corpus);
    RankedList retrieve(const std::string& query, int k, const Bm25Params& params = {}) const;
    std::size_t size() const { return doc_ids_.size(); }

private:
    std::vector<std::string> doc_ids_;
    std::vector<int> doc_lengths_;
    double avg_doc_length_ = 0.0;
    std::unordered_map<std::string, std::vector<std::pair<int, int>>> postings_;  // term -> (doc, tf)
};

/// Brute-force cosine retrieval over unit-norm document embeddings.
class DenseIndex {
public:
    DenseIndex(const std::vector<CorpusRecord>& corpus, const EmbeddingProvider& provider);
    RankedList retrieve(const Vec& query_embedding, int k) const;
    const Vec& embedding_of(const std::string& doc_id) const;
    std::size_t size() const { return doc_ids_.size(); }

private:
    std::vector<std::string> doc_ids_;
    std::vector<Vec> embeddings_;
    std::unordered_map<std::string, std::size_t> index_of_;
};

enum class BaseKind { bm25, dense, none };
enum class RerankKind { none, regularize, stochastic };

struct RetrieverSpec {
    std::string id;
    BaseKind base = BaseKind::bm25;
    RerankKind reranker = RerankKind::none;
    std::map<std::string, double> params;  // k1, b, m, t, alpha, n_samples
};

BaseKind base_kind_from_string(const std::string& s);
RerankKind rerank_kind_from_string(const std::string& s);
std::string to_string(BaseKind b);
std::string to_string(RerankKind r);

/// The default 7-option configuration: six retrievers plus no-retrieval.
std::vector<RetrieverSpec> default_pool_specs();

/// Composes base retrievers and rerankers behind a single retrieve() surface.
/// Immutable after construction; concurrent retrieval is safe.
class RetrieverPool {
public:
    RetrieverPool(const std::vector<CorpusRecord>& corpus,
                  std::shared_ptr<const EmbeddingProvider> provider,
                  const std::vector<RetrieverSpec>& specs, std::uint64_t seed);

    /// Ranked ids in spec order; includes the no-retrieval id when configured.
    const std::vector<std::string>& ids() const { return ids_; }
    /// Id of the no-retrieval option, empty if none configured.
    const std::string& noret_id() const { return noret_id_; }
    std::size_t size() const { return ids_.size(); }

    /// Empty list for the no-retrieval option and for queries with no tokens.
    RankedList retrieve(const std::string& retriever_id, const std::string& query, int k) const;

    const std::string& document_text(const std::string& doc_id) const;
    Vec document_embedding(const std::string& doc_id) const;
    const EmbeddingProvider& provider() const { return *provider_; }

private:
    std::shared_ptr<const EmbeddingProvider> provider_;
    std::unique_ptr<Bm25Index> bm25_;
    std::unique_ptr<DenseIndex> dense_;
    std::unordered_map<std::string, std::string> doc_texts_;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, RetrieverSpec> specs_;
    std::string noret_id_;
    std::uint64_t seed_;
};

}  // namespace ltrr
