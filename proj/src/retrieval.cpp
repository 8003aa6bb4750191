// SPDX-License-Identifier: Apache-2.0
#include "ltrr/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace ltrr {

namespace {

void sort_and_truncate(std::vector<RankedItem>& items, int k) {
    std::sort(items.begin(), items.end(), [](const RankedItem& a, const RankedItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (static_cast<int>(items.size()) > k) items.resize(static_cast<std::size_t>(k));
}

}  // namespace

Bm25Index::Bm25Index(const std::vector<CorpusRecord>& corpus) {
    if (corpus.empty()) throw std::invalid_argument("Bm25Index: empty corpus");
    doc_ids_.reserve(corpus.size());
    doc_lengths_.reserve(corpus.size());
    long long total = 0;
    for (const auto& doc : corpus) {
        int d = static_cast<int>(doc_ids_.size());
        doc_ids_.push_back(doc.id);
        auto tokens = tokenize(doc.text);
        doc_lengths_.push_back(static_cast<int>(tokens.size()));
        total += static_cast<long long>(tokens.size());
        std::map<std::string, int> tf;
        for (auto& t : tokens) ++tf[t];
        for (auto& [term, count] : tf) postings_[term].emplace_back(d, count);
    }
    avg_doc_length_ = static_cast<double>(total) / static_cast<double>(corpus.size());
}

RankedList Bm25Index::retrieve(const std::string& query, int k, const Bm25Params& params) const {
    if (k <= 0) throw std::invalid_argument("bm25_retrieve: k must be positive");
    RankedList out;
    out.retriever_id = "bm25";
    auto terms = tokenize(query);
    if (terms.empty()) return out;
    // Deduplicate query terms; BM25 query term frequency weighting is omitted.
    std::unordered_set<std::string> seen;
    const double n_docs = static_cast<double>(doc_ids_.size());
    std::unordered_map<int, double> scores;
    for (const auto& term : terms) {
        if (!seen.insert(term).second) continue;
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto& plist = it->second;
        double df = static_cast<double>(plist.size());
        double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        for (const auto& [doc, tf] : plist) {
            double len_norm = 1.0 - params.b + params.b * doc_lengths_[static_cast<std::size_t>(doc)] / avg_doc_length_;
            double w = idf * (tf * (params.k1 + 1.0)) / (tf + params.k1 * len_norm);
            scores[doc] += w;
        }
    }
    out.items.reserve(scores.size());
    for (const auto& [doc, score] : scores) {
        out.items.push_back({doc_ids_[static_cast<std::size_t>(doc)], score});
    }
    sort_and_truncate(out.items, k);
    return out;
}

DenseIndex::DenseIndex(const std::vector<CorpusRecord>& corpus, const EmbeddingProvider& provider) {
    if (corpus.empty()) throw std::invalid_argument("DenseIndex: empty corpus");
    for (const auto& doc : corpus) {
        Vec emb = provider.embed(doc.id, doc.text);
        if (l2_norm(emb) == 0.0) {
            throw std::runtime_error("DenseIndex: zero embedding for document \"" + doc.id + "\"");
        }
        index_of_[doc.id] = doc_ids_.size();
        doc_ids_.push_back(doc.id);
        embeddings_.push_back(std::move(emb));
    }
}

RankedList DenseIndex::retrieve(const Vec& query_embedding, int k) const {
    if (k <= 0) throw std::invalid_argument("dense_retrieve: k must be positive");
    RankedList out;
    out.retriever_id = "dense";
    if (l2_norm(query_embedding) == 0.0) return out;  // zero-context sentinel
    out.items.reserve(doc_ids_.size());
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        out.items.push_back({doc_ids_[i], dot(query_embedding, embeddings_[i])});
    }
    sort_and_truncate(out.items, k);
    return out;
}

const Vec& DenseIndex::embedding_of(const std::string& doc_id) const {
    auto it = index_of_.find(doc_id);
    if (it == index_of_.end()) throw std::invalid_argument("unknown doc id: " + doc_id);
    return embeddings_[it->second];
}

BaseKind base_kind_from_string(const std::string& s) {
    if (s == "bm25") return BaseKind::bm25;
    if (s == "dense") return BaseKind::dense;
    if (s == "none") return BaseKind::none;
    throw std::invalid_argument("unknown retriever base: " + s);
}

RerankKind rerank_kind_from_string(const std::string& s) {
    if (s == "none") return RerankKind::none;
    if (s == "regularize") return RerankKind::regularize;
    if (s == "stochastic") return RerankKind::stochastic;
    throw std::invalid_argument("unknown reranker: " + s);
}

std::string to_string(BaseKind b) {
    switch (b) {
        case BaseKind::bm25: return "bm25";
        case BaseKind::dense: return "dense";
        case BaseKind::none: return "none";
    }
    throw std::logic_error("unreachable base kind");
}

std::string to_string(RerankKind r) {
    switch (r) {
        case RerankKind::none: return "none";
        case RerankKind::regularize: return "regularize";
        case RerankKind::stochastic: return "stochastic";
    }
    throw std::logic_error("unreachable rerank kind");
}

std::vector<RetrieverSpec> default_pool_specs() {
    return {
        {"bm25", BaseKind::bm25, RerankKind::none, {}},
        {"bm25_reg", BaseKind::bm25, RerankKind::regularize, {}},
        {"bm25_stoch", BaseKind::bm25, RerankKind::stochastic, {}},
        {"dense", BaseKind::dense, RerankKind::none, {}},
        {"dense_reg", BaseKind::dense, RerankKind::regularize, {}},
        {"dense_stoch", BaseKind::dense, RerankKind::stochastic, {}},
        {"none", BaseKind::none, RerankKind::none, {}},
    };
}

RetrieverPool::RetrieverPool(const std::vector<CorpusRecord>& corpus,
                             std::shared_ptr<const EmbeddingProvider> provider,
                             const std::vector<RetrieverSpec>& specs, std::uint64_t seed)
    : provider_(std::move(provider)), seed_(seed) {
    if (specs.empty()) throw std::invalid_argument("RetrieverPool: no specs");
    bool need_bm25 = false, need_dense = false;
    for (const auto& spec : specs) {
        if (specs_.count(spec.id)) {
            throw std::invalid_argument("RetrieverPool: duplicate retriever id \"" + spec.id + "\"");
        }
        if (spec.base == BaseKind::none) {
            if (spec.reranker != RerankKind::none) {
                throw std::invalid_argument("RetrieverPool: no-retrieval option permits only reranker=none");
            }
            if (!noret_id_.empty()) {
                throw std::invalid_argument("RetrieverPool: at most one no-retrieval option allowed");
            }
            noret_id_ = spec.id;
        }
        if (spec.base == BaseKind::bm25) need_bm25 = true;
        if (spec.base == BaseKind::dense) need_dense = true;
        // Rerankers need document embeddings regardless of the base.
        if (spec.reranker == RerankKind::regularize) need_dense = true;
        specs_[spec.id] = spec;
        ids_.push_back(spec.id);
    }
    if (need_bm25) bm25_ = std::make_unique<Bm25Index>(corpus);
    if (need_dense) dense_ = std::make_unique<DenseIndex>(corpus, *provider_);
    for (const auto& doc : corpus) doc_texts_[doc.id] = doc.text;
}

const std::string& RetrieverPool::document_text(const std::string& doc_id) const {
    auto it = doc_texts_.find(doc_id);
    if (it == doc_texts_.end()) throw std::invalid_argument("unknown doc id: " + doc_id);
    return it->second;
}

Vec RetrieverPool::document_embedding(const std::string& doc_id) const {
    if (dense_) return dense_->embedding_of(doc_id);
    return provider_->embed(doc_id, document_text(doc_id));
}

RankedList RetrieverPool::retrieve(const std::string& retriever_id, const std::string& query,
                                   int k) const {
    auto it = specs_.find(retriever_id);
    if (it == specs_.end()) throw std::invalid_argument("unknown retriever id: " + retriever_id);
    const RetrieverSpec& spec = it->second;
    if (k <= 0) throw std::invalid_argument("retrieve: k must be positive");

    RankedList list;
    list.retriever_id = retriever_id;
    if (spec.base == BaseKind::none) return list;

    auto param = [&](const char* name, double fallback) {
        auto p = spec.params.find(name);
        return p == spec.params.end() ? fallback : p->second;
    };

    if (spec.base == BaseKind::bm25) {
        Bm25Params bp{param("k1", 1.2), param("b", 0.75)};
        list = bm25_->retrieve(query, k, bp);
    } else {
        list = dense_->retrieve(provider_->embed_query(query), k);
    }
    list.retriever_id = retriever_id;
    if (list.items.empty() || spec.reranker == RerankKind::none) return list;

    Vec scores;
    scores.reserve(list.items.size());
    for (const auto& item : list.items) scores.push_back(item.score);

    if (spec.reranker == RerankKind::regularize) {
        std::vector<Vec> embs;
        embs.reserve(list.items.size());
        for (const auto& item : list.items) embs.push_back(document_embedding(item.doc_id));
        RegularizationParams rp;
        rp.top_m = static_cast<int>(param("m", 5));
        rp.diffusion_steps = static_cast<int>(param("t", 2));
        Vec regularized = regularize_scores(embs, scores, rp);
        for (std::size_t i = 0; i < list.items.size(); ++i) list.items[i].score = regularized[i];
        std::sort(list.items.begin(), list.items.end(), [](const RankedItem& a, const RankedItem& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.doc_id < b.doc_id;
        });
        return list;
    }

    // stochastic: one Plackett-Luce sampled permutation, seeded per (pool, retriever, query)
    StochasticParams sp;
    sp.alpha = param("alpha", 2.0);
    sp.n_samples = static_cast<int>(param("n_samples", 50));
    sp.seed = fnv1a64(query, fnv1a64(retriever_id, seed_));
    auto perm = plackett_luce_rerank(scores, sp);
    std::vector<RankedItem> reordered;
    reordered.reserve(perm.size());
    for (std::size_t pos = 0; pos < perm.size(); ++pos) {
        // positional scores keep the list's non-increasing invariant
        reordered.push_back({list.items[static_cast<std::size_t>(perm[pos])].doc_id,
                             static_cast<double>(perm.size() - pos)});
    }
    list.items = std::move(reordered);
    return list;
}

}  // namespace ltrr
