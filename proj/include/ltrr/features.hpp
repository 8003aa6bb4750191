// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ltrr/common.hpp"
#include "ltrr/corpus.hpp"
#include "ltrr/retrieval.hpp"

namespace ltrr {

constexpr int kPostFeatureCount = 6;
using PostBlock = std::array<double, kPostFeatureCount>;

struct PreFeatures {
    Vec query_embedding;  // PCA-reduced, length r
    int query_length = 0;
    int query_type_flag = 0;  // 0 = keyword, 1 = natural-language
};

struct PostFeatures {
    double overall_sim = 0.0;
    double avg_sim = 0.0;
    double max_sim = 0.0;
    double var_sim = 0.0;
    double moran = 0.0;
    double cross_ret_sim = 0.0;

    PostBlock as_array() const { return {overall_sim, avg_sim, max_sim, var_sim, moran, cross_ret_sim}; }
    static PostFeatures from_array(const PostBlock& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5]};
    }
};

struct PcaModel {
    Vec mean;
    std::vector<Vec> basis;  // r orthonormal rows of length dim
    int r = 0;
};

struct FeatureVector {
    std::string query_id;
    std::string retriever_id;
    PreFeatures pre;
    std::optional<PostFeatures> post;  // nullopt for R_0 pre-imputation
};

/// Top-r principal directions of the centered data. Requires at least r samples.
PcaModel pca_fit(const std::vector<Vec>& vectors, int r);
Vec pca_project(const PcaModel& model, const Vec& v);

/// Heuristic keyword vs natural-language rule; callers may substitute a
/// different classifier through ExtractionConfig.
enum class QueryKind { keyword, natural_language };
QueryKind classify_query_type(const std::string& text);

/// overall = cosine(q, normalize(mean of docs)); avg/max/var over per-doc
/// cosines; var is the population variance. Inputs must be unit-norm.
std::array<double, 4> post_retrieval_sims(const Vec& query_emb, const std::vector<Vec>& doc_embs);

/// Moran's I over the query-doc cosine series with weights
/// w_ij = max(0, cosine(d_i, d_j)), w_ii = 0. Returns 0 for zero variance
/// or all-zero weights. Requires k >= 2.
double moran_coefficient(const Vec& query_doc_sims, const std::vector<Vec>& doc_embs);

/// Mean cosine between aggregate i and the other aggregates. Requires M >= 2.
double cross_ret_sim(const std::vector<Vec>& agg_embs, std::size_t i);

/// Per-field median over training post features (even count: mean of middles).
PostFeatures impute_no_retrieval(const std::vector<PostFeatures>& train_post_features);

struct ExtractionConfig {
    int pca_r = 32;
    using TypeClassifier = QueryKind (*)(const std::string&);
    TypeClassifier classifier = &classify_query_type;
};

/// Full per-query extraction over a retriever pool: one FeatureVector per
/// pool option, post features absent for the no-retrieval option and for
/// retrievers that returned nothing.
std::vector<FeatureVector> extract_features(const QueryRecord& query, const RetrieverPool& pool,
                                            int k, const PcaModel& pca,
                                            const ExtractionConfig& cfg = {});

/// Flattened layout: [embedding r | query_length | type_flag | post 6].
Vec flatten_features(const FeatureVector& fv, const PostBlock& noret_fill);
std::size_t feature_length(const PcaModel& pca);

void write_features(const std::vector<FeatureVector>& features, const std::string& path);
void write_features(const std::vector<FeatureVector>& features, std::ostream& out);
std::vector<FeatureVector> read_features(const std::string& path);

}  // namespace ltrr
