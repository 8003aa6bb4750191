// SPDX-License-Identifier: Apache-2.0
#include "ltrr/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

namespace ltrr {

PcaModel pca_fit(const std::vector<Vec>& vectors, int r) {
    if (r < 1) throw std::invalid_argument("pca_fit: r must be positive");
    const auto n = static_cast<Eigen::Index>(vectors.size());
    if (n < r) throw std::invalid_argument("pca_fit: fewer samples than r");
    const auto dim = static_cast<Eigen::Index>(vectors.front().size());
    if (dim < r) throw std::invalid_argument("pca_fit: r exceeds input dimension");

    Eigen::MatrixXd X(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(vectors[static_cast<std::size_t>(i)].size()) != dim) {
            throw std::invalid_argument("pca_fit: inconsistent vector lengths");
        }
        for (Eigen::Index j = 0; j < dim; ++j) {
            X(i, j) = vectors[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    Eigen::RowVectorXd mean = X.colwise().mean();
    X.rowwise() -= mean;
    Eigen::MatrixXd cov = (X.transpose() * X) / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw std::runtime_error("pca_fit: eigen solve failed");

    PcaModel model;
    model.r = r;
    model.mean.assign(mean.data(), mean.data() + dim);
    // Eigenvalues ascend; take the top r, sign-fixed for determinism.
    for (int c = 0; c < r; ++c) {
        Eigen::VectorXd v = solver.eigenvectors().col(dim - 1 - c);
        Eigen::Index max_idx;
        v.cwiseAbs().maxCoeff(&max_idx);
        if (v(max_idx) < 0.0) v = -v;
        model.basis.emplace_back(v.data(), v.data() + dim);
    }
    return model;
}

Vec pca_project(const PcaModel& model, const Vec& v) {
    if (v.size() != model.mean.size()) throw std::invalid_argument("pca_project: length mismatch");
    Vec centered(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) centered[i] = v[i] - model.mean[i];
    Vec out(model.basis.size());
    for (std::size_t c = 0; c < model.basis.size(); ++c) out[c] = dot(model.basis[c], centered);
    return out;
}

QueryKind classify_query_type(const std::string& text) {
    static const std::set<std::string> interrogatives = {
        "what", "who", "when", "where", "why", "how", "which", "is", "are", "do", "does", "can"};
    static const std::set<std::string> function_words = {"the", "a", "of", "in", "to"};
    auto tokens = tokenize(text);
    if (tokens.empty()) return QueryKind::keyword;
    if (interrogatives.count(tokens.front())) return QueryKind::natural_language;
    for (auto it = text.rbegin(); it != text.rend(); ++it) {
        if (std::isspace(static_cast<unsigned char>(*it))) continue;
        if (*it == '?') return QueryKind::natural_language;
        break;
    }
    for (const auto& t : tokens) {
        if (function_words.count(t)) return QueryKind::natural_language;
    }
    return QueryKind::keyword;
}

std::array<double, 4> post_retrieval_sims(const Vec& query_emb, const std::vector<Vec>& doc_embs) {
    if (doc_embs.empty()) throw std::invalid_argument("post_retrieval_sims: no documents");
    auto check_unit = [](const Vec& v) {
        if (std::abs(l2_norm(v) - 1.0) > 1e-6) {
            throw std::invalid_argument("post_retrieval_sims: input not unit-norm");
        }
    };
    check_unit(query_emb);
    Vec mean(query_emb.size(), 0.0);
    Vec sims;
    sims.reserve(doc_embs.size());
    for (const auto& d : doc_embs) {
        check_unit(d);
        sims.push_back(dot(query_emb, d));
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += d[i];
    }
    double overall = l2_normalize(mean) ? dot(query_emb, mean) : 0.0;
    double avg = 0.0, mx = -1.0;
    for (double s : sims) {
        avg += s;
        mx = std::max(mx, s);
    }
    avg /= static_cast<double>(sims.size());
    double var = 0.0;
    for (double s : sims) var += (s - avg) * (s - avg);
    var /= static_cast<double>(sims.size());
    return {overall, avg, mx, var};
}

double moran_coefficient(const Vec& query_doc_sims, const std::vector<Vec>& doc_embs) {
    const std::size_t k = query_doc_sims.size();
    if (k < 2 || doc_embs.size() != k) {
        throw std::invalid_argument("moran_coefficient: needs k >= 2 matching series");
    }
    double mean = 0.0;
    for (double x : query_doc_sims) mean += x;
    mean /= static_cast<double>(k);
    double denom = 0.0;
    for (double x : query_doc_sims) denom += (x - mean) * (x - mean);
    if (denom == 0.0) return 0.0;

    double w_sum = 0.0, cross = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            double w = std::max(0.0, cosine(doc_embs[i], doc_embs[j]));
            w_sum += w;
            cross += w * (query_doc_sims[i] - mean) * (query_doc_sims[j] - mean);
        }
    }
    if (w_sum == 0.0) return 0.0;
    return (static_cast<double>(k) / w_sum) * cross / denom;
}

double cross_ret_sim(const std::vector<Vec>& agg_embs, std::size_t i) {
    const std::size_t m = agg_embs.size();
    if (m < 2) throw std::invalid_argument("cross_ret_sim: needs at least 2 retrievers");
    if (i >= m) throw std::invalid_argument("cross_ret_sim: index out of range");
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        if (j != i) sum += cosine(agg_embs[i], agg_embs[j]);
    }
    return sum / static_cast<double>(m - 1);
}

PostFeatures impute_no_retrieval(const std::vector<PostFeatures>& train_post_features) {
    if (train_post_features.empty()) {
        throw std::invalid_argument("impute_no_retrieval: empty training collection");
    }
    PostBlock medians{};
    for (int f = 0; f < kPostFeatureCount; ++f) {
        Vec vals;
        vals.reserve(train_post_features.size());
        for (const auto& pf : train_post_features) vals.push_back(pf.as_array()[static_cast<std::size_t>(f)]);
        std::sort(vals.begin(), vals.end());
        std::size_t n = vals.size();
        medians[static_cast<std::size_t>(f)] =
            (n % 2 == 1) ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
    }
    return PostFeatures::from_array(medians);
}

std::vector<FeatureVector> extract_features(const QueryRecord& query, const RetrieverPool& pool,
                                            int k, const PcaModel& pca,
                                            const ExtractionConfig& cfg) {
    Vec query_emb = pool.provider().embed_query(query.text);
    bool query_unit = l2_norm(query_emb) > 0.0;

    PreFeatures pre;
    pre.query_embedding = pca_project(pca, query_emb);
    pre.query_length = static_cast<int>(tokenize(query.text).size());
    pre.query_type_flag = cfg.classifier(query.text) == QueryKind::natural_language ? 1 : 0;

    struct Retrieved {
        std::string retriever_id;
        std::vector<Vec> doc_embs;
        Vec agg;  // unit-norm mean of doc embeddings
    };
    std::vector<Retrieved> with_docs;
    std::vector<std::string> without_docs;
    for (const auto& rid : pool.ids()) {
        RankedList list = pool.retrieve(rid, query.text, k);
        if (list.items.empty()) {
            without_docs.push_back(rid);
            continue;
        }
        Retrieved r;
        r.retriever_id = rid;
        r.agg.assign(query_emb.size(), 0.0);
        for (const auto& item : list.items) {
            Vec emb = pool.document_embedding(item.doc_id);
            for (std::size_t i = 0; i < r.agg.size(); ++i) r.agg[i] += emb[i];
            r.doc_embs.push_back(std::move(emb));
        }
        l2_normalize(r.agg);
        with_docs.push_back(std::move(r));
    }

    std::vector<Vec> aggregates;
    aggregates.reserve(with_docs.size());
    for (const auto& r : with_docs) aggregates.push_back(r.agg);

    std::vector<FeatureVector> out;
    for (std::size_t idx = 0; idx < with_docs.size(); ++idx) {
        const auto& r = with_docs[idx];
        FeatureVector fv;
        fv.query_id = query.id;
        fv.retriever_id = r.retriever_id;
        fv.pre = pre;
        PostFeatures pf;
        if (query_unit) {
            auto sims = post_retrieval_sims(query_emb, r.doc_embs);
            pf.overall_sim = sims[0];
            pf.avg_sim = sims[1];
            pf.max_sim = sims[2];
            pf.var_sim = sims[3];
            if (r.doc_embs.size() >= 2) {
                Vec qd_sims;
                for (const auto& d : r.doc_embs) qd_sims.push_back(dot(query_emb, d));
                pf.moran = moran_coefficient(qd_sims, r.doc_embs);
            }
        }
        if (aggregates.size() >= 2) pf.cross_ret_sim = cross_ret_sim(aggregates, idx);
        // Contract checks on every extraction.
        for (double s : {pf.overall_sim, pf.avg_sim, pf.max_sim, pf.cross_ret_sim}) {
            if (s < -1.0 - 1e-9 || s > 1.0 + 1e-9) {
                throw std::logic_error("feature out of [-1,1] range");
            }
        }
        if (pf.var_sim < 0.0) throw std::logic_error("negative similarity variance");
        fv.post = pf;
        out.push_back(std::move(fv));
    }
    for (const auto& rid : without_docs) {
        FeatureVector fv;
        fv.query_id = query.id;
        fv.retriever_id = rid;
        fv.pre = pre;
        out.push_back(std::move(fv));
    }
    return out;
}

std::size_t feature_length(const PcaModel& pca) {
    return static_cast<std::size_t>(pca.r) + 2 + kPostFeatureCount;
}

Vec flatten_features(const FeatureVector& fv, const PostBlock& noret_fill) {
    Vec out = fv.pre.query_embedding;
    out.push_back(static_cast<double>(fv.pre.query_length));
    out.push_back(static_cast<double>(fv.pre.query_type_flag));
    PostBlock block = fv.post ? fv.post->as_array() : noret_fill;
    out.insert(out.end(), block.begin(), block.end());
    return out;
}

void write_features(const std::vector<FeatureVector>& features, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    write_features(features, out);
}

void write_features(const std::vector<FeatureVector>& features, std::ostream& out) {
    for (const auto& fv : features) {
        nlohmann::ordered_json j;
        j["query_id"] = fv.query_id;
        j["retriever_id"] = fv.retriever_id;
        nlohmann::ordered_json pre = nlohmann::ordered_json::array();
        for (double x : fv.pre.query_embedding) pre.push_back(x);
        pre.push_back(fv.pre.query_length);
        pre.push_back(fv.pre.query_type_flag);
        j["pre"] = pre;
        if (fv.post) j["post"] = fv.post->as_array();
        else j["post"] = nullptr;
        out << j.dump() << '\n';
    }
}

std::vector<FeatureVector> read_features(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<FeatureVector> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        if (j.contains("artifact")) continue;  // pipeline header record
        FeatureVector fv;
        fv.query_id = j.at("query_id").get<std::string>();
        fv.retriever_id = j.at("retriever_id").get<std::string>();
        Vec pre = j.at("pre").get<Vec>();
        if (pre.size() < 2) throw std::runtime_error(path + ": malformed pre block");
        fv.pre.query_type_flag = static_cast<int>(pre.back());
        pre.pop_back();
        fv.pre.query_length = static_cast<int>(pre.back());
        pre.pop_back();
        fv.pre.query_embedding = std::move(pre);
        if (!j.at("post").is_null()) {
            PostBlock block{};
            auto arr = j.at("post").get<Vec>();
            if (arr.size() != block.size()) throw std::runtime_error(path + ": malformed post block");
            std::copy(arr.begin(), arr.end(), block.begin());
            fv.post = PostFeatures::from_array(block);
        }
        out.push_back(std::move(fv));
    }
    return out;
}

}  // namespace ltrr
