// SPDX-License-Identifier: Apache-2.0
#include "ltrr/config.hpp"

#include "ltrr/evaluate.hpp"
#include "ltrr/labels.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace ltrr {

using ojson = nlohmann::ordered_json;

void RunConfig::validate() const {
    if (documents_path.empty()) throw std::invalid_argument("config: missing field 'documents'");
    if (queries_path.empty()) throw std::invalid_argument("config: missing field 'queries'");
    if (out_dir.empty()) throw std::invalid_argument("config: missing field 'out'");
    if (k <= 0) throw std::invalid_argument("config: field 'k' must be positive");
    if (embedding_dim < 8) throw std::invalid_argument("config: field 'embedding_dim' must be >= 8");
    if (pca_r < 1) throw std::invalid_argument("config: field 'pca_r' must be positive");
    if (pca_r > embedding_dim) {
        throw std::invalid_argument("config: field 'pca_r' exceeds embedding_dim");
    }
    if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("config: field 'alpha' out of (0,1)");
    if (bonferroni_m < 0) throw std::invalid_argument("config: field 'bonferroni_m' must be >= 0");
    if (baseline_selection != "train" && baseline_selection != "test") {
        throw std::invalid_argument("config: field 'baseline_selection' must be train or test");
    }
    utility_metric_from_string(metric);
    parse_split_scheme(split_scheme);
    for (const auto& h : train_free_heuristics) heuristic_from_string(h);
    train.validate();
    if (pool.empty()) throw std::invalid_argument("config: field 'pool' must be non-empty");
}

std::uint64_t RunConfig::stage_seed(const std::string& stage) const {
    return derive_seed(seed, stage);
}

namespace {

RetrieverSpec spec_from_json(const nlohmann::json& j) {
    RetrieverSpec spec;
    spec.id = j.at("id").get<std::string>();
    spec.base = base_kind_from_string(j.at("base").get<std::string>());
    spec.reranker = rerank_kind_from_string(j.value("reranker", std::string("none")));
    if (j.contains("params")) {
        for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it) {
            spec.params[it.key()] = it.value().get<double>();
        }
    }
    return spec;
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw std::runtime_error("config: cannot parse " + path);

    static const std::set<std::string> known = {
        "documents", "queries", "embeddings", "out", "pool", "k", "metric", "split",
        "split_ratio", "train", "embedding_dim", "pca_r", "seed", "alpha", "bonferroni_m",
        "baseline_selection", "train_free_heuristics"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) {
            throw std::invalid_argument("config: unknown field '" + it.key() + "'");
        }
    }

    RunConfig cfg;
    cfg.documents_path = j.value("documents", std::string{});
    cfg.queries_path = j.value("queries", std::string{});
    cfg.embeddings_path = j.value("embeddings", std::string{});
    cfg.out_dir = j.value("out", std::string{});
    if (j.contains("pool")) {
        cfg.pool.clear();
        for (const auto& s : j.at("pool")) cfg.pool.push_back(spec_from_json(s));
    }
    cfg.k = j.value("k", cfg.k);
    cfg.metric = j.value("metric", cfg.metric);
    cfg.split_scheme = j.value("split", cfg.split_scheme);
    cfg.split_ratio = j.value("split_ratio", cfg.split_ratio);
    if (j.contains("train")) {
        const auto& t = j.at("train");
        cfg.train.loss_family = t.value("loss_family", cfg.train.loss_family);
        cfg.train.learner = t.value("learner", cfg.train.learner);
        cfg.train.epochs = t.value("epochs", cfg.train.epochs);
        cfg.train.rounds = t.value("rounds", cfg.train.rounds);
        cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
        cfg.train.ridge_lambda = t.value("ridge_lambda", cfg.train.ridge_lambda);
        cfg.train.tree_depth = t.value("tree_depth", cfg.train.tree_depth);
    }
    cfg.embedding_dim = j.value("embedding_dim", cfg.embedding_dim);
    cfg.pca_r = j.value("pca_r", cfg.pca_r);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.bonferroni_m = j.value("bonferroni_m", cfg.bonferroni_m);
    cfg.baseline_selection = j.value("baseline_selection", cfg.baseline_selection);
    if (j.contains("train_free_heuristics")) {
        cfg.train_free_heuristics = j.at("train_free_heuristics").get<std::vector<std::string>>();
    }
    cfg.validate();
    return cfg;
}

std::string canonical_config(const RunConfig& cfg) {
    ojson j;
    j["documents"] = cfg.documents_path;
    j["queries"] = cfg.queries_path;
    j["embeddings"] = cfg.embeddings_path;
    ojson pool = ojson::array();
    for (const auto& s : cfg.pool) {
        ojson spec;
        spec["id"] = s.id;
        spec["base"] = to_string(s.base);
        spec["reranker"] = to_string(s.reranker);
        spec["params"] = s.params;
        pool.push_back(spec);
    }
    j["pool"] = pool;
    j["k"] = cfg.k;
    j["metric"] = cfg.metric;
    j["split"] = cfg.split_scheme;
    j["split_ratio"] = cfg.split_ratio;
    j["train"] = {{"loss_family", cfg.train.loss_family}, {"learner", cfg.train.learner},
                  {"epochs", cfg.train.epochs},           {"rounds", cfg.train.rounds},
                  {"learning_rate", cfg.train.learning_rate},
                  {"ridge_lambda", cfg.train.ridge_lambda},
                  {"tree_depth", cfg.train.tree_depth}};
    j["embedding_dim"] = cfg.embedding_dim;
    j["pca_r"] = cfg.pca_r;
    j["seed"] = cfg.seed;
    j["alpha"] = cfg.alpha;
    j["bonferroni_m"] = cfg.bonferroni_m;
    j["baseline_selection"] = cfg.baseline_selection;
    j["train_free_heuristics"] = cfg.train_free_heuristics;
    return j.dump();
}

std::uint64_t config_fingerprint(const RunConfig& cfg) { return fnv1a64(canonical_config(cfg)); }

}  // namespace ltrr
