// SPDX-License-Identifier: Apache-2.0
#include "ltrr/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "ltrr/evaluate.hpp"
#include "ltrr/labels.hpp"
#include "ltrr/pipeline.hpp"

namespace ltrr::pipeline {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string out_path(const RunConfig& cfg, const char* name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

void write_header(std::ostream& out, const char* artifact, std::uint64_t fingerprint) {
    ojson j;
    j["artifact"] = artifact;
    j["config_fingerprint"] = fingerprint;
    out << j.dump() << '\n';
}

std::uint64_t read_header_fingerprint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open artifact: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty artifact: " + path);
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("config_fingerprint")) {
        throw std::runtime_error("artifact missing fingerprint header: " + path);
    }
    return j.at("config_fingerprint").get<std::uint64_t>();
}

void check_fingerprint(const std::string& path, std::uint64_t expected) {
    std::uint64_t found = read_header_fingerprint(path);
    if (found != expected) {
        throw std::runtime_error("artifact " + path + " was produced under a different config (" +
                                 std::to_string(found) + " != " + std::to_string(expected) + ")");
    }
}

std::shared_ptr<const EmbeddingProvider> make_provider(const RunConfig& cfg) {
    if (!cfg.embeddings_path.empty()) {
        return std::make_shared<FileEmbeddingProvider>(cfg.embeddings_path,
                                                       cfg.stage_seed("embedding"));
    }
    return std::make_shared<HashEmbeddingProvider>(cfg.embedding_dim, cfg.stage_seed("embedding"));
}

RetrieverPool make_pool(const RunConfig& cfg, const std::vector<CorpusRecord>& corpus,
                        std::shared_ptr<const EmbeddingProvider> provider) {
    return RetrieverPool(corpus, std::move(provider), cfg.pool, cfg.stage_seed("retrieval"));
}

DatasetSplit load_split(const RunConfig& cfg) {
    auto splits = read_splits(out_path(cfg, kSplitsFile));
    if (splits.empty()) throw std::runtime_error("no splits in " + std::string(kSplitsFile));
    return splits.front();
}

struct FeatureMeta {
    PcaModel pca;
    PostBlock medians{};
    std::vector<std::string> pool_ids;
    std::string noret_id;
};

void write_feature_meta(const RunConfig& cfg, const FeatureMeta& meta, std::uint64_t fingerprint) {
    ojson j;
    j["artifact"] = "feature_meta";
    j["config_fingerprint"] = fingerprint;
    j["pca"] = {{"mean", meta.pca.mean}, {"basis", meta.pca.basis}, {"r", meta.pca.r}};
    j["medians"] = meta.medians;
    j["pool_ids"] = meta.pool_ids;
    j["noret_id"] = meta.noret_id;
    std::ofstream out(out_path(cfg, kFeatureMetaFile));
    out << j.dump(2) << '\n';
}

FeatureMeta read_feature_meta(const RunConfig& cfg, std::uint64_t fingerprint) {
    std::string path = out_path(cfg, kFeatureMetaFile);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open artifact: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("config_fingerprint").get<std::uint64_t>() != fingerprint) {
        throw std::runtime_error("artifact " + path + " was produced under a different config");
    }
    FeatureMeta meta;
    meta.pca.mean = j.at("pca").at("mean").get<Vec>();
    meta.pca.basis = j.at("pca").at("basis").get<std::vector<Vec>>();
    meta.pca.r = j.at("pca").at("r").get<int>();
    auto medians = j.at("medians").get<Vec>();
    std::copy(medians.begin(), medians.end(), meta.medians.begin());
    meta.pool_ids = j.at("pool_ids").get<std::vector<std::string>>();
    meta.noret_id = j.at("noret_id").get<std::string>();
    return meta;
}

std::string learned_policy_name(const RunConfig& cfg) {
    return cfg.train.loss_family + "-" + cfg.train.learner;
}

}  // namespace

void run_ingest(const RunConfig& cfg) {
    auto docs = ingest_documents(cfg.documents_path);
    auto queries = ingest_queries(cfg.queries_path);
    std::uint64_t fingerprint = config_fingerprint(cfg);
    ojson manifest;
    manifest["artifact"] = "manifest";
    manifest["tool_version"] = 1;
    manifest["config_fingerprint"] = fingerprint;
    manifest["config"] = nlohmann::json::parse(canonical_config(cfg));
    manifest["documents"] = docs.size();
    manifest["queries"] = queries.size();
    manifest["seed"] = cfg.seed;
    ojson stage_seeds;
    for (const char* stage : {"embedding", "retrieval", "split"}) {
        stage_seeds[stage] = cfg.stage_seed(stage);
    }
    manifest["stage_seeds"] = stage_seeds;
    std::ofstream out(out_path(cfg, kManifestFile));
    out << manifest.dump(2) << '\n';
    std::cout << "ingested " << docs.size() << " documents, " << queries.size() << " queries\n";
}

void run_index(const RunConfig& cfg) {
    auto docs = ingest_documents(cfg.documents_path);
    auto provider = make_provider(cfg);
    RetrieverPool pool = make_pool(cfg, docs, provider);
    std::cout << "pool options: " << pool.size();
    for (const auto& rid : pool.ids()) std::cout << ' ' << rid;
    std::cout << "\nindexed " << docs.size() << " documents\n";
}

void run_split(const RunConfig& cfg) {
    auto queries = ingest_queries(cfg.queries_path);
    DatasetSplit split = make_splits(queries, parse_split_scheme(cfg.split_scheme),
                                     cfg.split_ratio, cfg.stage_seed("split"));
    std::ofstream out(out_path(cfg, kSplitsFile));
    write_header(out, "splits", config_fingerprint(cfg));
    write_splits({split}, out);
    std::cout << "split " << split.name << ": " << split.train_ids.size() << " train, "
              << split.test_ids.size() << " test\n";
}

void run_label(const RunConfig& cfg) {
    auto docs = ingest_documents(cfg.documents_path);
    auto queries = ingest_queries(cfg.queries_path);
    auto provider = make_provider(cfg);
    RetrieverPool pool = make_pool(cfg, docs, provider);
    LabelMatrix matrix =
        build_label_matrix(queries, pool, cfg.k, utility_metric_from_string(cfg.metric));
    std::ofstream out(out_path(cfg, kLabelsFile));
    write_header(out, "labels", config_fingerprint(cfg));
    write_labels(matrix, out);
    std::cout << "labeled " << matrix.query_ids.size() << " queries x " << pool.size()
              << " options (" << matrix.flagged_query_ids.size() << " flagged)\n";
}

void run_features(const RunConfig& cfg) {
    auto docs = ingest_documents(cfg.documents_path);
    auto queries = ingest_queries(cfg.queries_path);
    auto provider = make_provider(cfg);
    RetrieverPool pool = make_pool(cfg, docs, provider);
    DatasetSplit split = load_split(cfg);

    std::map<std::string, const QueryRecord*> by_id;
    for (const auto& q : queries) by_id[q.id] = &q;

    // PCA is fit on training-query embeddings only, then frozen.
    std::vector<Vec> train_embs;
    for (const auto& qid : split.train_ids) {
        train_embs.push_back(provider->embed_query(by_id.at(qid)->text));
    }
    PcaModel pca = pca_fit(train_embs, cfg.pca_r);

    ExtractionConfig ext;
    ext.pca_r = cfg.pca_r;
    std::vector<FeatureVector> all_features;
    std::vector<PostFeatures> train_posts;
    std::map<std::string, bool> is_train;
    for (const auto& qid : split.train_ids) is_train[qid] = true;
    for (const auto& q : queries) {
        auto fvs = extract_features(q, pool, cfg.k, pca, ext);
        for (auto& fv : fvs) {
            if (fv.post && is_train.count(fv.query_id)) train_posts.push_back(*fv.post);
            all_features.push_back(std::move(fv));
        }
    }
    FeatureMeta meta;
    meta.pca = std::move(pca);
    meta.medians = impute_no_retrieval(train_posts).as_array();
    meta.pool_ids = pool.ids();
    meta.noret_id = pool.noret_id();

    std::uint64_t fingerprint = config_fingerprint(cfg);
    std::ofstream out(out_path(cfg, kFeaturesFile));
    write_header(out, "features", fingerprint);
    write_features(all_features, out);
    write_feature_meta(cfg, meta, fingerprint);
    std::cout << "extracted " << all_features.size() << " feature vectors\n";
}

void run_train(const RunConfig& cfg) {
    std::uint64_t fingerprint = config_fingerprint(cfg);
    check_fingerprint(out_path(cfg, kLabelsFile), fingerprint);
    check_fingerprint(out_path(cfg, kFeaturesFile), fingerprint);
    LabelMatrix labels = read_labels(out_path(cfg, kLabelsFile));
    auto features = read_features(out_path(cfg, kFeaturesFile));
    FeatureMeta meta = read_feature_meta(cfg, fingerprint);
    DatasetSplit split = load_split(cfg);

    auto groups = assemble_groups(features, labels, meta.medians, split.train_ids);
    RouterModel model = train_router(groups, cfg.train, meta.pca, meta.medians, meta.pool_ids,
                                     meta.noret_id, fingerprint);
    save_model(model, out_path(cfg, kModelFile));
    std::cout << "trained " << learned_policy_name(cfg) << " on " << groups.size()
              << " queries; final loss "
              << (model.loss_history.empty() ? 0.0 : model.loss_history.back()) << '\n';
}

void run_route(const RunConfig& cfg) {
    std::uint64_t fingerprint = config_fingerprint(cfg);
    RouterModel model = load_model(out_path(cfg, kModelFile));
    if (model.config_fingerprint != fingerprint) {
        throw std::runtime_error("model was trained under a different config");
    }
    check_fingerprint(out_path(cfg, kFeaturesFile), fingerprint);
    auto features = read_features(out_path(cfg, kFeaturesFile));
    DatasetSplit split = load_split(cfg);

    std::map<std::string, std::vector<FeatureVector>> by_query;
    for (auto& fv : features) by_query[fv.query_id].push_back(std::move(fv));

    std::ofstream out(out_path(cfg, kDecisionsFile));
    write_header(out, "decisions", fingerprint);
    for (const auto& qid : split.test_ids) {
        auto it = by_query.find(qid);
        if (it == by_query.end()) throw std::runtime_error("no features for test query " + qid);
        RoutingDecision d = route_learned(model, qid, it->second);
        ojson j;
        j["query_id"] = d.query_id;
        j["chosen"] = d.chosen_retriever_id;
        j["ranking"] = d.ranked_retriever_ids;
        out << j.dump() << '\n';
    }
    std::cout << "routed " << split.test_ids.size() << " test queries\n";
}

void run_eval(const RunConfig& cfg) {
    std::uint64_t fingerprint = config_fingerprint(cfg);
    check_fingerprint(out_path(cfg, kLabelsFile), fingerprint);
    check_fingerprint(out_path(cfg, kFeaturesFile), fingerprint);
    check_fingerprint(out_path(cfg, kDecisionsFile), fingerprint);
    RouterModel model = load_model(out_path(cfg, kModelFile));
    if (model.config_fingerprint != fingerprint) {
        throw std::runtime_error("model was trained under a different config");
    }

    LabelMatrix labels = read_labels(out_path(cfg, kLabelsFile));
    auto features = read_features(out_path(cfg, kFeaturesFile));
    DatasetSplit split = load_split(cfg);

    std::map<std::string, std::vector<FeatureVector>> by_query;
    for (auto& fv : features) by_query[fv.query_id].push_back(std::move(fv));

    std::map<std::string, std::map<std::string, PolicyEvaluation>> results;
    const std::string split_name = split.name;

    // oracle
    {
        std::vector<RoutingDecision> decisions;
        for (const auto& qid : split.test_ids) {
            if (labels.is_flagged(qid)) continue;
            decisions.push_back(route_oracle(labels.row(qid)));
        }
        results["oracle"][split_name] = evaluate_policy(decisions, labels, split.test_ids);
    }
    // best standard RAG (single fixed retriever)
    std::string baseline_id;
    {
        const auto& selection_ids =
            cfg.baseline_selection == "train" ? split.train_ids : split.test_ids;
        auto [best, mean] =
            best_standard_baseline(labels, selection_ids, split.test_ids, model.noret_id);
        baseline_id = best;
        std::vector<RoutingDecision> decisions;
        for (const auto& qid : split.test_ids) {
            if (labels.is_flagged(qid)) continue;
            decisions.push_back({qid, best, {best}});
        }
        results["best_standard"][split_name] = evaluate_policy(decisions, labels, split.test_ids);
    }
    // train-free heuristics (R_0 excluded)
    for (const auto& name : cfg.train_free_heuristics) {
        auto heuristic = heuristic_from_string(name);
        std::vector<RoutingDecision> decisions;
        for (const auto& qid : split.test_ids) {
            if (labels.is_flagged(qid)) continue;
            std::map<std::string, PostFeatures> post;
            for (const auto& fv : by_query.at(qid)) {
                if (fv.post) post[fv.retriever_id] = *fv.post;
            }
            decisions.push_back(route_train_free(heuristic, qid, post));
        }
        results[name][split_name] = evaluate_policy(decisions, labels, split.test_ids);
    }
    // learned router, from the routing artifact
    {
        std::ifstream in(out_path(cfg, kDecisionsFile));
        std::vector<RoutingDecision> decisions;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto j = nlohmann::json::parse(line);
            if (j.contains("artifact")) continue;
            RoutingDecision d;
            d.query_id = j.at("query_id").get<std::string>();
            d.chosen_retriever_id = j.at("chosen").get<std::string>();
            d.ranked_retriever_ids = j.at("ranking").get<std::vector<std::string>>();
            if (!labels.is_flagged(d.query_id)) decisions.push_back(std::move(d));
        }
        results[learned_policy_name(cfg)][split_name] =
            evaluate_policy(decisions, labels, split.test_ids);
    }

    ojson out;
    out["artifact"] = "eval";
    out["config_fingerprint"] = fingerprint;
    out["metric"] = cfg.metric;
    out["split"] = split_name;
    out["baseline"] = "best_standard";
    out["baseline_retriever"] = baseline_id;
    ojson policies = ojson::array();
    std::vector<std::string> order = {"oracle", "best_standard"};
    for (const auto& h : cfg.train_free_heuristics) order.push_back(h);
    order.push_back(learned_policy_name(cfg));
    for (const auto& name : order) {
        const auto& eval = results.at(name).at(split_name);
        ojson p;
        p["name"] = name;
        p["mean_utility"] = eval.mean_utility;
        p["per_query"] = eval.per_query_utilities;
        policies.push_back(p);
    }
    out["policies"] = policies;
    std::ofstream f(out_path(cfg, kEvalFile));
    f << out.dump(2) << '\n';
    std::cout << "evaluated " << order.size() << " policies on split " << split_name << '\n';
}

void run_report(const RunConfig& cfg) {
    std::string path = out_path(cfg, kEvalFile);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open artifact: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    std::uint64_t fingerprint = config_fingerprint(cfg);
    if (j.at("config_fingerprint").get<std::uint64_t>() != fingerprint) {
        throw std::runtime_error("eval artifact was produced under a different config");
    }
    std::string split_name = j.at("split").get<std::string>();
    std::vector<std::string> policy_names;
    std::map<std::string, std::map<std::string, PolicyEvaluation>> results;
    for (const auto& p : j.at("policies")) {
        PolicyEvaluation eval;
        eval.mean_utility = p.at("mean_utility").get<double>();
        eval.per_query_utilities = p.at("per_query").get<Vec>();
        std::string name = p.at("name").get<std::string>();
        policy_names.push_back(name);
        results[name][split_name] = std::move(eval);
    }
    EvalReport report = build_report({split_name}, policy_names, results,
                                     j.at("baseline").get<std::string>(), cfg.alpha,
                                     cfg.bonferroni_m);
    report.metric = j.at("metric").get<std::string>();
    report.config_fingerprint = fingerprint;
    std::string text = render_report_text(report);
    {
        std::ofstream out(out_path(cfg, kReportTextFile));
        out << "config_fingerprint: " << fingerprint << "\nmetric: " << report.metric << "\n\n"
            << text;
    }
    {
        std::ofstream out(out_path(cfg, kReportTsvFile));
        out << "# config_fingerprint\t" << fingerprint << '\n' << render_report_tsv(report);
    }
    std::cout << text;
}

void run_all(const RunConfig& cfg) {
    run_ingest(cfg);
    run_split(cfg);
    run_label(cfg);
    run_features(cfg);
    run_train(cfg);
    run_route(cfg);
    run_eval(cfg);
    run_report(cfg);
}

}  // namespace ltrr::pipeline
