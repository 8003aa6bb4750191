// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <optional>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "ltrr/pipeline.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> algo;
    std::optional<std::string> metric;
    std::optional<std::string> split;
    std::optional<int> k;
    std::optional<std::string> out;
};

ltrr::RunConfig effective_config(const Overrides& ov) {
    ltrr::RunConfig cfg = ltrr::load_config(ov.config_path);
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.metric) cfg.metric = *ov.metric;
    if (ov.split) cfg.split_scheme = *ov.split;
    if (ov.k) cfg.k = *ov.k;
    if (ov.out) cfg.out_dir = *ov.out;
    if (const char* env_out = std::getenv("LTRR_OUT_DIR")) {
        if (!ov.out) cfg.out_dir = env_out;
    }
    if (ov.algo) {
        static const std::set<std::string> supported = {"pointwise-linear", "pointwise-gbrt",
                                                        "pairwise-linear", "pairwise-gbrt",
                                                        "listwise-linear"};
        if (!supported.count(*ov.algo)) {
            std::string msg = "unsupported algorithm '" + *ov.algo + "'; supported:";
            for (const auto& s : supported) msg += ' ' + s;
            throw std::invalid_argument(msg);
        }
        auto dash = ov.algo->find('-');
        cfg.train.loss_family = ov.algo->substr(0, dash);
        cfg.train.learner = ov.algo->substr(dash + 1);
    }
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LTRR: retriever routing experiments driven by a single run config"};
    app.require_subcommand(1);

    Overrides ov;
    std::string seed_str, algo, metric, split, out;
    int k = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", ov.config_path, "run config file")->required();
        sub->add_option("--seed", seed_str, "master seed (overrides config)");
        sub->add_option("--metric", metric, "utility metric (overrides config)");
        sub->add_option("--split", split, "split scheme (overrides config)");
        sub->add_option("--k", k, "passages per query (overrides config)");
        sub->add_option("--out", out, "output directory (overrides config)");
        return sub;
    };

    auto* ingest = add_common(app.add_subcommand("ingest", "validate inputs, write the manifest"));
    auto* index = add_common(app.add_subcommand("index", "build retrieval indexes, print stats"));
    auto* split_cmd = add_common(app.add_subcommand("split", "write the dataset split"));
    auto* label = add_common(app.add_subcommand("label", "compute the utility label matrix"));
    auto* features = add_common(app.add_subcommand("features", "extract routing features"));
    auto* train = add_common(app.add_subcommand("train", "train the routing model"));
    train->add_option("--algo", algo, "loss-learner pair, e.g. pairwise-gbrt");
    auto* route = add_common(app.add_subcommand("route", "route test queries with the model"));
    auto* eval = add_common(app.add_subcommand("eval", "evaluate all routing policies"));
    auto* report = add_common(app.add_subcommand("report", "render the evaluation report"));
    auto* pipeline_cmd = add_common(app.add_subcommand("pipeline", "run the full sequence"));
    pipeline_cmd->add_option("--algo", algo, "loss-learner pair, e.g. pairwise-gbrt");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!seed_str.empty()) ov.seed = std::stoull(seed_str);
        if (!algo.empty()) ov.algo = algo;
        if (!metric.empty()) ov.metric = metric;
        if (!split.empty()) ov.split = split;
        if (k > 0) ov.k = k;
        if (!out.empty()) ov.out = out;
        ltrr::RunConfig cfg = effective_config(ov);

        using namespace ltrr::pipeline;
        if (ingest->parsed()) run_ingest(cfg);
        else if (index->parsed()) run_index(cfg);
        else if (split_cmd->parsed()) run_split(cfg);
        else if (label->parsed()) run_label(cfg);
        else if (features->parsed()) run_features(cfg);
        else if (train->parsed()) run_train(cfg);
        else if (route->parsed()) run_route(cfg);
        else if (eval->parsed()) run_eval(cfg);
        else if (report->parsed()) run_report(cfg);
        else if (pipeline_cmd->parsed()) run_all(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
