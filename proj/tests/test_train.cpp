// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "ltrr/train.hpp"

using namespace ltrr;

namespace {

constexpr std::size_t kDim = 10;  // 2 pre scalars + 2 embedding dims + 6 post

TrainSample make_sample(const std::string& id, const Vec& features, double delta,
                        double delta_norm, bool is_noret = false) {
    TrainSample s;
    s.retriever_id = id;
    s.features = features;
    s.is_noret = is_noret;
    s.delta = delta;
    s.delta_norm = delta_norm;
    return s;
}

Vec random_features(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec f(kDim);
    for (auto& x : f) x = u(rng);
    return f;
}

/// Groups whose delta_norm is an exact linear function of the features.
std::vector<QueryGroup> planted_linear_groups(std::mt19937_64& rng, const Vec& w, double b,
                                              int n_groups, int group_size) {
    std::vector<QueryGroup> groups;
    for (int g = 0; g < n_groups; ++g) {
        QueryGroup group;
        group.query_id = "q" + std::to_string(g);
        for (int i = 0; i < group_size; ++i) {
            Vec f = random_features(rng);
            double y = b;
            for (std::size_t d = 0; d < kDim; ++d) y += w[d] * f[d];
            group.samples.push_back(make_sample("r" + std::to_string(i), f, y, y));
        }
        groups.push_back(group);
    }
    return groups;
}

}  // namespace

TEST_CASE("pointwise ridge recovers a planted linear model") {
    std::mt19937_64 rng(3);
    Vec w(kDim);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& x : w) x = u(rng);
    auto groups = planted_linear_groups(rng, w, 0.4, 20, 5);

    TrainConfig cfg;
    cfg.loss_family = "pointwise";
    cfg.learner = "linear";
    cfg.ridge_lambda = 0.0;
    RouterModel model = train_pointwise(groups, cfg);
    for (const auto& g : groups) {
        for (const auto& s : g.samples) {
            CHECK(score_sample(model, s) == doctest::Approx(s.delta_norm).epsilon(1e-6));
        }
    }
}

TEST_CASE("singular pointwise systems demand regularization") {
    // one sample cannot pin down ten weights
    QueryGroup group;
    group.query_id = "q0";
    group.samples.push_back(make_sample("r0", Vec(kDim, 1.0), 0.5, 0.5));
    TrainConfig cfg;
    cfg.loss_family = "pointwise";
    cfg.learner = "linear";
    cfg.ridge_lambda = 0.0;
    CHECK_THROWS_WITH_AS(train_pointwise({group}, cfg), doctest::Contains("ridge_lambda"),
                         std::exception);
    cfg.ridge_lambda = 1e-3;
    CHECK_NOTHROW(train_pointwise({group}, cfg));
}

TEST_CASE("a zero-round ensemble predicts the label mean") {
    std::mt19937_64 rng(8);
    std::vector<QueryGroup> groups;
    QueryGroup g;
    g.query_id = "q0";
    g.samples.push_back(make_sample("a", random_features(rng), 0.2, 0.2));
    g.samples.push_back(make_sample("b", random_features(rng), 0.8, 0.8));
    groups.push_back(g);

    TrainConfig cfg;
    cfg.loss_family = "pointwise";
    cfg.learner = "gbrt";
    cfg.rounds = 0;
    RouterModel model = train_pointwise(groups, cfg);
    CHECK(model.ensemble.trees.empty());
    CHECK(score_sample(model, g.samples[0]) == doctest::Approx(0.5));
}

TEST_CASE("gbrt regression fits a nonlinear target") {
    std::mt19937_64 rng(15);
    std::vector<QueryGroup> groups;
    for (int n = 0; n < 60; ++n) {
        QueryGroup g;
        g.query_id = "q" + std::to_string(n);
        Vec f = random_features(rng);
        double y = f[0] > 0.0 ? 0.9 : 0.1;  // a step the linear model cannot express
        g.samples.push_back(make_sample("r0", f, y, y));
        groups.push_back(g);
    }
    TrainConfig cfg;
    cfg.loss_family = "pointwise";
    cfg.learner = "gbrt";
    cfg.rounds = 60;
    RouterModel model = train_pointwise(groups, cfg);
    double worst = 0.0;
    for (const auto& g : groups) {
        double err = std::abs(score_sample(model, g.samples[0]) - g.samples[0].delta_norm);
        worst = std::max(worst, err);
    }
    CHECK(worst < 0.05);
    // the recorded boosting losses never increase
    for (std::size_t i = 1; i < model.loss_history.size(); ++i) {
        CHECK(model.loss_history[i] <= model.loss_history[i - 1] + 1e-9);
    }
}

TEST_CASE("preference pairs enumerate strict delta orderings") {
    std::vector<UtilityRecord> row = {
        {"q", "a", 0.9, 0.7, 1.0, false},
        {"q", "b", 0.5, 0.3, 0.4, false},
        {"q", "c", 0.5, 0.3, 0.4, false},  // tied with b: no pair between them
        {"q", "none", 0.2, 0.0, 0.0, false},
    };
    auto pairs = build_pairs(row);
    // a beats b, c, none; b and c each beat none -> 5 pairs
    CHECK(pairs.size() == 5);
    int a_wins = 0;
    for (const auto& [w, l] : pairs) {
        CHECK(w != l);
        if (w == "a") ++a_wins;
        CHECK(l != "a");
    }
    CHECK(a_wins == 3);
}

TEST_CASE("pairwise linear separates separable preferences perfectly") {
    // winner samples carry +1 in feature 0, losers -1; everything else noise
    std::mt19937_64 rng(31);
    std::vector<QueryGroup> groups;
    for (int n = 0; n < 15; ++n) {
        QueryGroup g;
        g.query_id = "q" + std::to_string(n);
        Vec fw = random_features(rng), fl = random_features(rng);
        fw[0] = 1.0;
        fl[0] = -1.0;
        g.samples.push_back(make_sample("w", fw, 0.8, 1.0));
        g.samples.push_back(make_sample("l", fl, 0.1, 0.0));
        groups.push_back(g);
    }
    TrainConfig cfg;
    cfg.loss_family = "pairwise";
    cfg.learner = "linear";
    cfg.epochs = 400;
    RouterModel model = train_pairwise(groups, cfg);
    for (const auto& g : groups) {
        CHECK(score_sample(model, g.samples[0]) > score_sample(model, g.samples[1]));
    }
    for (std::size_t i = 1; i < model.loss_history.size(); ++i) {
        CHECK(model.loss_history[i] <= model.loss_history[i - 1] + 1e-9);
    }
}

TEST_CASE("pairwise gbrt also resolves separable preferences") {
    std::mt19937_64 rng(32);
    std::vector<QueryGroup> groups;
    for (int n = 0; n < 15; ++n) {
        QueryGroup g;
        g.query_id = "q" + std::to_string(n);
        Vec fw = random_features(rng), fl = random_features(rng);
        fw[0] = 1.0;
        fl[0] = -1.0;
        g.samples.push_back(make_sample("w", fw, 0.8, 1.0));
        g.samples.push_back(make_sample("l", fl, 0.1, 0.0));
        groups.push_back(g);
    }
    TrainConfig cfg;
    cfg.loss_family = "pairwise";
    cfg.learner = "gbrt";
    cfg.rounds = 40;
    RouterModel model = train_pairwise(groups, cfg);
    int correct = 0;
    for (const auto& g : groups) {
        if (score_sample(model, g.samples[0]) > score_sample(model, g.samples[1])) ++correct;
    }
    CHECK(correct == 15);
}

TEST_CASE("all-tied labels leave pairwise training nothing to fit") {
    QueryGroup g;
    g.query_id = "q0";
    std::mt19937_64 rng(5);
    g.samples.push_back(make_sample("a", random_features(rng), 0.5, 0.5));
    g.samples.push_back(make_sample("b", random_features(rng), 0.5, 0.5));
    TrainConfig cfg;
    cfg.loss_family = "pairwise";
    cfg.learner = "linear";
    CHECK_THROWS(train_pairwise({g}, cfg));
}

TEST_CASE("uniform listwise targets cost ln 7 at the uniform scorer") {
    QueryGroup g;
    g.query_id = "q0";
    std::mt19937_64 rng(12);
    for (int i = 0; i < 7; ++i) {
        g.samples.push_back(make_sample("r" + std::to_string(i), random_features(rng), 0.5, 0.5));
    }
    LinearScorer zero;
    zero.weights.assign(kDim, 0.0);
    CHECK(listwise_loss(zero, {g}) == doctest::Approx(std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("the listwise gradient matches central finite differences") {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::vector<QueryGroup> groups;
    for (int n = 0; n < 3; ++n) {
        QueryGroup g;
        g.query_id = "q" + std::to_string(n);
        for (int i = 0; i < 4; ++i) {
            bool noret = i == 3;
            g.samples.push_back(
                make_sample("r" + std::to_string(i), random_features(rng), u(rng), u(rng) + 0.5, noret));
        }
        groups.push_back(g);
    }
    LinearScorer scorer;
    scorer.weights.resize(kDim);
    for (auto& w : scorer.weights) w = u(rng);
    scorer.bias = u(rng);
    scorer.noret_vector.resize(kPostFeatureCount);
    for (auto& v : scorer.noret_vector) v = u(rng);

    LinearScorer grad = listwise_loss_gradient(scorer, groups);
    const double h = 1e-6;
    auto check_component = [&](double& slot, double analytic) {
        double keep = slot;
        slot = keep + h;
        double up = listwise_loss(scorer, groups);
        slot = keep - h;
        double down = listwise_loss(scorer, groups);
        slot = keep;
        CHECK(std::abs(analytic - (up - down) / (2 * h)) < 1e-5);
    };
    for (std::size_t d = 0; d < kDim; ++d) check_component(scorer.weights[d], grad.weights[d]);
    check_component(scorer.bias, grad.bias);
    for (std::size_t d = 0; d < scorer.noret_vector.size(); ++d) {
        check_component(scorer.noret_vector[d], grad.noret_vector[d]);
    }
}

TEST_CASE("listwise training decreases the loss monotonically") {
    std::mt19937_64 rng(50);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<QueryGroup> groups;
    for (int n = 0; n < 10; ++n) {
        QueryGroup g;
        g.query_id = "q" + std::to_string(n);
        for (int i = 0; i < 4; ++i) {
            g.samples.push_back(make_sample("r" + std::to_string(i), random_features(rng),
                                            u(rng), u(rng), i == 3));
        }
        groups.push_back(g);
    }
    TrainConfig cfg;
    cfg.loss_family = "listwise";
    cfg.learner = "linear";
    cfg.epochs = 100;
    RouterModel model = train_listwise(groups, cfg);
    REQUIRE(model.loss_history.size() == 101);
    for (std::size_t i = 1; i < model.loss_history.size(); ++i) {
        CHECK(model.loss_history[i] <= model.loss_history[i - 1] + 1e-9);
    }
    CHECK(model.loss_history.back() < model.loss_history.front());
}

TEST_CASE("ranking order ignores a constant shift of every feature target") {
    // scores are compared within a query; adding a constant to all deltas
    // must leave the induced pair set unchanged
    std::vector<UtilityRecord> row = {
        {"q", "a", 0.0, 0.5, 0.0, false},
        {"q", "b", 0.0, 0.2, 0.0, false},
        {"q", "c", 0.0, 0.9, 0.0, false},
    };
    auto pairs = build_pairs(row);
    for (auto& r : row) r.delta += 10.0;
    CHECK(build_pairs(row) == pairs);
}

TEST_CASE("models round-trip through json serialization") {
    std::mt19937_64 rng(60);
    Vec w(kDim);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& x : w) x = u(rng);
    auto groups = planted_linear_groups(rng, w, 0.1, 10, 4);

    TrainConfig cfg;
    cfg.loss_family = "pairwise";
    cfg.learner = "gbrt";
    cfg.rounds = 10;
    PcaModel pca;
    pca.mean = {0.0, 0.0};
    pca.basis = {{1.0, 0.0}, {0.0, 1.0}};
    pca.r = 2;
    PostBlock medians = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    RouterModel model =
        train_router(groups, cfg, pca, medians, {"r0", "r1", "r2", "r3", "none"}, "none", 123u);

    auto path = std::filesystem::temp_directory_path() / "ltrr_model.json";
    save_model(model, path.string());
    RouterModel back = load_model(path.string());
    CHECK(back.loss_family == "pairwise");
    CHECK(back.learner == "gbrt");
    CHECK(back.config_fingerprint == 123u);
    CHECK(back.pool_ids == model.pool_ids);
    CHECK(back.medians == model.medians);
    for (const auto& g : groups) {
        for (const auto& s : g.samples) {
            CHECK(score_sample(back, s) == doctest::Approx(score_sample(model, s)).epsilon(1e-12));
        }
    }
}

TEST_CASE("a truncated model file is rejected") {
    auto path = std::filesystem::temp_directory_path() / "ltrr_trunc.json";
    std::ofstream(path) << R"({"version": 1, "loss_family": "pair)";
    CHECK_THROWS(load_model(path.string()));
}

TEST_CASE("scoring rejects mismatched feature lengths") {
    std::mt19937_64 rng(61);
    auto groups = planted_linear_groups(rng, Vec(kDim, 0.1), 0.0, 12, 3);
    TrainConfig cfg;
    cfg.loss_family = "pointwise";
    cfg.learner = "linear";
    RouterModel model = train_pointwise(groups, cfg);
    TrainSample bad = make_sample("r0", Vec(kDim + 2, 0.0), 0.0, 0.0);
    CHECK_THROWS(score_sample(model, bad));
}

TEST_CASE("invalid training configurations are rejected") {
    TrainConfig cfg;
    cfg.loss_family = "listwise";
    cfg.learner = "gbrt";
    CHECK_THROWS(cfg.validate());
    cfg.loss_family = "hinge";
    cfg.learner = "linear";
    CHECK_THROWS(cfg.validate());
    cfg.loss_family = "listwise";
    CHECK_NOTHROW(cfg.validate());
}
