// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ltrr/common.hpp"
#include "ltrr/features.hpp"
#include "ltrr/labels.hpp"

namespace ltrr {

struct LinearScorer {
    Vec weights;
    double bias = 0.0;
    Vec noret_vector;  // learnable post block for R_0; empty when unused
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    double predict(const Vec& x) const;
};

struct TreeEnsembleScorer {
    std::vector<RegressionTree> trees;
    double base_score = 0.0;
    double predict(const Vec& x) const;
};

struct TrainConfig {
    std::string loss_family = "pairwise";  // pointwise | pairwise | listwise
    std::string learner = "gbrt";          // linear | gbrt
    int epochs = 300;
    int rounds = 100;
    double learning_rate = 0.1;
    double ridge_lambda = 1e-3;
    int tree_depth = 3;
    std::uint64_t seed = 0;

    void validate() const;
};

struct RouterModel {
    int version = 1;
    std::string loss_family;
    std::string learner;
    LinearScorer linear;
    TreeEnsembleScorer ensemble;
    PcaModel pca;
    PostBlock medians{};
    std::vector<std::string> pool_ids;
    std::string noret_id;
    std::uint64_t config_fingerprint = 0;
    Vec loss_history;  // per epoch/round; not serialized

    bool is_linear() const { return learner == "linear"; }
};

/// One training sample: a flattened feature vector for (query, retriever).
/// R_0 samples carry the median-imputed post block and is_noret = true so
/// gradient-trained linear scorers can substitute the learnable vector.
struct TrainSample {
    std::string retriever_id;
    Vec features;
    bool is_noret = false;
    double delta = 0.0;
    double delta_norm = 0.0;
};

struct QueryGroup {
    std::string query_id;
    std::vector<TrainSample> samples;
};

/// Joins features with a label matrix into per-query groups, skipping flagged
/// queries and restricting to the given query ids (empty = all).
std::vector<QueryGroup> assemble_groups(const std::vector<FeatureVector>& features,
                                        const LabelMatrix& labels, const PostBlock& medians,
                                        const std::vector<std::string>& query_ids = {});

/// Ordered preference pairs of a label row: one per (winner, loser) with
/// delta_winner > delta_loser. Ties emit no pair; R_0 participates at delta 0.
std::vector<std::pair<std::string, std::string>> build_pairs(const std::vector<UtilityRecord>& label_row);

/// ListNet top-1 cross-entropy of a linear scorer over query groups.
double listwise_loss(const LinearScorer& scorer, const std::vector<QueryGroup>& groups);
/// Analytic gradient of listwise_loss, packed into a LinearScorer whose
/// weights/bias/noret_vector hold the corresponding partial derivatives.
LinearScorer listwise_loss_gradient(const LinearScorer& scorer,
                                    const std::vector<QueryGroup>& groups);

RouterModel train_pointwise(const std::vector<QueryGroup>& groups, const TrainConfig& cfg);
RouterModel train_pairwise(const std::vector<QueryGroup>& groups, const TrainConfig& cfg);
RouterModel train_listwise(const std::vector<QueryGroup>& groups, const TrainConfig& cfg);

/// Dispatch on cfg.loss_family; fills in the model's feature metadata.
RouterModel train_router(const std::vector<QueryGroup>& groups, const TrainConfig& cfg,
                         const PcaModel& pca, const PostBlock& medians,
                         const std::vector<std::string>& pool_ids, const std::string& noret_id,
                         std::uint64_t config_fingerprint);

/// Score a sample with the model's own R_0 imputation applied.
double score_sample(const RouterModel& model, const TrainSample& sample);

/// Scores per-retriever feature vectors (R_0 imputed by the model).
Vec score_retrievers(const RouterModel& model, const std::vector<FeatureVector>& features);

void save_model(const RouterModel& model, const std::string& path);
RouterModel load_model(const std::string& path);

}  // namespace ltrr
