// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltrr/retrieval.hpp"
#include "ltrr/train.hpp"

namespace ltrr {

struct RunConfig {
    std::string documents_path;
    std::string queries_path;
    std::string embeddings_path;  // optional file-backed provider
    std::string out_dir;

    std::vector<RetrieverSpec> pool = default_pool_specs();
    int k = 5;
    std::string metric = "context_recall";
    std::string split_scheme = "balanced";
    double split_ratio = 0.8;
    TrainConfig train;
    int embedding_dim = 256;
    int pca_r = 32;
    std::uint64_t seed = 0;

    double alpha = 0.05;
    int bonferroni_m = 0;  // 0 = number of compared policies
    std::string baseline_selection = "train";  // train | test
    std::vector<std::string> train_free_heuristics = {"overall_sim", "avg_sim", "max_sim",
                                                      "var_sim", "moran"};

    void validate() const;
    /// Derived seed for a named pipeline stage.
    std::uint64_t stage_seed(const std::string& stage) const;
};

/// Loads a JSON run config. Unknown top-level fields are rejected by name.
RunConfig load_config(const std::string& path);

/// FNV-1a over the canonical serialized form; embedded in every artifact.
std::uint64_t config_fingerprint(const RunConfig& cfg);

/// Canonical JSON text used for fingerprinting and the run manifest.
std::string canonical_config(const RunConfig& cfg);

}  // namespace ltrr
