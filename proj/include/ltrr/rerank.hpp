// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "ltrr/common.hpp"

namespace ltrr {

struct RegularizationParams {
    int top_m = 5;           // neighbors kept per row (diagonal eligible)
    int diffusion_steps = 2; // t in s~ = P^t s
};

struct StochasticParams {
    double alpha = 2.0;  // sampling intensity
    int n_samples = 50;
    std::uint64_t seed = 0;
};

/// Score diffusion over the document-similarity graph. Builds W = D D^T from
/// the unit-norm embedding rows, keeps each row's top-m strictly positive
/// entries (diagonal included), row-normalizes to a stochastic P, and returns
/// P^t s. Rows with no positive entry fall back to a self-loop; the optional
/// warning counter reports how many rows did.
Vec regularize_scores(const std::vector<Vec>& doc_embeddings, const Vec& scores,
                      const RegularizationParams& params, int* self_loop_warnings = nullptr);

/// Plackett-Luce sampled ranking. Scores are standardized (zero mean, unit
/// variance; all-equal -> zero), weights w_i = exp(alpha * z_i), n_samples
/// full rankings drawn without replacement, one returned uniformly at random.
/// Fully determined by params.seed.
std::vector<int> plackett_luce_rerank(const Vec& scores, const StochasticParams& params);

}  // namespace ltrr
