// SPDX-License-Identifier: Apache-2.0
#include "ltrr/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ltrr {

Vec regularize_scores(const std::vector<Vec>& doc_embeddings, const Vec& scores,
                      const RegularizationParams& params, int* self_loop_warnings) {
    const std::size_t k = scores.size();
    if (k == 0 || doc_embeddings.size() != k) {
        throw std::invalid_argument("regularize_scores: embeddings/scores size mismatch");
    }
    if (params.top_m < 1) throw std::invalid_argument("regularize_scores: m must be >= 1");
    if (params.diffusion_steps < 0) throw std::invalid_argument("regularize_scores: t must be >= 0");
    for (double s : scores) {
        if (!std::isfinite(s)) throw std::invalid_argument("regularize_scores: non-finite score");
    }

    // Row-stochastic P from W = D D^T, keeping top-m positive entries per row.
    std::vector<Vec> P(k, Vec(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        Vec sims(k);
        for (std::size_t j = 0; j < k; ++j) sims[j] = dot(doc_embeddings[i], doc_embeddings[j]);
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });
        double row_sum = 0.0;
        int kept = 0;
        for (std::size_t j : order) {
            if (kept >= params.top_m || sims[j] <= 0.0) break;
            P[i][j] = sims[j];
            row_sum += sims[j];
            ++kept;
        }
        if (kept == 0 || row_sum <= 0.0) {
            std::fill(P[i].begin(), P[i].end(), 0.0);
            P[i][i] = 1.0;
            if (self_loop_warnings) ++*self_loop_warnings;
        } else {
            for (double& w : P[i]) w /= row_sum;
        }
    }

    Vec out = scores;
    for (int step = 0; step < params.diffusion_steps; ++step) {
        Vec next(k, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) next[i] += P[i][j] * out[j];
        }
        out = std::move(next);
    }
    return out;
}

std::vector<int> plackett_luce_rerank(const Vec& scores, const StochasticParams& params) {
    const std::size_t k = scores.size();
    if (k == 0) throw std::invalid_argument("plackett_luce_rerank: empty scores");
    if (params.alpha <= 0.0) throw std::invalid_argument("plackett_luce_rerank: alpha must be > 0");
    if (params.n_samples < 1) throw std::invalid_argument("plackett_luce_rerank: n_samples must be >= 1");
    for (double s : scores) {
        if (!std::isfinite(s)) throw std::invalid_argument("plackett_luce_rerank: non-finite score");
    }

    double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(k);
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    var /= static_cast<double>(k);
    double sd = std::sqrt(var);

    Vec logits(k, 0.0);
    if (sd > 0.0) {
        for (std::size_t i = 0; i < k; ++i) logits[i] = params.alpha * (scores[i] - mean) / sd;
    }
    double max_logit = *std::max_element(logits.begin(), logits.end());
    Vec weights(k);
    for (std::size_t i = 0; i < k; ++i) weights[i] = std::exp(logits[i] - max_logit);

    std::mt19937_64 rng(params.seed);
    std::vector<std::vector<int>> samples;
    samples.reserve(static_cast<std::size_t>(params.n_samples));
    for (int s = 0; s < params.n_samples; ++s) {
        Vec w = weights;
        std::vector<int> perm;
        perm.reserve(k);
        std::vector<bool> used(k, false);
        for (std::size_t pos = 0; pos < k; ++pos) {
            double total = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                if (!used[i]) total += w[i];
            }
            std::uniform_real_distribution<double> uni(0.0, total);
            double r = uni(rng);
            int chosen = -1;
            for (std::size_t i = 0; i < k; ++i) {
                if (used[i]) continue;
                if (r < w[i]) {
                    chosen = static_cast<int>(i);
                    break;
                }
                r -= w[i];
            }
            if (chosen == -1) {  // floating-point edge: take the last unused item
                for (std::size_t i = 0; i < k; ++i) {
                    if (!used[i]) chosen = static_cast<int>(i);
                }
            }
            used[static_cast<std::size_t>(chosen)] = true;
            perm.push_back(chosen);
        }
        samples.push_back(std::move(perm));
    }
    std::uniform_int_distribution<int> pick(0, params.n_samples - 1);
    return samples[static_cast<std::size_t>(pick(rng))];
}

}  // namespace ltrr
