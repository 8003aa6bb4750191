// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ltrr/rerank.hpp"

using namespace ltrr;

namespace {

std::vector<Vec> orthonormal_docs(std::size_t k) {
    std::vector<Vec> docs(k, Vec(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) docs[i][i] = 1.0;
    return docs;
}

bool is_permutation_of_n(const std::vector<int>& perm, std::size_t n) {
    if (perm.size() != n) return false;
    std::vector<int> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i) {
        if (sorted[i] != static_cast<int>(i)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("zero diffusion steps leave scores untouched") {
    auto docs = orthonormal_docs(4);
    Vec scores = {0.9, 0.1, 0.5, 0.3};
    auto out = regularize_scores(docs, scores, {.top_m = 2, .diffusion_steps = 0});
    for (std::size_t i = 0; i < scores.size(); ++i) {
        CHECK(out[i] == doctest::Approx(scores[i]).epsilon(1e-12));
    }
}

TEST_CASE("top-1 neighborhoods collapse to self-loops") {
    // m = 1 keeps only the strongest positive entry per row, which is the
    // diagonal (self-similarity 1); P becomes the identity.
    std::vector<Vec> docs = {{1.0, 0.0}, {0.8, 0.6}, {0.0, 1.0}};
    Vec scores = {0.7, 0.2, 0.4};
    auto out = regularize_scores(docs, scores, {.top_m = 1, .diffusion_steps = 3});
    for (std::size_t i = 0; i < scores.size(); ++i) {
        CHECK(out[i] == doctest::Approx(scores[i]).epsilon(1e-12));
    }
}

TEST_CASE("three-document diffusion matches the hand-computed matrix") {
    // d1 = d2, d3 orthogonal; scores (1, 0, 0.5), m = 2, t = 1.
    // Rows 1,2 average the twins to 0.5; row 3 has no positive neighbor
    // besides itself and keeps 0.5 through the self-loop fallback.
    std::vector<Vec> docs = {{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    Vec scores = {1.0, 0.0, 0.5};
    int warnings = 0;
    auto out = regularize_scores(docs, scores, {.top_m = 2, .diffusion_steps = 1}, &warnings);
    CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(out[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(out[2] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("rows without positive similarities fall back to self-loops") {
    std::vector<Vec> docs = {{1.0, 0.0}, {-1.0, 0.0}};
    Vec scores = {0.8, 0.3};
    int warnings = 0;
    auto out = regularize_scores(docs, scores, {.top_m = 2, .diffusion_steps = 2}, &warnings);
    CHECK(warnings == 0);  // the diagonal keeps every row positive here
    CHECK(out[0] == doctest::Approx(0.8));
    CHECK(out[1] == doctest::Approx(0.3));
}

TEST_CASE("plackett-luce returns a permutation and handles singletons") {
    CHECK(plackett_luce_rerank({0.3}, {.alpha = 2.0, .n_samples = 50, .seed = 1}) ==
          std::vector<int>{0});
    Vec scores = {0.1, 0.9, 0.5, 0.5, 0.2};
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto perm = plackett_luce_rerank(scores, {.alpha = 2.0, .n_samples = 50, .seed = seed});
        CHECK(is_permutation_of_n(perm, scores.size()));
    }
}

TEST_CASE("plackett-luce is deterministic in the seed") {
    Vec scores = {2.0, 1.0, 0.0, 3.0};
    auto a = plackett_luce_rerank(scores, {.alpha = 2.0, .n_samples = 50, .seed = 77});
    auto b = plackett_luce_rerank(scores, {.alpha = 2.0, .n_samples = 50, .seed = 77});
    CHECK(a == b);
}

TEST_CASE("first-position frequency matches the analytic probability") {
    // scores (2,1,0), alpha 2: standardized z = (1,0,-1)/sqrt(2/3),
    // p(first = 0) = w0 / (w0 + w1 + w2) = 0.91425...
    Vec scores = {2.0, 1.0, 0.0};
    int hits = 0;
    const int trials = 20000;
    for (int seed = 0; seed < trials; ++seed) {
        auto perm = plackett_luce_rerank(
            scores, {.alpha = 2.0, .n_samples = 50, .seed = static_cast<std::uint64_t>(seed)});
        if (perm[0] == 0) ++hits;
    }
    double freq = static_cast<double>(hits) / trials;
    CHECK(freq == doctest::Approx(0.9142507608965984).epsilon(0.011));
}

TEST_CASE("extreme alpha degenerates to a deterministic sort") {
    Vec scores = {0.4, 0.9, 0.1, 0.6};
    std::vector<int> by_score = {1, 3, 0, 2};
    int sorted = 0;
    const int trials = 10000;
    for (int seed = 0; seed < trials; ++seed) {
        auto perm = plackett_luce_rerank(
            scores, {.alpha = 100.0, .n_samples = 50, .seed = static_cast<std::uint64_t>(seed)});
        if (perm == by_score) ++sorted;
    }
    CHECK(static_cast<double>(sorted) / trials >= 0.999);
}

TEST_CASE("all-equal scores sample uniformly enough to cover positions") {
    Vec scores = {0.5, 0.5, 0.5};
    std::vector<int> first_counts(3, 0);
    for (int seed = 0; seed < 3000; ++seed) {
        auto perm = plackett_luce_rerank(
            scores, {.alpha = 2.0, .n_samples = 50, .seed = static_cast<std::uint64_t>(seed)});
        ++first_counts[static_cast<std::size_t>(perm[0])];
    }
    for (int c : first_counts) CHECK(c > 800);  // each ~1000 expected
}
