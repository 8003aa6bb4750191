// SPDX-License-Identifier: Apache-2.0
#include "ltrr/embedding.hpp"

#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace ltrr {

Vec embed_text(const std::string& text, int dim, std::uint64_t seed) {
    if (dim < 8) throw std::invalid_argument("embed_text: dim must be >= 8");
    auto tokens = tokenize(text);
    Vec acc(static_cast<std::size_t>(dim), 0.0);
    if (tokens.empty()) return acc;  // zero-context sentinel, non-unit
    for (const auto& tok : tokens) {
        std::mt19937_64 rng(fnv1a64(tok, seed ^ 14695981039346656037ULL));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vec tv(static_cast<std::size_t>(dim));
        for (double& x : tv) x = gauss(rng);
        l2_normalize(tv);
        for (int i = 0; i < dim; ++i) acc[static_cast<std::size_t>(i)] += tv[static_cast<std::size_t>(i)];
    }
    for (double& x : acc) x /= static_cast<double>(tokens.size());
    if (!l2_normalize(acc)) std::fill(acc.begin(), acc.end(), 0.0);
    return acc;
}

HashEmbeddingProvider::HashEmbeddingProvider(int dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
    if (dim < 8) throw std::invalid_argument("embedding dim must be >= 8");
}

Vec HashEmbeddingProvider::embed(const std::string&, const std::string& text) const {
    return embed_text(text, dim_, seed_);
}

Vec HashEmbeddingProvider::embed_query(const std::string& text) const {
    return embed_text(text, dim_, seed_);
}

FileEmbeddingProvider::FileEmbeddingProvider(const std::string& path, std::uint64_t seed)
    : seed_(seed) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embeddings file: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw std::runtime_error(path + ": malformed record at line " + std::to_string(lineno));
        }
        auto id = j.at("id").get<std::string>();
        Vec v = j.at("vector").get<Vec>();
        if (dim_ == 0) dim_ = static_cast<int>(v.size());
        if (static_cast<int>(v.size()) != dim_) {
            throw std::runtime_error(path + ": inconsistent vector length at line " +
                                     std::to_string(lineno));
        }
        if (!l2_normalize(v)) {
            throw std::runtime_error(path + ": zero vector for id \"" + id + "\"");
        }
        table_.emplace(std::move(id), std::move(v));
    }
    if (dim_ < 8) throw std::runtime_error(path + ": embedding dim must be >= 8");
}

Vec FileEmbeddingProvider::embed(const std::string& id, const std::string& text) const {
    auto it = table_.find(id);
    if (it != table_.end()) return it->second;
    return embed_text(text, dim_, seed_);
}

Vec FileEmbeddingProvider::embed_query(const std::string& text) const {
    return embed_text(text, dim_, seed_);
}

}  // namespace ltrr
