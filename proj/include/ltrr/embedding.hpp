// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>

#include "ltrr/common.hpp"

namespace ltrr {

constexpr std::uint64_t kDefaultEmbeddingSeed = 0x5eedULL;

/// Deterministic hash-projection embedding: each token maps through a seeded
/// hash to a pseudo-random unit vector; the output is the L2-normalized mean
/// of the token vectors. Empty text yields the all-zero sentinel (non-unit).
Vec embed_text(const std::string& text, int dim, std::uint64_t seed = kDefaultEmbeddingSeed);

/// Source of record embeddings for retrieval and feature extraction.
/// Implementations must be deterministic and unit-norm (except the zero sentinel).
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual int dim() const = 0;
    /// Embed a record. Hash providers use the text; file providers use the id.
    virtual Vec embed(const std::string& id, const std::string& text) const = 0;
    /// Embed free text (queries).
    virtual Vec embed_query(const std::string& text) const = 0;
};

class HashEmbeddingProvider final : public EmbeddingProvider {
public:
    HashEmbeddingProvider(int dim, std::uint64_t seed = kDefaultEmbeddingSeed);
    int dim() const override { return dim_; }
    Vec embed(const std::string& id, const std::string& text) const override;
    Vec embed_query(const std::string& text) const override;

private:
    int dim_;
    std::uint64_t seed_;
};

/// Loads precomputed vectors keyed by record id from a line-delimited file
/// with fields `id`, `vector`. Queries fall back to the hash embedder so the
/// provider stays total over unseen text.
class FileEmbeddingProvider final : public EmbeddingProvider {
public:
    FileEmbeddingProvider(const std::string& path, std::uint64_t seed = kDefaultEmbeddingSeed);
    int dim() const override { return dim_; }
    Vec embed(const std::string& id, const std::string& text) const override;
    Vec embed_query(const std::string& text) const override;

private:
    int dim_ = 0;
    std::uint64_t seed_;
    std::unordered_map<std::string, Vec> table_;
};

}  // namespace ltrr
