// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ltrr {

using Vec = std::vector<double>;

/// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 14695981039346656037ULL);

/// Per-module seed derivation: hash of the master seed plus a module tag.
/// One master seed drives all randomness in a run.
std::uint64_t derive_seed(std::uint64_t master, std::string_view module_tag);

/// Lowercased word tokens. ASCII alphanumerics are word characters
/// (letters lowercased); bytes >= 0x80 are kept verbatim so UTF-8 text
/// splits on ASCII punctuation/whitespace only. Shared by BM25, the
/// utility metrics, and query-length extraction.
std::vector<std::string> tokenize(std::string_view text);

double dot(const Vec& a, const Vec& b);
double l2_norm(const Vec& v);

/// In-place L2 normalization. Returns false (vector untouched) for a zero vector.
bool l2_normalize(Vec& v);

/// Cosine similarity; 0 if either vector has zero norm.
double cosine(const Vec& a, const Vec& b);

}  // namespace ltrr
