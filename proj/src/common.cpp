// SPDX-License-Identifier: Apache-2.0
#include "ltrr/common.hpp"

#include <cctype>
#include <cmath>

namespace ltrr {

std::uint64_t fnv1a64(std::string_view s, std::uint64_t h) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view module_tag) {
    std::uint64_t h = fnv1a64(module_tag);
    for (int i = 0; i < 8; ++i) {
        h ^= static_cast<unsigned char>(master >> (8 * i));
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        bool word = std::isalnum(c) || c >= 0x80;
        if (word) {
            cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(const Vec& v) { return std::sqrt(dot(v, v)); }

bool l2_normalize(Vec& v) {
    double n = l2_norm(v);
    if (n == 0.0) return false;
    for (double& x : v) x /= n;
    return true;
}

double cosine(const Vec& a, const Vec& b) {
    double na = l2_norm(a), nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

}  // namespace ltrr
