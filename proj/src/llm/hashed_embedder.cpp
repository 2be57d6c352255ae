// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/llm/hashed_embedder.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>

namespace labyrinth::llm {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

HashedEmbedder::HashedEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw Error("embedding dimension must be positive");
}

Vector HashedEmbedder::embed_one(std::string_view text) const {
    Vector v(dimension_, 0.0);
    auto terms = tokenize(text);
    // Text without any term still gets a non-zero vector.
    if (terms.empty()) terms.emplace_back(text);
    for (const auto& t : terms) v[fnv1a(t) % dimension_] += 1.0;
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

std::vector<Vector> HashedEmbedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw Error("embed needs at least one text");
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

}  // namespace labyrinth::llm
