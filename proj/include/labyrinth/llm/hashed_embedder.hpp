// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "labyrinth/llm/provider.hpp"

namespace labyrinth::llm {

// Offline embedder: lower-cased alphanumeric terms hashed (FNV-1a) into a
// fixed number of buckets, term counts L2-normalized.
class HashedEmbedder final : public Embedder {
public:
    explicit HashedEmbedder(std::size_t dimension = 512);

    std::vector<Vector> embed(const std::vector<std::string>& texts) override;
    Vector embed_one(std::string_view text) const;
    std::size_t dimension() const { return dimension_; }

private:
    std::size_t dimension_;
};

std::vector<std::string> tokenize(std::string_view text);

}  // namespace labyrinth::llm
