// SPDX-License-Identifier: Apache-2.0
//
// Rule-sentence retrieval: cosine similarity between every rule and every
// query, max-pooled over the queries, top k kept.
#pragma once

#include "labyrinth/llm/provider.hpp"

#include <string>
#include <vector>

namespace labyrinth::retrieval {

using llm::Vector;

// Throws on a zero vector or mismatched dimensions.
double cosine(const Vector& a, const Vector& b);

// pooled[i] = max over queries q of cosine(candidates[i], q).
std::vector<double> max_pooled_scores(const std::vector<Vector>& candidates, const std::vector<Vector>& queries);

struct Scored {
    std::size_t id = 0;
    double score = 0.0;

    bool operator==(const Scored&) const = default;
};

struct RetrievalResult {
    // Descending score, ties by ascending id.
    std::vector<Scored> ranked;
    // Set when k exceeded the number of candidates and everything was returned.
    bool clipped = false;

    std::vector<std::size_t> ids() const;
};

RetrievalResult top_k(const std::vector<double>& scores, std::size_t k);

class RuleStore {
public:
    // Embeds every sentence once.
    RuleStore(std::vector<std::string> sentences, llm::Embedder& embedder);
    RuleStore(std::vector<std::string> sentences, std::vector<Vector> vectors);

    // One sentence per line; blank lines and lines starting with '#' are skipped.
    static RuleStore load(const std::string& path, llm::Embedder& embedder);
    static std::vector<std::string> read_sentences(const std::string& path);

    std::size_t size() const { return sentences_.size(); }
    const std::vector<std::string>& sentences() const { return sentences_; }
    const std::vector<Vector>& vectors() const { return vectors_; }
    std::vector<std::string> texts(const RetrievalResult& result) const;

private:
    std::vector<std::string> sentences_;
    std::vector<Vector> vectors_;
};

RetrievalResult top_k_rules(const RuleStore& store, const std::vector<Vector>& query_vectors, std::size_t k);
RetrievalResult top_k_rules(const RuleStore& store, const std::vector<std::string>& queries, std::size_t k,
                            llm::Embedder& embedder);

}  // namespace labyrinth::retrieval
