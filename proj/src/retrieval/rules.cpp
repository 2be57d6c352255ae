// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/retrieval/rules.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace labyrinth::retrieval {

double cosine(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw Error("cosine: dimension mismatch");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw Error("cosine: zero vector");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<double> max_pooled_scores(const std::vector<Vector>& candidates, const std::vector<Vector>& queries) {
    if (queries.empty()) throw Error("retrieval needs at least one query");
    std::vector<double> pooled(candidates.size(), -1.0);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        for (const auto& q : queries) pooled[i] = std::max(pooled[i], cosine(candidates[i], q));
    }
    return pooled;
}

std::vector<std::size_t> RetrievalResult::ids() const {
    std::vector<std::size_t> out;
    out.reserve(ranked.size());
    for (const auto& s : ranked) out.push_back(s.id);
    return out;
}

RetrievalResult top_k(const std::vector<double>& scores, std::size_t k) {
    if (k == 0) throw Error("k must be at least 1");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    RetrievalResult r;
    r.clipped = k > scores.size();
    order.resize(std::min(k, scores.size()));
    for (std::size_t id : order) r.ranked.push_back({id, scores[id]});
    return r;
}

RuleStore::RuleStore(std::vector<std::string> sentences, llm::Embedder& embedder)
    : sentences_(std::move(sentences)) {
    if (!sentences_.empty()) vectors_ = embedder.embed(sentences_);
    if (vectors_.size() != sentences_.size()) throw Error("embedder returned the wrong number of vectors");
}

RuleStore::RuleStore(std::vector<std::string> sentences, std::vector<Vector> vectors)
    : sentences_(std::move(sentences)), vectors_(std::move(vectors)) {
    if (vectors_.size() != sentences_.size()) throw Error("one vector per rule sentence is required");
    for (const auto& v : vectors_) {
        if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) {
            throw Error("rule vectors must be non-zero");
        }
    }
}

std::vector<std::string> RuleStore::read_sentences(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open rule summary: " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        const auto start = line.find_first_not_of(' ');
        if (start == std::string::npos || line[start] == '#') continue;
        out.push_back(line.substr(start));
    }
    return out;
}

RuleStore RuleStore::load(const std::string& path, llm::Embedder& embedder) {
    return RuleStore(read_sentences(path), embedder);
}

std::vector<std::string> RuleStore::texts(const RetrievalResult& result) const {
    std::vector<std::string> out;
    for (const auto& s : result.ranked) out.push_back(sentences_.at(s.id));
    return out;
}

RetrievalResult top_k_rules(const RuleStore& store, const std::vector<Vector>& query_vectors, std::size_t k) {
    return top_k(max_pooled_scores(store.vectors(), query_vectors), k);
}

RetrievalResult top_k_rules(const RuleStore& store, const std::vector<std::string>& queries, std::size_t k,
                            llm::Embedder& embedder) {
    if (queries.empty()) throw Error("retrieval needs at least one query");
    return top_k_rules(store, embedder.embed(queries), k);
}

}  // namespace labyrinth::retrieval
