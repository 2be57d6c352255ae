// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/llm/scripted.hpp"

namespace labyrinth::llm {

ScriptedProvider::ScriptedProvider(std::vector<ModelTurn> script, std::map<std::string, Vector> canned_embeddings)
    : primary_(script.begin(), script.end()), canned_(std::move(canned_embeddings)) {}

void ScriptedProvider::load(const Json& doc) {
    if (doc.is_array()) {
        auto turns = turns_from_json(doc);
        std::lock_guard lock(mutex_);
        primary_ = std::deque<ModelTurn>(turns.begin(), turns.end());
        return;
    }
    if (!doc.is_object()) throw Error("script document must be an array or an object of purposes");
    for (const auto& [key, turns] : doc.items()) {
        const auto purpose = parse_purpose(key);
        if (!purpose) throw Error("unknown script purpose: " + key);
        set_script(*purpose, turns_from_json(turns));
    }
}

void ScriptedProvider::set_script(Purpose purpose, std::vector<ModelTurn> turns) {
    std::lock_guard lock(mutex_);
    scripts_[purpose] = std::deque<ModelTurn>(turns.begin(), turns.end());
}

void ScriptedProvider::add_embedding(std::string text, Vector vector) {
    std::lock_guard lock(mutex_);
    canned_[std::move(text)] = std::move(vector);
}

void ScriptedProvider::inject_failure(Purpose purpose, int count) {
    std::lock_guard lock(mutex_);
    failures_[purpose] += count;
}

std::deque<ModelTurn>& ScriptedProvider::queue_for(Purpose purpose) {
    auto it = scripts_.find(purpose);
    return it == scripts_.end() ? primary_ : it->second;
}

ModelTurn ScriptedProvider::complete(const PromptPackage& prompt) {
    std::lock_guard lock(mutex_);
    recorded_.push_back(prompt);
    if (auto it = failures_.find(prompt.purpose); it != failures_.end() && it->second > 0) {
        --it->second;
        throw ProviderError("injected failure", {}, true);
    }
    auto& q = queue_for(prompt.purpose);
    if (q.empty()) return StopTurn{};
    ModelTurn t = std::move(q.front());
    q.pop_front();
    return t;
}

std::vector<Vector> ScriptedProvider::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw Error("embed needs at least one text");
    std::lock_guard lock(mutex_);
    const std::size_t dim = canned_.empty() ? 512 : canned_.begin()->second.size();
    const HashedEmbedder fallback(dim);
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        auto it = canned_.find(t);
        out.push_back(it == canned_.end() ? fallback.embed_one(t) : it->second);
        if (out.back().size() != dim) throw ProviderError("embedding dimension mismatch for: " + t);
    }
    return out;
}

std::vector<PromptPackage> ScriptedProvider::prompts() const {
    std::lock_guard lock(mutex_);
    return recorded_;
}

std::vector<PromptPackage> ScriptedProvider::prompts_for(Purpose purpose) const {
    std::lock_guard lock(mutex_);
    std::vector<PromptPackage> out;
    for (const auto& p : recorded_) {
        if (p.purpose == purpose) out.push_back(p);
    }
    return out;
}

std::size_t ScriptedProvider::remaining(Purpose purpose) const {
    std::lock_guard lock(mutex_);
    auto it = scripts_.find(purpose);
    return it == scripts_.end() ? primary_.size() : it->second.size();
}

}  // namespace labyrinth::llm
