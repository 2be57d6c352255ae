// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/engine/reply.hpp"

#include <cctype>

namespace labyrinth::engine {

std::optional<std::string> reply_text(const llm::ModelTurn& turn) {
    if (const auto* text = std::get_if<llm::TextTurn>(&turn)) return text->content;
    return std::nullopt;
}

std::optional<llm::Json> extract_json(std::string_view text) {
    auto whole = llm::Json::parse(text, nullptr, false);
    if (!whole.is_discarded()) return whole;
    for (char open : {'{', '['}) {
        const char close = open == '{' ? '}' : ']';
        const auto first = text.find(open);
        const auto last = text.rfind(close);
        if (first == std::string_view::npos || last == std::string_view::npos || last < first) continue;
        auto inner = llm::Json::parse(text.substr(first, last - first + 1), nullptr, false);
        if (!inner.is_discarded()) return inner;
    }
    return std::nullopt;
}

std::string first_word(std::string_view text) {
    std::string out;
    std::size_t i = 0;
    auto word_char = [](unsigned char c) { return std::isalpha(c) || c == '-' || c == '_'; };
    while (i < text.size() && !word_char(static_cast<unsigned char>(text[i]))) ++i;
    while (i < text.size() && word_char(static_cast<unsigned char>(text[i]))) {
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
        ++i;
    }
    return out;
}

}  // namespace labyrinth::engine
