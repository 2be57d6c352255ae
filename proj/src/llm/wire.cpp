// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/llm/wire.hpp"

#include <cmath>

namespace labyrinth::llm::wire {

namespace {

std::string_view json_type(functions::ParamType type) {
    switch (type) {
        case functions::ParamType::Integer: return "integer";
        case functions::ParamType::Boolean: return "boolean";
        case functions::ParamType::String: break;
    }
    return "string";
}

std::string wire_call_id(const ChatEvent& e) {
    if (e.call && !e.call->call_id.empty()) return e.call->call_id;
    return "call_" + std::to_string(e.counter);
}

Json parse_body(const std::string& body) {
    Json doc = Json::parse(body, nullptr, false);
    if (doc.is_discarded()) throw ProviderError("provider returned invalid JSON", body);
    return doc;
}

}  // namespace

Json tool(const functions::FunctionSpec& spec) {
    Json properties = Json::object();
    Json required = Json::array();
    for (const auto& p : spec.parameters) {
        properties[p.name] = {{"type", json_type(p.type)}, {"description", p.description}};
        if (p.required) required.push_back(p.name);
    }
    return {{"type", "function"},
            {"function",
             {{"name", spec.name},
              {"description", spec.description},
              {"parameters",
               {{"type", "object"}, {"properties", properties}, {"required", required},
                {"additionalProperties", false}}}}}};
}

Json messages(const PromptPackage& prompt) {
    Json out = Json::array();
    out.push_back({{"role", "system"}, {"content", render_system_text(prompt)}});
    for (const auto& e : prompt.messages) {
        switch (e.kind) {
            case EventKind::PlayerMessage:
                out.push_back({{"role", "user"}, {"content", e.speaker.empty() ? e.content : e.speaker + ": " + e.content}});
                break;
            case EventKind::GmMessage:
                out.push_back({{"role", "assistant"}, {"content", e.content}});
                break;
            case EventKind::FunctionCallMsg: {
                const Json args = e.call ? e.call->arguments : Json::object();
                Json call = {{"id", wire_call_id(e)},
                             {"type", "function"},
                             {"function", {{"name", e.call ? e.call->name : ""}, {"arguments", args.dump()}}}};
                out.push_back({{"role", "assistant"}, {"content", nullptr}, {"tool_calls", Json::array({call})}});
                break;
            }
            case EventKind::FunctionResultMsg:
                out.push_back({{"role", "tool"}, {"tool_call_id", e.call_id}, {"content", e.content}});
                break;
            case EventKind::SummaryMsg:
                out.push_back({{"role", "system"}, {"content", "Summary of earlier events: " + e.content}});
                break;
            case EventKind::SystemMsg:
                out.push_back({{"role", "system"}, {"content", e.content}});
                break;
        }
    }
    return out;
}

Json chat_request(const PromptPackage& prompt, const std::string& model) {
    Json req = {{"model", model}, {"messages", messages(prompt)}};
    if (!prompt.tool_specs.empty()) {
        Json tools = Json::array();
        for (const auto& s : prompt.tool_specs) tools.push_back(tool(s));
        req["tools"] = std::move(tools);
        req["tool_choice"] = "auto";
        req["parallel_tool_calls"] = false;
    }
    return req;
}

ModelTurn parse_chat_response(const std::string& body) {
    const Json doc = parse_body(body);
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
        throw ProviderError("response has no choices", body);
    }
    const Json& choice = doc["choices"][0];
    if (!choice.contains("message") || !choice["message"].is_object()) {
        throw ProviderError("choice has no message", body);
    }
    const Json& message = choice["message"];
    if (message.contains("tool_calls") && message["tool_calls"].is_array() && !message["tool_calls"].empty()) {
        const Json& tc = message["tool_calls"][0];
        if (!tc.contains("function") || !tc["function"].is_object()) throw ProviderError("malformed tool call", body);
        const Json& fn = tc["function"];
        if (!fn.contains("name") || !fn["name"].is_string()) throw ProviderError("tool call without a name", body);
        FunctionCall call;
        call.name = fn["name"].get<std::string>();
        if (!functions::find_function(call.name)) {
            throw ProviderError("tool call names an unregistered function: " + call.name, body);
        }
        const std::string raw_args = fn.value("arguments", std::string("{}"));
        call.arguments = Json::parse(raw_args.empty() ? "{}" : raw_args, nullptr, false);
        if (call.arguments.is_discarded() || !call.arguments.is_object()) {
            throw ProviderError("tool call arguments are not a JSON object", body);
        }
        call.call_id = tc.value("id", std::string{});
        return call;
    }
    std::string content;
    if (message.contains("content") && message["content"].is_string()) content = message["content"].get<std::string>();
    const bool stopped = choice.value("finish_reason", Json()).is_string() && choice["finish_reason"] == "stop";
    if (content.empty()) return StopTurn{};
    return TextTurn{std::move(content), stopped};
}

Json embedding_request(const std::vector<std::string>& texts, const std::string& model) {
    return {{"model", model}, {"input", texts}};
}

std::vector<Vector> parse_embedding_response(const std::string& body, std::size_t expected) {
    const Json doc = parse_body(body);
    if (!doc.contains("data") || !doc["data"].is_array()) throw ProviderError("embedding response has no data", body);
    std::vector<Vector> out(expected);
    std::size_t seen = 0;
    for (const auto& item : doc["data"]) {
        const std::size_t index = item.value("index", seen);
        if (index >= expected || !item.contains("embedding")) throw ProviderError("bad embedding entry", body);
        out[index] = item["embedding"].get<Vector>();
        ++seen;
    }
    if (seen != expected) throw ProviderError("embedding count mismatch", body);
    for (const auto& v : out) {
        if (v.empty() || v.size() != out.front().size()) throw ProviderError("embedding dimension mismatch", body);
        for (double x : v) {
            if (!std::isfinite(x)) throw ProviderError("embedding contains non-finite values", body);
        }
    }
    return out;
}

}  // namespace labyrinth::llm::wire
