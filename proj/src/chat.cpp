// SPDX-License-Identifier: Apache-2.0

#include "evince/chat.hpp"

#include <cctype>
#include <cstdlib>

#include <httplib.h>

#include "evince/error.hpp"

namespace evince::chat {

void to_json(nlohmann::json& j, const Request& r) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : r.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    j = {{"model", r.model}, {"messages", std::move(messages)}, {"temperature", r.temperature}};
}

Endpoint Endpoint::parse(std::string_view url) {
    Endpoint e;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) {
        throw Error(ErrorCode::Config, "endpoint URL lacks a scheme: " + std::string(url));
    }
    e.scheme = std::string(url.substr(0, scheme_end));
    if (e.scheme != "http" && e.scheme != "https") {
        throw Error(ErrorCode::Config, "unsupported endpoint scheme: " + e.scheme);
    }
    std::string_view rest = url.substr(scheme_end + 3);
    const auto path_start = rest.find('/');
    std::string_view authority = rest.substr(0, path_start);
    e.path = path_start == std::string_view::npos ? "/" : std::string(rest.substr(path_start));
    const auto colon = authority.rfind(':');
    if (colon != std::string_view::npos) {
        e.host = std::string(authority.substr(0, colon));
        e.port = std::atoi(std::string(authority.substr(colon + 1)).c_str());
    } else {
        e.host = std::string(authority);
        e.port = e.scheme == "https" ? 443 : 80;
    }
    if (e.host.empty() || e.port <= 0) {
        throw Error(ErrorCode::Config, "malformed endpoint URL: " + std::string(url));
    }
    return e;
}

std::string Endpoint::base() const { return scheme + "://" + host + ":" + std::to_string(port); }

namespace {

std::string substitute_model(std::string path, const std::string& model) {
    const std::string placeholder = "{model}";
    for (auto p = path.find(placeholder); p != std::string::npos; p = path.find(placeholder)) {
        path.replace(p, placeholder.size(), model);
    }
    return path;
}

class OpenAiAdapter : public ProviderAdapter {
public:
    HttpCall build(const Request& request, const Endpoint& endpoint,
                   const std::string& api_key) const override {
        HttpCall call{substitute_model(endpoint.path, request.model), {}, nlohmann::json(request).dump()};
        if (!api_key.empty()) {
            call.headers.emplace_back("Authorization", "Bearer " + api_key);
        }
        return call;
    }

    std::string extract_text(const nlohmann::json& reply) const override {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    }
};

class AnthropicAdapter : public ProviderAdapter {
public:
    HttpCall build(const Request& request, const Endpoint& endpoint,
                   const std::string& api_key) const override {
        nlohmann::json body = {{"model", request.model},
                               {"max_tokens", 2048},
                               {"temperature", request.temperature}};
        nlohmann::json messages = nlohmann::json::array();
        std::string system;
        for (const auto& m : request.messages) {
            if (m.role == "system") {
                system += (system.empty() ? "" : "\n") + m.content;
            } else {
                messages.push_back({{"role", m.role}, {"content", m.content}});
            }
        }
        if (!system.empty()) {
            body["system"] = system;
        }
        body["messages"] = std::move(messages);
        HttpCall call{substitute_model(endpoint.path, request.model), {}, body.dump()};
        call.headers.emplace_back("anthropic-version", "2023-06-01");
        if (!api_key.empty()) {
            call.headers.emplace_back("x-api-key", api_key);
        }
        return call;
    }

    std::string extract_text(const nlohmann::json& reply) const override {
        std::string text;
        for (const auto& block : reply.at("content")) {
            if (block.value("type", std::string("text")) == "text") {
                text += block.at("text").get<std::string>();
            }
        }
        if (text.empty()) {
            throw std::out_of_range("no text block");
        }
        return text;
    }
};

class GeminiAdapter : public ProviderAdapter {
public:
    HttpCall build(const Request& request, const Endpoint& endpoint,
                   const std::string& api_key) const override {
        nlohmann::json contents = nlohmann::json::array();
        std::string system;
        for (const auto& m : request.messages) {
            if (m.role == "system") {
                system += (system.empty() ? "" : "\n") + m.content;
                continue;
            }
            contents.push_back({{"role", m.role == "assistant" ? "model" : "user"},
                                {"parts", {{{"text", m.content}}}}});
        }
        nlohmann::json body = {{"contents", std::move(contents)},
                               {"generationConfig", {{"temperature", request.temperature}}}};
        if (!system.empty()) {
            body["systemInstruction"] = {{"parts", {{{"text", system}}}}};
        }
        HttpCall call{substitute_model(endpoint.path, request.model), {}, body.dump()};
        if (!api_key.empty()) {
            call.headers.emplace_back("x-goog-api-key", api_key);
        }
        return call;
    }

    std::string extract_text(const nlohmann::json& reply) const override {
        return reply.at("candidates").at(0).at("content").at("parts").at(0).at("text").get<std::string>();
    }
};

}  // namespace

std::unique_ptr<ProviderAdapter> make_adapter(std::string_view provider) {
    if (provider == "openai") {
        return std::make_unique<OpenAiAdapter>();
    }
    if (provider == "anthropic") {
        return std::make_unique<AnthropicAdapter>();
    }
    if (provider == "gemini") {
        return std::make_unique<GeminiAdapter>();
    }
    throw Error(ErrorCode::Config, "unknown chat provider '" + std::string(provider) + "'");
}

HttpTransport::HttpTransport(Endpoint endpoint, std::string api_key,
                             std::unique_ptr<ProviderAdapter> adapter, std::chrono::seconds timeout)
    : endpoint_(std::move(endpoint)),
      api_key_(std::move(api_key)),
      adapter_(std::move(adapter)),
      timeout_(timeout) {}

std::string HttpTransport::send(const Request& request) {
    const HttpCall call = adapter_->build(request, endpoint_, api_key_);
    httplib::Client client(endpoint_.base());
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers headers;
    for (const auto& [k, v] : call.headers) {
        headers.emplace(k, v);
    }

    const auto started = std::chrono::steady_clock::now();
    auto result = client.Post(call.path, headers, call.body, "application/json");
    if (!result) {
        const auto err = result.error();
        const auto elapsed = std::chrono::steady_clock::now() - started;
        if (err == httplib::Error::ConnectionTimeout ||
            (err == httplib::Error::Read && elapsed >= timeout_)) {
            throw Error(ErrorCode::BackendTimeout,
                        "no reply from " + endpoint_.base() + " within " +
                            std::to_string(timeout_.count()) + "s");
        }
        throw Error(ErrorCode::BackendHttpError,
                    "request to " + endpoint_.base() + call.path + " failed: " +
                        httplib::to_string(err),
                    "0");
    }
    if (result->status < 200 || result->status >= 300) {
        throw Error(ErrorCode::BackendHttpError,
                    "HTTP " + std::to_string(result->status) + " from " + endpoint_.base() +
                        call.path,
                    std::to_string(result->status));
    }
    try {
        return adapter_->extract_text(nlohmann::json::parse(result->body));
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ParseFailure,
                    std::string("reply carries no completion text: ") + e.what(), result->body);
    }
}

std::string env_var_name(std::string_view provider, std::string_view suffix) {
    std::string name = "EVINCE_";
    for (char c : provider) {
        name.push_back(std::isalnum(static_cast<unsigned char>(c))
                           ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                           : '_');
    }
    name += "_";
    name += suffix;
    return name;
}

std::unique_ptr<Transport> make_http_transport(const AgentProfile& profile) {
    std::string url = profile.endpoint;
    if (url.empty()) {
        if (const char* env = std::getenv(env_var_name(profile.provider, "URL").c_str())) {
            url = env;
        }
    }
    if (url.empty()) {
        throw Error(ErrorCode::Config, "chat agent '" + profile.id + "' has no endpoint; set " +
                                           env_var_name(profile.provider, "URL"));
    }
    std::string key;
    if (const char* env = std::getenv(env_var_name(profile.provider, "API_KEY").c_str())) {
        key = env;
    }
    return std::make_unique<HttpTransport>(Endpoint::parse(url), std::move(key),
                                           make_adapter(profile.provider), profile.request_timeout);
}

ChatAgent::ChatAgent(AgentProfile profile, std::unique_ptr<Transport> transport)
    : profile_(std::move(profile)), transport_(std::move(transport)) {}

std::string ChatAgent::complete(const std::string& prompt) {
    Request request;
    request.model = profile_.model;
    request.temperature = profile_.temperature;
    request.messages = {{"system", std::string(kSystemPrompt)}, {"user", prompt}};
    return transport_->send(request);
}

}  // namespace evince::chat
