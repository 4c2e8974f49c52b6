// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "evince/agents.hpp"

namespace evince::chat {

struct Message {
    std::string role;  // "system", "user" or "assistant"
    std::string content;
};

/// Provider-neutral request: {model, messages:[{role, content}...], temperature}.
struct Request {
    std::string model;
    std::vector<Message> messages;
    double temperature = 0.7;
};

void to_json(nlohmann::json& j, const Request& r);

struct Endpoint {
    std::string scheme;  // http or https
    std::string host;
    int port = 0;
    std::string path;

    static Endpoint parse(std::string_view url);
    std::string base() const;
};

struct HttpCall {
    std::string path;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
};

/// Translates the neutral request into one provider's wire format and pulls
/// the first completion text back out of the reply.
class ProviderAdapter {
public:
    virtual ~ProviderAdapter() = default;
    virtual HttpCall build(const Request& request, const Endpoint& endpoint,
                           const std::string& api_key) const = 0;
    virtual std::string extract_text(const nlohmann::json& reply) const = 0;
};

/// "openai" (also any OpenAI-compatible server), "anthropic", "gemini".
std::unique_ptr<ProviderAdapter> make_adapter(std::string_view provider);

class Transport {
public:
    virtual ~Transport() = default;
    virtual std::string send(const Request& request) = 0;
};

class HttpTransport : public Transport {
public:
    HttpTransport(Endpoint endpoint, std::string api_key,
                  std::unique_ptr<ProviderAdapter> adapter, std::chrono::seconds timeout);

    /// Throws BackendTimeout, BackendHttpError(status) or ParseFailure when the
    /// reply carries no completion text.
    std::string send(const Request& request) override;

private:
    Endpoint endpoint_;
    std::string api_key_;
    std::unique_ptr<ProviderAdapter> adapter_;
    std::chrono::seconds timeout_;
};

/// Resolves endpoint and key for a chat profile: the profile's endpoint, else
/// EVINCE_<PROVIDER>_URL; the key only ever comes from EVINCE_<PROVIDER>_API_KEY.
std::unique_ptr<Transport> make_http_transport(const AgentProfile& profile);

std::string env_var_name(std::string_view provider, std::string_view suffix);

inline constexpr std::string_view kSystemPrompt =
    "You are an experienced physician taking part in a structured diagnostic debate. "
    "State probabilities as percentages and justify every prediction.";

class ChatAgent : public Agent {
public:
    ChatAgent(AgentProfile profile, std::unique_ptr<Transport> transport);

    const std::string& id() const override { return profile_.id; }
    std::string complete(const std::string& prompt) override;

private:
    AgentProfile profile_;
    std::unique_ptr<Transport> transport_;
};

}  // namespace evince::chat
