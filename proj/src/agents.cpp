// SPDX-License-Identifier: Apache-2.0

#include "evince/agents.hpp"

#include <fstream>

#include "evince/chat.hpp"
#include "evince/error.hpp"

namespace evince {

std::string_view to_string(AgentKind kind) {
    return kind == AgentKind::Scripted ? "scripted" : "chat-backend";
}

std::string_view to_string(Role role) {
    switch (role) {
        case Role::Proponent: return "proponent";
        case Role::DevilsAdvocate: return "devils-advocate";
        case Role::Conciliatory: return "conciliatory";
    }
    return "proponent";
}

AgentKind agent_kind_from_string(std::string_view s) {
    if (s == "scripted") {
        return AgentKind::Scripted;
    }
    if (s == "chat-backend" || s == "chat") {
        return AgentKind::ChatBackend;
    }
    throw Error(ErrorCode::Config, "unknown agent kind '" + std::string(s) + "'");
}

void AgentProfile::validate() const {
    if (id.empty()) {
        throw Error(ErrorCode::Config, "agent id is empty");
    }
    if (default_k < 1 || default_k > 10) {
        throw Error(ErrorCode::Config, "agent '" + id + "': default_k must be in [1,10]");
    }
    if (kind == AgentKind::Scripted && fixtures.empty()) {
        throw Error(ErrorCode::Config, "scripted agent '" + id + "' has no fixtures");
    }
    if (kind == AgentKind::ChatBackend && model.empty()) {
        throw Error(ErrorCode::Config, "chat agent '" + id + "' has no model name");
    }
}

void to_json(nlohmann::json& j, const AgentProfile& p) {
    j = {{"id", p.id},
         {"kind", to_string(p.kind)},
         {"provider", p.provider},
         {"endpoint", p.endpoint},
         {"model", p.model},
         {"default_k", p.default_k},
         {"request_timeout", p.request_timeout.count()},
         {"temperature", p.temperature},
         {"fixtures", p.fixtures.string()}};
}

void from_json(const nlohmann::json& j, AgentProfile& p) {
    p = AgentProfile{};
    p.id = j.at("id").get<std::string>();
    p.kind = agent_kind_from_string(j.value("kind", std::string("scripted")));
    p.provider = j.value("provider", p.provider);
    p.endpoint = j.value("endpoint", p.endpoint);
    p.model = j.value("model", p.model);
    p.default_k = j.value("default_k", p.default_k);
    p.request_timeout = std::chrono::seconds(j.value("request_timeout", 60));
    p.temperature = j.value("temperature", p.temperature);
    p.fixtures = j.value("fixtures", std::string());
}

void to_json(nlohmann::json& j, const AgentResponse& r) {
    j = {{"predictions", r.predictions},
         {"justification", r.justification},
         {"raw_text", r.raw_text}};
}

void from_json(const nlohmann::json& j, AgentResponse& r) {
    r.predictions = j.at("predictions").get<PredictionSet>();
    r.justification = j.value("justification", std::string());
    r.raw_text = j.value("raw_text", std::string());
}

AgentResponse Agent::query(const std::string& prompt) {
    AgentResponse out;
    out.raw_text = complete(prompt);
    out.timestamp = std::chrono::system_clock::now();
    out.predictions = parse_predictions(out.raw_text);
    out.justification = out.raw_text;
    return out;
}

void from_json(const nlohmann::json& j, FixtureTurn& t) {
    t.raw_text = j.at("raw_text").get<std::string>();
    t.predictions.reset();
    t.justification.reset();
    if (j.contains("predictions")) {
        t.predictions = j.at("predictions").get<PredictionSet>();
    }
    if (j.contains("justification")) {
        t.justification = j.at("justification").get<std::string>();
    }
}

void to_json(nlohmann::json& j, const FixtureTurn& t) {
    j = {{"raw_text", t.raw_text}};
    if (t.predictions) {
        j["predictions"] = *t.predictions;
    }
    if (t.justification) {
        j["justification"] = *t.justification;
    }
}

std::vector<FixtureTurn> load_fixture(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open fixture " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, "fixture " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!doc.is_array()) {
        throw Error(ErrorCode::Io, "fixture " + path.string() + " must be a JSON array of turns");
    }
    return doc.get<std::vector<FixtureTurn>>();
}

ScriptedAgent::ScriptedAgent(std::string id, std::vector<FixtureTurn> turns)
    : id_(std::move(id)), turns_(std::move(turns)) {}

const FixtureTurn& ScriptedAgent::next(const std::string& prompt) {
    if (cursor_ >= turns_.size()) {
        throw Error(ErrorCode::FixtureExhausted,
                    "scripted agent '" + id_ + "' has no turns left after " +
                        std::to_string(turns_.size()));
    }
    prompts_.push_back(prompt);
    return turns_[cursor_++];
}

std::string ScriptedAgent::complete(const std::string& prompt) { return next(prompt).raw_text; }

AgentResponse ScriptedAgent::query(const std::string& prompt) {
    const FixtureTurn& turn = next(prompt);
    AgentResponse out;
    out.raw_text = turn.raw_text;
    out.timestamp = std::chrono::system_clock::now();
    out.predictions = turn.predictions ? *turn.predictions : parse_predictions(turn.raw_text);
    out.justification = turn.justification ? *turn.justification : turn.raw_text;
    return out;
}

std::unique_ptr<Agent> open_session(const AgentProfile& profile, std::string_view case_id) {
    profile.validate();
    if (profile.kind == AgentKind::ChatBackend) {
        return std::make_unique<chat::ChatAgent>(profile, chat::make_http_transport(profile));
    }
    std::filesystem::path path = profile.fixtures;
    if (std::filesystem::is_directory(path)) {
        path /= std::string(case_id) + ".json";
    }
    return std::make_unique<ScriptedAgent>(profile.id, load_fixture(path));
}

}  // namespace evince
