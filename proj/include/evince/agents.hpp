// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "evince/probdist.hpp"

namespace evince {

enum class AgentKind { Scripted, ChatBackend };
enum class Role { Proponent, DevilsAdvocate, Conciliatory };

std::string_view to_string(AgentKind kind);
std::string_view to_string(Role role);
AgentKind agent_kind_from_string(std::string_view s);

struct AgentProfile {
    std::string id;
    AgentKind kind = AgentKind::Scripted;
    /// Provider adapter for chat backends: "openai", "anthropic" or "gemini".
    std::string provider = "openai";
    /// Chat-completion endpoint; when empty, EVINCE_<PROVIDER>_URL is used.
    std::string endpoint;
    std::string model;
    int default_k = 5;
    std::chrono::seconds request_timeout{60};
    double temperature = 0.7;
    /// Scripted agents: a fixture file, or a directory of `<case-id>.json` files.
    std::filesystem::path fixtures;

    /// Throws Error(Config) when the profile cannot be used.
    void validate() const;
};

void to_json(nlohmann::json& j, const AgentProfile& p);
void from_json(const nlohmann::json& j, AgentProfile& p);

struct AgentResponse {
    PredictionSet predictions;
    std::string justification;
    std::string raw_text;
    std::chrono::system_clock::time_point timestamp{};
};

/// Timestamps are left out; they belong to transcript metadata.
void to_json(nlohmann::json& j, const AgentResponse& r);
void from_json(const nlohmann::json& j, AgentResponse& r);

struct HistoryTurn {
    std::string agent_id;
    AgentResponse response;
};

struct PromptContext {
    std::vector<std::string> symptoms;
    std::vector<HistoryTurn> history;
    Role role = Role::Proponent;
    double contentiousness = 0.9;
    int requested_k = 5;
    /// Set for the conciliatory finale: asks for supplementary symptom
    /// inquiries and lab tests alongside the joint diagnosis.
    bool final_round = false;
    /// When non-empty, predictions must be drawn from these labels.
    std::vector<std::string> candidate_labels;
};

struct ContentiousnessLevel {
    double level;
    std::string_view tone;
    std::string_view emphasis;
    std::string_view language;
};

/// The five behaviour rows, most contentious first.
const std::vector<ContentiousnessLevel>& contentiousness_levels();

/// Row nearest to `delta`; exact midpoints resolve to the more contentious row.
const ContentiousnessLevel& nearest_contentiousness(double delta);

std::string render_opening_prompt(const PromptContext& ctx);
std::string render_debate_prompt(const PromptContext& ctx, const AgentResponse& opponent_turn);

/// "Dengue Fever (60%), Chikungunya (25%)" style rendering, ranked order.
std::string format_predictions(const PredictionSet& p);
std::string format_percent(double mass);

/// Extracts "name (NN%)", "name: NN%" and "name - NN%" patterns. Parenthetical
/// qualifiers are dropped from names, so "Hepatitis C (HCV): 40%" yields the
/// label "hepatitis c". Throws ParseFailure (raw text in detail()) when no
/// pattern is found.
PredictionSet parse_predictions(std::string_view raw);

/// A debate participant bound to one debate session.
class Agent {
public:
    virtual ~Agent() = default;

    virtual const std::string& id() const = 0;

    /// Raw backend text for `prompt`.
    virtual std::string complete(const std::string& prompt) = 0;

    /// complete() followed by parse_predictions().
    virtual AgentResponse query(const std::string& prompt);
};

inline AgentResponse query_agent(Agent& agent, const std::string& prompt) {
    return agent.query(prompt);
}

struct FixtureTurn {
    std::string raw_text;
    std::optional<PredictionSet> predictions;
    std::optional<std::string> justification;
};

void from_json(const nlohmann::json& j, FixtureTurn& t);
void to_json(nlohmann::json& j, const FixtureTurn& t);

/// Reads a fixture: a JSON array of {raw_text, predictions?, justification?}.
std::vector<FixtureTurn> load_fixture(const std::filesystem::path& path);

/// Replays fixture turns in order. One instance per debate session; not
/// safe to drive from two threads.
class ScriptedAgent : public Agent {
public:
    ScriptedAgent(std::string id, std::vector<FixtureTurn> turns);

    const std::string& id() const override { return id_; }
    std::string complete(const std::string& prompt) override;
    AgentResponse query(const std::string& prompt) override;

    std::size_t remaining() const { return turns_.size() - cursor_; }
    const std::vector<std::string>& prompts_seen() const { return prompts_; }

private:
    const FixtureTurn& next(const std::string& prompt);

    std::string id_;
    std::vector<FixtureTurn> turns_;
    std::size_t cursor_ = 0;
    std::vector<std::string> prompts_;
};

/// Opens a fresh session for `profile`. Scripted profiles pointing at a
/// directory load `<dir>/<case_id>.json`.
std::unique_ptr<Agent> open_session(const AgentProfile& profile, std::string_view case_id);

}  // namespace evince
