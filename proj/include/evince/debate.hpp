// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "evince/agents.hpp"
#include "evince/ara.hpp"
#include "evince/crit.hpp"
#include "evince/dataset.hpp"
#include "evince/error.hpp"

namespace evince::debate {

struct DebateConfig {
    std::vector<double> delta_schedule{0.9, 0.7, 0.5, 0.3, 0.0};
    int max_rounds = 6;
    double consensus_tolerance = 0.05;
    int requested_k = 5;
    int final_round_k = 5;

    /// Throws Error(Config) unless the schedule is strictly descending within
    /// [0,1], ends below 0.10, and max_rounds covers it.
    void validate() const;
};

void to_json(nlohmann::json& j, const DebateConfig& c);
void from_json(const nlohmann::json& j, DebateConfig& c);

struct DebateRound {
    std::size_t index = 0;  // 1-based
    double delta = 0.0;
    AgentResponse turn_a;
    AgentResponse turn_b;
    double entropy_a = 0.0;  // bits, over normalize(turn_a.predictions)
    double entropy_b = 0.0;
    bool consensus_reached = false;
    /// The conciliatory joint-recommendation round.
    bool finale = false;
    std::optional<crit::CritReport> crit_a;
    std::optional<crit::CritReport> crit_b;
    /// Confidence-weighted aggregate of the two turns.
    PredictionSet aggregate;
};

struct DebateTranscript {
    std::string case_id;
    std::vector<std::string> symptoms;
    std::string truth;
    std::string agent_a;
    std::string agent_b;
    std::pair<Role, Role> roles{Role::Proponent, Role::Proponent};
    std::vector<DebateRound> rounds;
    /// Present iff the debate completed without error.
    std::optional<std::string> joint_recommendation;
    PredictionSet final_aggregate;
    std::optional<ara::RegretReport> regret;
    std::vector<ara::TraceRow> ara_trace;
    std::optional<std::string> error;
    std::chrono::system_clock::time_point started{};
    std::chrono::system_clock::time_point finished{};

    bool completed() const { return joint_recommendation.has_value(); }
};

/// Rounds, roles and results; wall-clock times live under "metadata" only.
void to_json(nlohmann::json& j, const DebateTranscript& t);

/// An agent failure surfaced with everything recorded before it.
class DebateError : public Error {
public:
    DebateError(const Error& cause, DebateTranscript partial)
        : Error(cause.code(), strip_prefix(cause), cause.detail()), partial_(std::move(partial)) {}

    const DebateTranscript& partial() const noexcept { return partial_; }

private:
    static std::string strip_prefix(const Error& e);

    DebateTranscript partial_;
};

struct DebateOptions {
    /// When set, every turn is scored with CRIT and Γ becomes its ARA confidence.
    Agent* judge = nullptr;
    int crit_depth = 0;
    std::vector<std::string> candidate_labels;
    ara::AraConfig ara;
};

/// Equal top-1 labels give (proponent, devil's advocate); otherwise both defend.
std::pair<Role, Role> assign_roles(const AgentResponse& opening_a, const AgentResponse& opening_b);

/// Top-3 label sets equal and every per-label difference within `tolerance`.
bool detect_consensus(const DebateRound& round, double tolerance);
bool detect_consensus(const PredictionSet& a, const PredictionSet& b, double tolerance);

DebateTranscript run_debate(const CaseRecord& c, Agent& agent_a, Agent& agent_b,
                            const DebateConfig& config, const DebateOptions& options = {});

/// Opens one session per profile for this case, then debates.
DebateTranscript run_debate(const CaseRecord& c, const AgentProfile& agent_a,
                            const AgentProfile& agent_b, const DebateConfig& config,
                            const DebateOptions& options = {});

struct EntropyPoint {
    std::size_t round = 0;
    double entropy_a = 0.0;
    double entropy_b = 0.0;
    double delta = 0.0;
};

std::vector<EntropyPoint> entropy_trajectory(const DebateTranscript& t);

void write_entropy_csv(std::ostream& out, const std::vector<EntropyPoint>& series);

}  // namespace evince::debate
