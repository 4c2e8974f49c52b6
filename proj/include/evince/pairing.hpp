// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evince/agents.hpp"
#include "evince/dataset.hpp"

namespace evince::pairing {

struct AgentProbe {
    std::string agent_id;
    double mean_entropy = 0.0;  // bits
    double mean_quality = 0.0;  // [0,1]
    int probe_k = 5;
    std::size_t cases_used = 0;
};

struct PairSelection {
    std::string high_entropy_id;
    std::string low_entropy_id;
    double entropy_gap = 0.0;
    double quality_difference = 0.0;
};

enum class QualityMetric { TopK, Crit };

/// Asks `agent` for its opening top-k on every case. Quality is the mean
/// score_topk against the case labels, or the mean CRIT Γ when a judge is
/// passed with QualityMetric::Crit.
AgentProbe probe_agent(Agent& agent, const std::vector<CaseRecord>& cases, int k,
                       QualityMetric metric = QualityMetric::TopK, Agent* judge = nullptr);

/// One fresh session per case.
AgentProbe probe_agent(const AgentProfile& profile, const std::vector<CaseRecord>& cases, int k,
                       QualityMetric metric = QualityMetric::TopK, Agent* judge = nullptr);

/// Among pairs whose qualities differ by at most `quality_epsilon`, the one
/// with the largest entropy gap; ties go to the lexicographically smallest
/// (sorted) id pair. Throws NoEligiblePair when no pair passes the gate.
PairSelection select_pair(const std::vector<AgentProbe>& probes, double quality_epsilon = 0.10);

void to_json(nlohmann::json& j, const AgentProbe& p);
void to_json(nlohmann::json& j, const PairSelection& s);

}  // namespace evince::pairing
