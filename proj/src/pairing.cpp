// SPDX-License-Identifier: Apache-2.0

#include "evince/pairing.hpp"

#include <cmath>
#include <optional>
#include <set>

#include "evince/crit.hpp"
#include "evince/error.hpp"

namespace evince::pairing {

namespace {

constexpr double kGapTieTolerance = 1e-12;

void check_inputs(const std::vector<CaseRecord>& cases, int k, QualityMetric metric, Agent* judge) {
    if (cases.empty()) {
        throw Error(ErrorCode::InvalidArgument, "probe needs at least one case");
    }
    if (k < 1 || k > 10) {
        throw Error(ErrorCode::InvalidArgument, "probe k must lie in [1,10]");
    }
    if (metric == QualityMetric::Crit && judge == nullptr) {
        throw Error(ErrorCode::InvalidArgument, "CRIT quality needs a judge agent");
    }
}

struct CaseProbe {
    double entropy;
    double quality;
};

CaseProbe probe_case(Agent& agent, const CaseRecord& c, int k, QualityMetric metric, Agent* judge) {
    PromptContext ctx;
    ctx.symptoms = c.symptoms;
    ctx.requested_k = k;
    const AgentResponse r = agent.query(render_opening_prompt(ctx));
    const PredictionSet p = normalize(r.predictions);
    double quality = 0.0;
    if (metric == QualityMetric::TopK) {
        quality = dataset::score_topk(p, c.truth);
    } else {
        quality = crit::crit(*judge, crit::extract_document(r, nullptr, agent.id())).gamma_total;
    }
    return {shannon_entropy(p), quality};
}

AgentProbe summarize(std::string id, const std::vector<CaseProbe>& per_case, int k) {
    AgentProbe probe;
    probe.agent_id = std::move(id);
    probe.probe_k = k;
    probe.cases_used = per_case.size();
    for (const auto& c : per_case) {
        probe.mean_entropy += c.entropy;
        probe.mean_quality += c.quality;
    }
    probe.mean_entropy /= static_cast<double>(per_case.size());
    probe.mean_quality /= static_cast<double>(per_case.size());
    return probe;
}

}  // namespace

AgentProbe probe_agent(Agent& agent, const std::vector<CaseRecord>& cases, int k,
                       QualityMetric metric, Agent* judge) {
    check_inputs(cases, k, metric, judge);
    std::vector<CaseProbe> per_case;
    for (const auto& c : cases) {
        per_case.push_back(probe_case(agent, c, k, metric, judge));
    }
    return summarize(agent.id(), per_case, k);
}

AgentProbe probe_agent(const AgentProfile& profile, const std::vector<CaseRecord>& cases, int k,
                       QualityMetric metric, Agent* judge) {
    check_inputs(cases, k, metric, judge);
    std::vector<CaseProbe> per_case;
    for (const auto& c : cases) {
        auto agent = open_session(profile, c.case_id);
        per_case.push_back(probe_case(*agent, c, k, metric, judge));
    }
    return summarize(profile.id, per_case, k);
}

PairSelection select_pair(const std::vector<AgentProbe>& probes, double quality_epsilon) {
    if (probes.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "pair selection needs at least two probes");
    }
    std::set<std::string> ids;
    for (const auto& p : probes) {
        if (!ids.insert(p.agent_id).second) {
            throw Error(ErrorCode::InvalidArgument, "duplicate probe id '" + p.agent_id + "'");
        }
    }
    std::optional<PairSelection> best;
    std::pair<std::string, std::string> best_key;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        for (std::size_t j = i + 1; j < probes.size(); ++j) {
            const AgentProbe& x = probes[i];
            const AgentProbe& y = probes[j];
            const double quality_diff = std::abs(x.mean_quality - y.mean_quality);
            if (quality_diff > quality_epsilon + 1e-12) {
                continue;
            }
            const double gap = std::abs(x.mean_entropy - y.mean_entropy);
            auto key = std::minmax(x.agent_id, y.agent_id);
            std::pair<std::string, std::string> ordered{key.first, key.second};
            const bool better = !best || gap > best->entropy_gap + kGapTieTolerance ||
                                (std::abs(gap - best->entropy_gap) <= kGapTieTolerance &&
                                 ordered < best_key);
            if (!better) {
                continue;
            }
            const bool x_high = x.mean_entropy > y.mean_entropy ||
                                (x.mean_entropy == y.mean_entropy && x.agent_id < y.agent_id);
            const AgentProbe& high = x_high ? x : y;
            const AgentProbe& low = x_high ? y : x;
            best = PairSelection{high.agent_id, low.agent_id, gap, quality_diff};
            best_key = std::move(ordered);
        }
    }
    if (!best) {
        throw Error(ErrorCode::NoEligiblePair,
                    "no pair of agents has qualities within " + std::to_string(quality_epsilon));
    }
    return *best;
}

void to_json(nlohmann::json& j, const AgentProbe& p) {
    j = {{"agent_id", p.agent_id},
         {"mean_entropy", p.mean_entropy},
         {"mean_quality", p.mean_quality},
         {"probe_k", p.probe_k},
         {"cases_used", p.cases_used}};
}

void to_json(nlohmann::json& j, const PairSelection& s) {
    j = {{"high_entropy", s.high_entropy_id},
         {"low_entropy", s.low_entropy_id},
         {"entropy_gap", s.entropy_gap},
         {"quality_difference", s.quality_difference}};
}

}  // namespace evince::pairing
