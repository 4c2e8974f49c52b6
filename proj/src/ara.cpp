// SPDX-License-Identifier: Apache-2.0

#include "evince/ara.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "evince/error.hpp"

namespace evince::ara {

PredictionSet aggregate_round(const std::vector<WeightedForecast>& forecasts) {
    if (forecasts.empty()) {
        throw Error(ErrorCode::InvalidArgument, "aggregate_round needs at least one forecast");
    }
    double total_confidence = 0.0;
    for (const auto& f : forecasts) {
        if (!(f.confidence >= 0.0 && f.confidence <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument,
                        "confidence of '" + f.source + "' outside [0,1]");
        }
        total_confidence += f.confidence;
    }
    if (total_confidence <= 0.0) {
        throw Error(ErrorCode::ZeroTotalConfidence, "forecast confidences sum to zero");
    }
    std::map<Label, double> weighted;
    for (const auto& f : forecasts) {
        for (const auto& [label, m] : f.predictions.masses()) {
            weighted[label] += f.confidence * m;
        }
    }
    for (auto& [_, m] : weighted) {
        m /= total_confidence;
    }
    return PredictionSet(std::move(weighted));
}

namespace {

PredictionSet as_distribution(const PredictionSet& p) {
    return p.is_normalized() ? p : normalize(p);
}

double hellinger_reward(const InformationStructure& theta, const PredictionSet& aggregate) {
    const PredictionSet a = theta.dist.to_prediction_set();
    const PredictionSet b = as_distribution(aggregate);
    double bc = 0.0;  // Bhattacharyya coefficient
    for (const auto& [label, m] : a.masses()) {
        bc += std::sqrt(m * b.mass(label));
    }
    return 1.0 - std::sqrt(std::max(0.0, 1.0 - bc));
}

}  // namespace

double reward(const InformationStructure& theta, const PredictionSet& aggregate) {
    return 1.0 - total_variation(theta.dist.to_prediction_set(), as_distribution(aggregate));
}

RewardFn reward_function(std::string_view name) {
    if (name == "tvd") {
        return &reward;
    }
    if (name == "hellinger") {
        return &hellinger_reward;
    }
    throw Error(ErrorCode::Config, "unknown reward function '" + std::string(name) + "'");
}

AggregateState::AggregateState(std::vector<InformationStructure> structures, AraConfig config)
    : structures_(std::move(structures)),
      config_(std::move(config)),
      reward_(reward_function(config_.reward)),
      cumulative_(structures_.size(), 0.0) {
    if (structures_.empty()) {
        throw Error(ErrorCode::EmptyHistory, "the set of information structures is empty");
    }
}

std::vector<std::vector<double>> AggregateState::reward_history() const {
    std::vector<std::vector<double>> out;
    out.reserve(rounds_.size());
    for (const auto& r : rounds_) {
        out.push_back(r.rewards);
    }
    return out;
}

std::vector<double> AggregateState::achieved_history() const {
    std::vector<double> out;
    out.reserve(rounds_.size());
    for (const auto& r : rounds_) {
        out.push_back(r.achieved);
    }
    return out;
}

std::vector<double> AggregateState::next_play() const {
    const std::size_t n = structures_.size();
    if (n == 1) {
        return {1.0};
    }
    const double round = static_cast<double>(rounds_.size() + 1);
    const double eta = config_.learning_rate.value_or(std::sqrt(8.0 * std::log(n) / round));
    const double top = *std::max_element(cumulative_.begin(), cumulative_.end());
    std::vector<double> play(n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        play[i] = std::exp(eta * (cumulative_[i] - top));
        z += play[i];
    }
    for (double& w : play) {
        w /= z;
    }
    return play;
}

AggregateState propagate(const AggregateState& state,
                         const std::vector<WeightedForecast>& round_forecasts) {
    AggregateState next = state;
    RoundRecord rec;
    rec.forecasts = round_forecasts;
    rec.aggregate = aggregate_round(round_forecasts);
    rec.normalized_aggregate = as_distribution(rec.aggregate);
    rec.play = state.next_play();
    rec.rewards.reserve(state.structures_.size());
    for (const auto& theta : state.structures_) {
        rec.rewards.push_back(state.reward_(theta, rec.normalized_aggregate));
    }
    for (std::size_t i = 0; i < rec.rewards.size(); ++i) {
        rec.achieved += rec.play[i] * rec.rewards[i];
        next.cumulative_[i] += rec.rewards[i];
    }
    rec.best_response_id = state.structures_[best_response(rec.rewards)].id;
    next.rounds_.push_back(std::move(rec));
    return next;
}

std::size_t best_response(const std::vector<double>& rewards) {
    if (rewards.empty()) {
        throw Error(ErrorCode::InvalidArgument, "best response over an empty reward vector");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < rewards.size(); ++i) {
        if (rewards[i] > rewards[best]) {
            best = i;
        }
    }
    return best;
}

RegretReport regret(const std::vector<std::vector<double>>& reward_history,
                    const std::vector<double>& achieved, const std::vector<int>& ids) {
    if (reward_history.empty() || reward_history.front().empty()) {
        throw Error(ErrorCode::EmptyHistory, "regret needs at least one round and one structure");
    }
    if (achieved.size() != reward_history.size()) {
        throw Error(ErrorCode::InvalidArgument, "achieved rewards do not align with the rounds");
    }
    const std::size_t n = reward_history.front().size();
    if (!ids.empty() && ids.size() != n) {
        throw Error(ErrorCode::InvalidArgument, "structure ids do not align with the rewards");
    }
    std::vector<double> totals(n, 0.0);
    for (const auto& u : reward_history) {
        if (u.size() != n) {
            throw Error(ErrorCode::InvalidArgument, "reward vectors cover different structure sets");
        }
        for (std::size_t i = 0; i < n; ++i) {
            totals[i] += u[i];
        }
    }
    const std::size_t best = best_response(totals);
    RegretReport report;
    report.best_theta_id = ids.empty() ? static_cast<int>(best) + 1 : ids[best];
    report.hindsight_total = totals[best];
    for (double a : achieved) {
        report.achieved_total += a;
    }
    report.regret = report.hindsight_total - report.achieved_total;
    return report;
}

AraResult run_ara(const std::vector<std::vector<WeightedForecast>>& rounds,
                  std::vector<InformationStructure> structures, AraConfig config) {
    if (rounds.empty()) {
        throw Error(ErrorCode::EmptyHistory, "run_ara needs at least one round");
    }
    std::vector<int> ids;
    ids.reserve(structures.size());
    for (const auto& s : structures) {
        ids.push_back(s.id);
    }
    AggregateState state(std::move(structures), std::move(config));
    std::vector<TraceRow> trace;
    for (const auto& forecasts : rounds) {
        state = propagate(state, forecasts);
        const RoundRecord& rec = state.rounds().back();
        const RegretReport so_far = regret(state.reward_history(), state.achieved_history(), ids);
        for (const auto& [label, m] : rec.aggregate.masses()) {
            trace.push_back({state.t(), label.str(), m, rec.best_response_id, so_far.regret});
        }
    }
    AraResult result{state.rounds().back().normalized_aggregate,
                     regret(state.reward_history(), state.achieved_history(), ids),
                     std::move(trace), state};
    return result;
}

std::vector<InformationStructure> structures_from_rounds(
    const std::vector<std::vector<WeightedForecast>>& rounds) {
    std::vector<InformationStructure> out;
    for (const auto& forecasts : rounds) {
        DiscreteDist d = discretize(normalize(aggregate_round(forecasts)));
        const bool seen = std::any_of(out.begin(), out.end(),
                                      [&](const InformationStructure& s) { return s.dist.bins == d.bins; });
        if (!seen) {
            out.push_back({static_cast<int>(out.size()) + 1, std::move(d)});
        }
    }
    return out;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
    out << "round,label,aggregate_mass,best_theta_id,cumulative_regret\n";
    out << std::setprecision(10);
    for (const auto& row : trace) {
        std::string label = row.label;
        if (label.find_first_of(",\"") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : label) {
                quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
            }
            label = quoted + "\"";
        }
        out << row.round << ',' << label << ',' << row.aggregate_mass << ','
            << row.best_theta_id << ',' << row.cumulative_regret << '\n';
    }
}

}  // namespace evince::ara
