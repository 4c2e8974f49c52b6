// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "evince/probdist.hpp"

namespace evince::ara {

/// A candidate distribution nature may play. Ids are 1-based and define the
/// tiebreak order for best responses.
struct InformationStructure {
    int id = 0;
    DiscreteDist dist;
};

struct WeightedForecast {
    std::string source;
    PredictionSet predictions;
    double confidence = 1.0;
};

/// mass(label) = sum_i conf_i * p_i(label) / sum_i conf_i. The result is not
/// renormalized, so inputs that do not sum to one give an unnormalized set.
PredictionSet aggregate_round(const std::vector<WeightedForecast>& forecasts);

using RewardFn = std::function<double(const InformationStructure&, const PredictionSet&)>;

/// 1 - total-variation distance between theta and the normalized aggregate.
double reward(const InformationStructure& theta, const PredictionSet& aggregate);

/// "tvd" (the default, same as reward()) or "hellinger" (1 - Hellinger distance).
RewardFn reward_function(std::string_view name);

struct AraConfig {
    std::string reward = "tvd";
    /// Fixed Hedge learning rate; unset means the anytime schedule sqrt(8 ln N / t).
    std::optional<double> learning_rate;
};

struct RoundRecord {
    std::vector<WeightedForecast> forecasts;
    PredictionSet aggregate;             // as produced by aggregate_round
    PredictionSet normalized_aggregate;  // explicit normalize() of the above
    std::vector<double> rewards;         // u_t over the structures, in structure order
    std::vector<double> play;            // aggregator's weights over the structures
    double achieved = 0.0;               // play . rewards
    int best_response_id = 0;
};

/// Round-to-round aggregation state: w_t history, reward vectors u_t and the
/// aggregator's Hedge weights over the candidate structures.
class AggregateState {
public:
    explicit AggregateState(std::vector<InformationStructure> structures, AraConfig config = {});

    std::size_t t() const noexcept { return rounds_.size(); }
    const std::vector<RoundRecord>& rounds() const noexcept { return rounds_; }
    const std::vector<InformationStructure>& structures() const noexcept { return structures_; }
    const AraConfig& config() const noexcept { return config_; }

    std::vector<std::vector<double>> reward_history() const;
    std::vector<double> achieved_history() const;

    /// Weights the aggregator commits to before seeing the next round's rewards.
    std::vector<double> next_play() const;

private:
    friend AggregateState propagate(const AggregateState&, const std::vector<WeightedForecast>&);

    std::vector<InformationStructure> structures_;
    AraConfig config_;
    RewardFn reward_;
    std::vector<RoundRecord> rounds_;
    std::vector<double> cumulative_;
};

AggregateState propagate(const AggregateState& state,
                         const std::vector<WeightedForecast>& round_forecasts);

struct RegretReport {
    int best_theta_id = 0;
    double hindsight_total = 0.0;
    double achieved_total = 0.0;
    double regret = 0.0;
};

/// Exhaustive hindsight enumeration: max over structures of summed rewards,
/// minus the achieved total. `ids` defaults to 1..N.
RegretReport regret(const std::vector<std::vector<double>>& reward_history,
                    const std::vector<double>& achieved, const std::vector<int>& ids = {});

/// Index of the largest reward; the lowest index wins ties.
std::size_t best_response(const std::vector<double>& rewards);

struct TraceRow {
    std::size_t round = 0;
    std::string label;
    double aggregate_mass = 0.0;
    int best_theta_id = 0;
    double cumulative_regret = 0.0;
};

struct AraResult {
    PredictionSet final_aggregate;  // normalized w_T
    RegretReport report;
    std::vector<TraceRow> trace;
    AggregateState state;
};

AraResult run_ara(const std::vector<std::vector<WeightedForecast>>& rounds,
                  std::vector<InformationStructure> structures, AraConfig config = {});

/// Discretized per-round aggregates, duplicates removed, ids 1..N.
std::vector<InformationStructure> structures_from_rounds(
    const std::vector<std::vector<WeightedForecast>>& rounds);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

}  // namespace evince::ara
