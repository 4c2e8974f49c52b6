// SPDX-License-Identifier: Apache-2.0

#include "evince/debate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>

namespace evince::debate {

namespace {

std::string iso_time(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double turn_entropy(const AgentResponse& r) { return shannon_entropy(normalize(r.predictions)); }

std::set<Label> top3_labels(const PredictionSet& p) {
    std::set<Label> out;
    const auto ranked = p.ranked();
    for (std::size_t i = 0; i < ranked.size() && i < 3; ++i) {
        out.insert(ranked[i].first);
    }
    return out;
}

/// Sequential state of one debate: the transcript plus the shared history
/// every prompt replays.
class Session {
public:
    Session(const CaseRecord& c, Agent& a, Agent& b, const DebateConfig& config,
            const DebateOptions& options)
        : case_(c), a_(a), b_(b), config_(config), options_(options) {
        t_.case_id = c.case_id;
        t_.symptoms = c.symptoms;
        t_.truth = c.truth.str();
        t_.agent_a = a.id();
        t_.agent_b = b.id();
        t_.started = std::chrono::system_clock::now();
    }

    DebateTranscript run() {
        try {
            opening();
            const std::size_t max_rounds = static_cast<std::size_t>(config_.max_rounds);
            bool agreed = false;
            while (!agreed && t_.rounds.size() < max_rounds) {
                agreed = debate_round();
            }
            finale();
            score_rounds();
        } catch (const Error& e) {
            t_.error = e.what();
            t_.joint_recommendation.reset();
            t_.finished = std::chrono::system_clock::now();
            throw DebateError(e, std::move(t_));
        }
        t_.finished = std::chrono::system_clock::now();
        return std::move(t_);
    }

private:
    PromptContext context(Role role, double delta, int k, bool final_round) const {
        PromptContext ctx;
        ctx.symptoms = case_.symptoms;
        ctx.history = history_;
        ctx.role = role;
        ctx.contentiousness = delta;
        ctx.requested_k = k;
        ctx.final_round = final_round;
        ctx.candidate_labels = options_.candidate_labels;
        return ctx;
    }

    AgentResponse ask(Agent& agent, const std::string& prompt) {
        AgentResponse r = agent.query(prompt);
        history_.push_back({agent.id(), r});
        return r;
    }

    DebateRound& push_round(double delta, AgentResponse a, AgentResponse b, bool finale) {
        DebateRound round;
        round.index = t_.rounds.size() + 1;
        round.delta = delta;
        round.entropy_a = turn_entropy(a);
        round.entropy_b = turn_entropy(b);
        round.turn_a = std::move(a);
        round.turn_b = std::move(b);
        round.finale = finale;
        t_.rounds.push_back(std::move(round));
        return t_.rounds.back();
    }

    void opening() {
        const double delta = config_.delta_schedule.front();
        // Both answer the same moderator prompt independently; history starts
        // only once both openings are in.
        const std::string prompt =
            render_opening_prompt(context(Role::Proponent, delta, config_.requested_k, false));
        AgentResponse a = a_.query(prompt);
        AgentResponse b = b_.query(prompt);
        history_.push_back({a_.id(), a});
        history_.push_back({b_.id(), b});
        t_.roles = assign_roles(a, b);
        push_round(delta, std::move(a), std::move(b), false);
    }

    bool debate_round() {
        const std::size_t r = t_.rounds.size();
        const double delta = config_.delta_schedule[std::min(r, config_.delta_schedule.size() - 1)];
        const AgentResponse& b_last = t_.rounds.back().turn_b;
        AgentResponse a = ask(a_, render_debate_prompt(
                                      context(t_.roles.first, delta, config_.requested_k, false), b_last));
        AgentResponse b = ask(b_, render_debate_prompt(
                                      context(t_.roles.second, delta, config_.requested_k, false), a));
        DebateRound& round = push_round(delta, std::move(a), std::move(b), false);
        round.consensus_reached = detect_consensus(round, config_.consensus_tolerance);
        return round.consensus_reached;
    }

    void finale() {
        const double delta = config_.delta_schedule.back();
        const AgentResponse& b_last = t_.rounds.back().turn_b;
        AgentResponse a = ask(a_, render_debate_prompt(
                                      context(Role::Conciliatory, delta, config_.final_round_k, true), b_last));
        AgentResponse b = ask(b_, render_debate_prompt(
                                      context(Role::Conciliatory, delta, config_.final_round_k, true), a));
        std::string joint = a_.id() + ":\n" + a.raw_text + "\n\n" + b_.id() + ":\n" + b.raw_text;
        push_round(delta, std::move(a), std::move(b), true);
        t_.joint_recommendation = std::move(joint);
    }

    void score_rounds() {
        std::vector<std::vector<ara::WeightedForecast>> forecasts;
        for (auto& round : t_.rounds) {
            double conf_a = 1.0;
            double conf_b = 1.0;
            if (options_.judge != nullptr) {
                round.crit_a = crit::crit(*options_.judge,
                                          crit::extract_document(round.turn_a, &round.turn_b, t_.agent_a, round.index),
                                          options_.crit_depth);
                round.crit_b = crit::crit(*options_.judge,
                                          crit::extract_document(round.turn_b, &round.turn_a, t_.agent_b, round.index),
                                          options_.crit_depth);
                conf_a = round.crit_a->gamma_total;
                conf_b = round.crit_b->gamma_total;
                if (conf_a + conf_b <= 0.0) {
                    conf_a = conf_b = 1.0;
                }
            }
            std::vector<ara::WeightedForecast> pair{
                {t_.agent_a, normalize(round.turn_a.predictions), conf_a},
                {t_.agent_b, normalize(round.turn_b.predictions), conf_b}};
            round.aggregate = ara::aggregate_round(pair);
            forecasts.push_back(std::move(pair));
        }
        ara::AraResult result = ara::run_ara(forecasts, ara::structures_from_rounds(forecasts), options_.ara);
        t_.final_aggregate = std::move(result.final_aggregate);
        t_.regret = result.report;
        t_.ara_trace = std::move(result.trace);
    }

    const CaseRecord& case_;
    Agent& a_;
    Agent& b_;
    const DebateConfig& config_;
    const DebateOptions& options_;
    DebateTranscript t_;
    std::vector<HistoryTurn> history_;
};

}  // namespace

void DebateConfig::validate() const {
    if (delta_schedule.empty()) {
        throw Error(ErrorCode::Config, "delta schedule is empty");
    }
    for (std::size_t i = 0; i < delta_schedule.size(); ++i) {
        const double d = delta_schedule[i];
        if (!(d >= 0.0 && d <= 1.0)) {
            throw Error(ErrorCode::Config, "delta schedule values must lie in [0,1]");
        }
        if (i > 0 && !(d < delta_schedule[i - 1])) {
            throw Error(ErrorCode::Config, "delta schedule must be strictly descending");
        }
    }
    if (!(delta_schedule.back() < 0.10)) {
        throw Error(ErrorCode::Config, "delta schedule must end below 0.10");
    }
    if (max_rounds < 1 || static_cast<std::size_t>(max_rounds) < delta_schedule.size()) {
        throw Error(ErrorCode::Config, "max_rounds must be at least the schedule length");
    }
    if (!(consensus_tolerance >= 0.0 && consensus_tolerance <= 1.0)) {
        throw Error(ErrorCode::Config, "consensus tolerance must lie in [0,1]");
    }
    if (requested_k < 1 || requested_k > 10 || final_round_k < 1 || final_round_k > 10) {
        throw Error(ErrorCode::Config, "requested_k and final_round_k must lie in [1,10]");
    }
}

void to_json(nlohmann::json& j, const DebateConfig& c) {
    j = {{"delta_schedule", c.delta_schedule},
         {"max_rounds", c.max_rounds},
         {"consensus_tolerance", c.consensus_tolerance},
         {"requested_k", c.requested_k},
         {"final_round_k", c.final_round_k}};
}

void from_json(const nlohmann::json& j, DebateConfig& c) {
    c = DebateConfig{};
    c.delta_schedule = j.value("delta_schedule", c.delta_schedule);
    c.max_rounds = j.value("max_rounds", c.max_rounds);
    c.consensus_tolerance = j.value("consensus_tolerance", c.consensus_tolerance);
    c.requested_k = j.value("requested_k", c.requested_k);
    c.final_round_k = j.value("final_round_k", c.final_round_k);
}

std::string DebateError::strip_prefix(const Error& e) {
    const std::string what = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

std::pair<Role, Role> assign_roles(const AgentResponse& opening_a, const AgentResponse& opening_b) {
    if (opening_a.predictions.empty() || opening_b.predictions.empty()) {
        return {Role::Proponent, Role::Proponent};
    }
    const Label top_a = opening_a.predictions.ranked().front().first;
    const Label top_b = opening_b.predictions.ranked().front().first;
    if (top_a == top_b) {
        return {Role::Proponent, Role::DevilsAdvocate};
    }
    return {Role::Proponent, Role::Proponent};
}

bool detect_consensus(const PredictionSet& a, const PredictionSet& b, double tolerance) {
    if (a.empty() || b.empty() || top3_labels(a) != top3_labels(b)) {
        return false;
    }
    std::set<Label> labels;
    for (const auto& [l, _] : a.masses()) {
        labels.insert(l);
    }
    for (const auto& [l, _] : b.masses()) {
        labels.insert(l);
    }
    for (const auto& l : labels) {
        if (std::abs(a.mass(l) - b.mass(l)) > tolerance + 1e-9) {
            return false;
        }
    }
    return true;
}

bool detect_consensus(const DebateRound& round, double tolerance) {
    return detect_consensus(round.turn_a.predictions, round.turn_b.predictions, tolerance);
}

DebateTranscript run_debate(const CaseRecord& c, Agent& agent_a, Agent& agent_b,
                            const DebateConfig& config, const DebateOptions& options) {
    config.validate();
    if (&agent_a == &agent_b || agent_a.id() == agent_b.id()) {
        throw Error(ErrorCode::InvalidArgument, "a debate needs two distinct agents");
    }
    if (c.symptoms.empty()) {
        throw Error(ErrorCode::EmptySymptoms, "case '" + c.case_id + "' has no symptoms");
    }
    return Session(c, agent_a, agent_b, config, options).run();
}

DebateTranscript run_debate(const CaseRecord& c, const AgentProfile& agent_a,
                            const AgentProfile& agent_b, const DebateConfig& config,
                            const DebateOptions& options) {
    if (agent_a.id == agent_b.id) {
        throw Error(ErrorCode::InvalidArgument, "a debate needs two distinct agents");
    }
    config.validate();
    auto a = open_session(agent_a, c.case_id);
    auto b = open_session(agent_b, c.case_id);
    return run_debate(c, *a, *b, config, options);
}

std::vector<EntropyPoint> entropy_trajectory(const DebateTranscript& t) {
    std::vector<EntropyPoint> out;
    out.reserve(t.rounds.size());
    for (const auto& r : t.rounds) {
        out.push_back({r.index, r.entropy_a, r.entropy_b, r.delta});
    }
    return out;
}

void write_entropy_csv(std::ostream& out, const std::vector<EntropyPoint>& series) {
    out << "round,entropy_a,entropy_b,delta\n" << std::setprecision(10);
    for (const auto& p : series) {
        out << p.round << ',' << p.entropy_a << ',' << p.entropy_b << ',' << p.delta << '\n';
    }
}

void to_json(nlohmann::json& j, const DebateTranscript& t) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r : t.rounds) {
        nlohmann::json jr = {{"index", r.index},
                             {"delta", r.delta},
                             {"finale", r.finale},
                             {"turn_a", r.turn_a},
                             {"turn_b", r.turn_b},
                             {"entropy_a", r.entropy_a},
                             {"entropy_b", r.entropy_b},
                             {"consensus_reached", r.consensus_reached},
                             {"aggregate", r.aggregate}};
        if (r.crit_a) {
            jr["crit_a"] = *r.crit_a;
        }
        if (r.crit_b) {
            jr["crit_b"] = *r.crit_b;
        }
        rounds.push_back(std::move(jr));
    }
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& row : t.ara_trace) {
        trace.push_back({{"round", row.round},
                         {"label", row.label},
                         {"aggregate_mass", row.aggregate_mass},
                         {"best_theta_id", row.best_theta_id},
                         {"cumulative_regret", row.cumulative_regret}});
    }
    j = {{"case_id", t.case_id},
         {"symptoms", t.symptoms},
         {"truth", t.truth},
         {"agent_a", t.agent_a},
         {"agent_b", t.agent_b},
         {"roles", {to_string(t.roles.first), to_string(t.roles.second)}},
         {"rounds", std::move(rounds)},
         {"joint_recommendation",
          t.joint_recommendation ? nlohmann::json(*t.joint_recommendation) : nlohmann::json(nullptr)},
         {"final_aggregate", t.final_aggregate},
         {"ara_trace", std::move(trace)},
         {"completed", t.completed()},
         {"error", t.error ? nlohmann::json(*t.error) : nlohmann::json(nullptr)},
         {"metadata", {{"started", iso_time(t.started)}, {"finished", iso_time(t.finished)}}}};
    if (t.regret) {
        j["regret"] = {{"best_theta_id", t.regret->best_theta_id},
                       {"hindsight_total", t.regret->hindsight_total},
                       {"achieved_total", t.regret->achieved_total},
                       {"regret", t.regret->regret}};
    }
}

}  // namespace evince::debate
