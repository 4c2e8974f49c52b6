// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "evince/agents.hpp"

namespace evince::crit {

struct ArgumentDocument {
    std::string claim;                 // the prediction set, rendered as text
    std::vector<std::string> reasons;  // supporting arguments
    std::vector<std::string> rivals;   // the opponent's counterarguments
    std::string source_agent;
    std::size_t round_index = 0;
};

struct ReasonScore {
    double gamma = 0.0;  // validity of reason => claim, in [0,1]
    double theta = 0.0;  // source credibility, in [0,1]
    std::string rationale;
};

struct CritReport {
    ArgumentDocument document;
    std::vector<ReasonScore> reason_scores;
    std::vector<ReasonScore> rival_scores;
    double gamma_total = 0.5;
    int depth_used = 0;
};

enum class Stance { Supporting, Rival };

inline constexpr std::string_view kJudgeTemplateVersion = "crit-judge-v1";

/// Splits a justification into reasons: list items when the text has a
/// bullet or numbered list, else "First, ... Second, ..." segments, else
/// one reason per paragraph.
std::vector<std::string> split_reasons(std::string_view justification);

ArgumentDocument extract_document(const AgentResponse& turn, const AgentResponse* opponent_turn,
                                  std::string source_agent = {}, std::size_t round_index = 0);

std::string render_judge_prompt(std::string_view reason, std::string_view claim, Stance stance);

/// Reads "validity N" and "credibility M" (0-10 integers) from judge text,
/// falling back to the first two integers. Throws ParseFailure otherwise.
ReasonScore parse_judge_scores(std::string_view text);

ReasonScore score_reason(Agent& judge, std::string_view reason, std::string_view claim,
                         Stance stance = Stance::Supporting);

/// support / (support + rival) over the gamma*theta products, clamped to
/// [0,1]; 0.5 when both sums are zero.
double combine(const std::vector<ReasonScore>& reasons, const std::vector<ReasonScore>& rivals);

/// Scores every reason and rival with `judge` and combines them. With
/// depth_limit > 0 a multi-sentence reason is scored as its own
/// sub-document whose sentences are its reasons.
CritReport crit(Agent& judge, const ArgumentDocument& doc, int depth_limit = 0);

void to_json(nlohmann::json& j, const ReasonScore& s);
void to_json(nlohmann::json& j, const ArgumentDocument& d);
void to_json(nlohmann::json& j, const CritReport& r);

}  // namespace evince::crit
