// SPDX-License-Identifier: Apache-2.0

#include "evince/crit.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include "evince/error.hpp"

namespace evince::crit {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> lines_of(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        out.push_back(line);
    }
    return out;
}

std::vector<std::string> list_items(const std::vector<std::string>& lines) {
    static const std::regex item(R"(^\s*(?:[-*+]|\d+[.)]|\\item)\s+(.*)$)");
    static const std::string bullet = "\xE2\x80\xA2";
    std::vector<std::string> items;
    bool in_item = false;
    for (const auto& raw : lines) {
        std::string line = raw;
        const auto lead = line.find_first_not_of(" \t");
        if (lead != std::string::npos && line.compare(lead, bullet.size(), bullet) == 0) {
            line = "- " + line.substr(lead + bullet.size());
        }
        std::smatch m;
        if (std::regex_match(line, m, item)) {
            items.push_back(trim(m[1].str()));
            in_item = true;
        } else if (in_item && !trim(line).empty()) {
            items.back() += " " + trim(line);
        }
    }
    items.erase(std::remove_if(items.begin(), items.end(),
                               [](const std::string& s) { return s.empty(); }),
                items.end());
    return items;
}

std::vector<std::string> ordinal_segments(const std::string& text) {
    static const std::regex marker(
        R"((?:^|[.!?]\s+)((?:First|Firstly|Second|Secondly|Third|Thirdly|Fourth|Next|Finally|Lastly),\s))");
    std::vector<std::size_t> starts;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), marker);
         it != std::sregex_iterator(); ++it) {
        starts.push_back(static_cast<std::size_t>(it->position(1)));
    }
    if (starts.size() < 2) {
        return {};
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const std::size_t end = i + 1 < starts.size() ? starts[i + 1] : text.size();
        out.push_back(trim(std::string_view(text).substr(starts[i], end - starts[i])));
    }
    return out;
}

std::vector<std::string> paragraphs(const std::vector<std::string>& lines) {
    std::vector<std::string> out;
    std::string current;
    for (const auto& line : lines) {
        const std::string t = trim(line);
        if (t.empty()) {
            if (!current.empty()) {
                out.push_back(current);
                current.clear();
            }
            continue;
        }
        current += current.empty() ? t : " " + t;
    }
    if (!current.empty()) {
        out.push_back(current);
    }
    return out;
}

std::vector<std::string> sentences(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (std::size_t i = 0; i < text.size(); ++i) {
        current.push_back(text[i]);
        const bool end_mark = text[i] == '.' || text[i] == '!' || text[i] == '?';
        if (end_mark && (i + 1 == text.size() || text[i + 1] == ' ' || text[i + 1] == '\n')) {
            if (auto t = trim(current); !t.empty()) {
                out.push_back(std::move(t));
            }
            current.clear();
        }
    }
    if (auto t = trim(current); !t.empty()) {
        out.push_back(std::move(t));
    }
    return out;
}

std::string strip_scale_mentions(std::string_view text) {
    static const std::regex scale(R"(\(?\b0\s*(?:-|to|–)\s*10\b\)?|/\s*10\b|out of 10)",
                                  std::regex::icase);
    return std::regex_replace(std::string(text), scale, " ");
}

double to_unit(const std::string& digits, std::string_view text) {
    const int v = std::stoi(digits);
    if (v < 0 || v > 10) {
        throw Error(ErrorCode::ParseFailure, "judge score outside 0-10: " + digits,
                    std::string(text));
    }
    return v / 10.0;
}

}  // namespace

std::vector<std::string> split_reasons(std::string_view justification) {
    const auto lines = lines_of(justification);
    if (auto items = list_items(lines); !items.empty()) {
        return items;
    }
    const auto paras = paragraphs(lines);
    if (paras.size() == 1) {
        if (auto segments = ordinal_segments(paras.front()); !segments.empty()) {
            return segments;
        }
    }
    return paras;
}

ArgumentDocument extract_document(const AgentResponse& turn, const AgentResponse* opponent_turn,
                                  std::string source_agent, std::size_t round_index) {
    ArgumentDocument doc;
    doc.claim = "Top-" + std::to_string(turn.predictions.size()) +
                " predictions: " + format_predictions(turn.predictions);
    doc.reasons = split_reasons(turn.justification);
    if (doc.reasons.empty()) {
        doc.reasons.push_back(doc.claim);
    }
    if (opponent_turn != nullptr) {
        doc.rivals = split_reasons(opponent_turn->justification);
    }
    doc.source_agent = std::move(source_agent);
    doc.round_index = round_index;
    return doc;
}

std::string render_judge_prompt(std::string_view reason, std::string_view claim, Stance stance) {
    std::ostringstream out;
    out << "[" << kJudgeTemplateVersion << "]\n";
    out << "You are an independent reviewer assessing the reasoning quality of a diagnostic "
           "debate, not the facts alone.\n\n";
    out << "Claim: " << claim << "\n";
    if (stance == Stance::Supporting) {
        out << "Argument offered in support of the claim:\n" << reason << "\n\n";
        out << "Rate how validly this argument supports the claim, and how credible its "
               "sources and evidence are.\n";
    } else {
        out << "Counterargument raised against the claim:\n" << reason << "\n\n";
        out << "Rate how validly this counterargument undermines the claim, and how credible "
               "its sources and evidence are.\n";
    }
    out << "Answer with two integers on a 0-10 scale in the form "
           "\"validity N, credibility M\", followed by a one-paragraph rationale.\n";
    return out.str();
}

ReasonScore parse_judge_scores(std::string_view text) {
    const std::string cleaned = strip_scale_mentions(text);
    static const std::regex validity(R"(validity[^0-9\n]*?(\d+))", std::regex::icase);
    static const std::regex credibility(R"(credib\w*[^0-9\n]*?(\d+))", std::regex::icase);
    std::smatch v;
    std::smatch c;
    ReasonScore score;
    score.rationale = std::string(text);
    if (std::regex_search(cleaned, v, validity) && std::regex_search(cleaned, c, credibility)) {
        score.gamma = to_unit(v[1].str(), text);
        score.theta = to_unit(c[1].str(), text);
        return score;
    }
    static const std::regex integer(R"(\b(\d+)\b)");
    std::vector<std::string> found;
    for (auto it = std::sregex_iterator(cleaned.begin(), cleaned.end(), integer);
         it != std::sregex_iterator() && found.size() < 2; ++it) {
        found.push_back((*it)[1].str());
    }
    if (found.size() < 2) {
        throw Error(ErrorCode::ParseFailure, "judge reply lacks two 0-10 scores", std::string(text));
    }
    score.gamma = to_unit(found[0], text);
    score.theta = to_unit(found[1], text);
    return score;
}

ReasonScore score_reason(Agent& judge, std::string_view reason, std::string_view claim,
                         Stance stance) {
    return parse_judge_scores(judge.complete(render_judge_prompt(reason, claim, stance)));
}

double combine(const std::vector<ReasonScore>& reasons, const std::vector<ReasonScore>& rivals) {
    double support = 0.0;
    double rival = 0.0;
    for (const auto& s : reasons) {
        support += s.gamma * s.theta;
    }
    for (const auto& s : rivals) {
        rival += s.gamma * s.theta;
    }
    if (support + rival <= 0.0) {
        return 0.5;
    }
    return std::clamp(support / (support + rival), 0.0, 1.0);
}

CritReport crit(Agent& judge, const ArgumentDocument& doc, int depth_limit) {
    if (depth_limit < 0) {
        throw Error(ErrorCode::InvalidArgument, "depth limit must be >= 0");
    }
    CritReport report;
    report.document = doc;
    for (const auto& reason : doc.reasons) {
        auto parts = sentences(reason);
        if (depth_limit > 0 && parts.size() >= 2) {
            ArgumentDocument sub;
            sub.claim = reason;
            sub.reasons = std::move(parts);
            sub.source_agent = doc.source_agent;
            sub.round_index = doc.round_index;
            const CritReport nested = crit(judge, sub, depth_limit - 1);
            ReasonScore folded;
            for (const auto& s : nested.reason_scores) {
                folded.gamma += s.gamma;
                folded.theta += s.theta;
            }
            folded.gamma /= static_cast<double>(nested.reason_scores.size());
            folded.theta /= static_cast<double>(nested.reason_scores.size());
            folded.rationale = "mean over " + std::to_string(nested.reason_scores.size()) +
                               " sub-reasons";
            report.reason_scores.push_back(std::move(folded));
            report.depth_used = std::max(report.depth_used, nested.depth_used + 1);
        } else {
            report.reason_scores.push_back(score_reason(judge, reason, doc.claim, Stance::Supporting));
        }
    }
    for (const auto& rival : doc.rivals) {
        report.rival_scores.push_back(score_reason(judge, rival, doc.claim, Stance::Rival));
    }
    report.gamma_total = combine(report.reason_scores, report.rival_scores);
    return report;
}

void to_json(nlohmann::json& j, const ReasonScore& s) {
    j = {{"gamma", s.gamma}, {"theta", s.theta}, {"rationale", s.rationale}};
}

void to_json(nlohmann::json& j, const ArgumentDocument& d) {
    j = {{"claim", d.claim},
         {"reasons", d.reasons},
         {"rivals", d.rivals},
         {"source_agent", d.source_agent},
         {"round_index", d.round_index}};
}

void to_json(nlohmann::json& j, const CritReport& r) {
    j = {{"document", r.document},
         {"reason_scores", r.reason_scores},
         {"rival_scores", r.rival_scores},
         {"gamma_total", r.gamma_total},
         {"depth_used", r.depth_used},
         {"judge_template", kJudgeTemplateVersion}};
}

}  // namespace evince::crit
