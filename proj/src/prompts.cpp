// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "evince/agents.hpp"
#include "evince/error.hpp"

namespace evince {

namespace {

const std::array<std::string_view, 11> kNumberWords = {
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"};

std::string number_word(int k) {
    if (k >= 0 && k < static_cast<int>(kNumberWords.size())) {
        return std::string(kNumberWords[static_cast<std::size_t>(k)]);
    }
    return std::to_string(k);
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i != 0) {
            out += sep;
        }
        out += items[i];
    }
    return out;
}

void write_answer_format(std::ostringstream& out, int k, bool final_round) {
    out << "List your top-" << k
        << " predictions one per line in the form \"- Disease: NN%\", each followed by "
           "its justification.\n";
    if (final_round) {
        out << "Then list follow-up questions to ask the patient and the lab tests that "
               "would confirm or rule out the leading diagnoses.\n";
    }
}

void write_candidates(std::ostringstream& out, const PromptContext& ctx) {
    if (!ctx.candidate_labels.empty()) {
        out << "Choose only among these candidate diseases: " << join(ctx.candidate_labels, ", ")
            << ".\n";
    }
}

}  // namespace

const std::vector<ContentiousnessLevel>& contentiousness_levels() {
    static const std::vector<ContentiousnessLevel> levels = {
        {0.9,
         "Adversarial. Attack the opposing diagnosis on clinical grounds and press every "
         "objection hard.",
         "What the opponent got wrong: unexplained symptoms, differentials left out and the "
         "harm a misdiagnosis would cause.",
         "Blunt and categorical, e.g. \"the evidence does not support this\", \"this "
         "diagnosis is a mistake\"."},
        {0.7,
         "Critical. Concede points the opponent earned, but keep the weaknesses in front.",
         "Name the findings that favour the opponent, then explain why they are not yet "
         "enough.",
         "Firm but measured, e.g. \"I still doubt this\", \"that claim needs support\"."},
        {0.5,
         "Even-handed. Weigh both positions without taking a side by default.",
         "Findings for and against each candidate, given equal attention.",
         "Neutral, e.g. \"on balance\", \"the findings point both ways\"."},
        {0.3,
         "Cooperative. Lean toward agreement while keeping specific doubts on record.",
         "Narrowing the remaining disagreements and what would resolve them.",
         "Constructive, e.g. \"that is reasonable\", \"a test could settle this\"."},
        {0.0,
         "Collaborative. Fully aligned with the opponent.",
         "Merging both analyses into one diagnosis and a plan for next steps.",
         "Warm and conclusive, e.g. \"we agree\", \"our joint assessment\"."},
    };
    return levels;
}

const ContentiousnessLevel& nearest_contentiousness(double delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "contentiousness outside [0,1]");
    }
    const auto& levels = contentiousness_levels();
    const ContentiousnessLevel* best = &levels.front();
    double best_distance = std::abs(delta - best->level);
    // Rows are ordered most contentious first, so a strict improvement test
    // keeps the more contentious row on an exact tie.
    for (const auto& row : levels) {
        const double d = std::abs(delta - row.level);
        if (d < best_distance - 1e-12) {
            best = &row;
            best_distance = d;
        }
    }
    return *best;
}

std::string format_percent(double mass) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", mass * 100.0);
    std::string s(buf);
    while (!s.empty() && s.back() == '0') {
        s.pop_back();
    }
    if (!s.empty() && s.back() == '.') {
        s.pop_back();
    }
    return s + "%";
}

std::string format_predictions(const PredictionSet& p) {
    std::vector<std::string> parts;
    for (const auto& [label, m] : p.ranked()) {
        parts.push_back(label.str() + " (" + format_percent(m) + ")");
    }
    return join(parts, ", ");
}

std::string render_opening_prompt(const PromptContext& ctx) {
    if (ctx.symptoms.empty()) {
        throw Error(ErrorCode::EmptySymptoms, "opening prompt needs at least one symptom");
    }
    if (ctx.requested_k < 1) {
        throw Error(ErrorCode::InvalidArgument, "requested k must be >= 1");
    }
    std::ostringstream out;
    out << "A patient presents with these symptoms: " << join(ctx.symptoms, ", ") << ".\n";
    out << "Give your top-" << number_word(ctx.requested_k)
        << " candidate diseases with probabilities that sum to one, and justify each.\n";
    write_candidates(out, ctx);
    write_answer_format(out, ctx.requested_k, ctx.final_round);
    return out.str();
}

std::string render_debate_prompt(const PromptContext& ctx, const AgentResponse& opponent_turn) {
    const ContentiousnessLevel& level = nearest_contentiousness(ctx.contentiousness);
    std::ostringstream out;
    out << "Symptoms under discussion: " << join(ctx.symptoms, ", ") << ".\n\n";

    if (!ctx.history.empty()) {
        out << "Debate so far:\n";
        for (std::size_t i = 0; i < ctx.history.size(); ++i) {
            const auto& turn = ctx.history[i];
            out << "  " << (i + 1) << ". " << turn.agent_id << ": "
                << format_predictions(turn.response.predictions) << "\n";
        }
        out << "\n";
    }

    char delta_buf[16];
    std::snprintf(delta_buf, sizeof(delta_buf), "%.2f", ctx.contentiousness);
    out << "Contentiousness level: " << delta_buf << "\n";
    out << "Tone: " << level.tone << "\n";
    out << "Emphasis: " << level.emphasis << "\n";
    out << "Language: " << level.language << "\n\n";

    out << "Your opponent predicted: " << format_predictions(opponent_turn.predictions) << "\n";
    out << "Your opponent's justification:\n" << opponent_turn.justification << "\n\n";

    switch (ctx.role) {
        case Role::Proponent:
            out << "Defend your diagnosis where your reasoning is stronger, counter the "
                   "opponent's arguments point by point, and revise your probabilities only "
                   "where their arguments are convincing.\n";
            break;
        case Role::DevilsAdvocate:
            out << "You share your opponent's top diagnosis. Argue against it anyway: look "
                   "for alternative diseases and for gaps in the opponent's reasoning.\n";
            break;
        case Role::Conciliatory:
            out << "This is the closing turn. Settle the remaining differences with your "
                   "opponent and state the diagnosis you both endorse, with reasons.\n";
            break;
    }
    out << "Please offer your updated top-" << number_word(ctx.requested_k)
        << " candidate diseases with probabilities that sum to one.\n";
    write_candidates(out, ctx);
    write_answer_format(out, ctx.requested_k, ctx.final_round);
    return out.str();
}

}  // namespace evince
