// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "evince/agents.hpp"
#include "evince/error.hpp"
#include "support.hpp"

using namespace evince;
using evince::testing::fixture;
using evince::testing::TempDir;

namespace {

PromptContext opening_context(int k) {
    PromptContext ctx;
    ctx.symptoms = {"itching", "dark urine"};
    ctx.requested_k = k;
    return ctx;
}

}  // namespace

TEST(Prompts, OpeningListsSymptomsAndK) {
    const std::string p = render_opening_prompt(opening_context(5));
    EXPECT_NE(p.find("itching, dark urine"), std::string::npos);
    EXPECT_NE(p.find("top-five"), std::string::npos);
    EXPECT_NE(p.find("top-5 predictions"), std::string::npos);
    EXPECT_EQ(p.find("lab tests"), std::string::npos);

    const std::string p3 = render_opening_prompt(opening_context(3));
    EXPECT_NE(p3.find("top-3 predictions"), std::string::npos);
    EXPECT_NE(p3.find("top-three"), std::string::npos);
}

TEST(Prompts, OpeningRejectsEmptySymptoms) {
    PromptContext ctx;
    try {
        render_opening_prompt(ctx);
        FAIL() << "expected EmptySymptoms";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptySymptoms);
    }
}

TEST(Prompts, CandidateLabelsAreListed) {
    PromptContext ctx = opening_context(3);
    ctx.candidate_labels = {"dengue", "malaria"};
    EXPECT_NE(render_opening_prompt(ctx).find("dengue, malaria"), std::string::npos);
}

TEST(Prompts, DebatePromptCarriesHistoryToneAndRole) {
    PromptContext ctx = opening_context(5);
    AgentResponse opp;
    opp.predictions = PredictionSet{{"Hepatitis B", .6}, {"Hepatitis C", .4}};
    opp.justification = "serology pending";
    ctx.history.push_back({"gpt4", opp});
    ctx.contentiousness = 0.9;
    ctx.role = Role::DevilsAdvocate;
    const std::string p = render_debate_prompt(ctx, opp);
    EXPECT_NE(p.find("1. gpt4: hepatitis b (60%), hepatitis c (40%)"), std::string::npos);
    EXPECT_NE(p.find("Contentiousness level: 0.90"), std::string::npos);
    EXPECT_NE(p.find(std::string(contentiousness_levels().front().tone)), std::string::npos);
    EXPECT_NE(p.find("Argue against it anyway"), std::string::npos);
    EXPECT_NE(p.find("serology pending"), std::string::npos);

    ctx.role = Role::Conciliatory;
    ctx.final_round = true;
    ctx.contentiousness = 0.0;
    const std::string last = render_debate_prompt(ctx, opp);
    EXPECT_NE(last.find("lab tests"), std::string::npos);
    EXPECT_NE(last.find(std::string(contentiousness_levels().back().tone)), std::string::npos);
}

TEST(Contentiousness, NearestRowAndTies) {
    EXPECT_DOUBLE_EQ(nearest_contentiousness(0.9).level, 0.9);
    EXPECT_DOUBLE_EQ(nearest_contentiousness(1.0).level, 0.9);
    EXPECT_DOUBLE_EQ(nearest_contentiousness(0.62).level, 0.7);
    EXPECT_DOUBLE_EQ(nearest_contentiousness(0.6).level, 0.7);  // midpoint: more contentious row
    EXPECT_DOUBLE_EQ(nearest_contentiousness(0.15).level, 0.3);
    EXPECT_DOUBLE_EQ(nearest_contentiousness(0.1).level, 0.0);
    EXPECT_THROW(nearest_contentiousness(1.2), Error);
}

TEST(Format, PercentTrimsZeros) {
    EXPECT_EQ(format_percent(0.35), "35%");
    EXPECT_EQ(format_percent(0.4066666), "40.67%");
    EXPECT_EQ(format_percent(0.055), "5.5%");
}

TEST(Parse, ColonDashAndParenForms) {
    const PredictionSet p = parse_predictions(
        "- Hepatitis C (HCV): 40%\n"
        "- Hepatitis B (HBV) - 30%\n"
        "3. **Cirrhosis**: 15%\n"
        "Obstructive Jaundice (due to gallstones): 10%\n"
        "and Acute Liver Failure (5%)\n");
    EXPECT_TRUE(p.is_normalized());
    EXPECT_EQ(p.size(), 5u);
    EXPECT_DOUBLE_EQ(p.mass("hepatitis c"), 0.40);
    EXPECT_DOUBLE_EQ(p.mass("hepatitis b"), 0.30);
    EXPECT_DOUBLE_EQ(p.mass("cirrhosis"), 0.15);
    EXPECT_DOUBLE_EQ(p.mass("obstructive jaundice"), 0.10);
    EXPECT_DOUBLE_EQ(p.mass("acute liver failure"), 0.05);
}

TEST(Parse, InlineListAndUnderfullSum) {
    const PredictionSet p =
        parse_predictions("Top-3: Viral Infection (60%), Autoimmune Disease (20%), Bacterial Infection (15%).");
    EXPECT_EQ(p.size(), 3u);
    EXPECT_FALSE(p.is_normalized());
    EXPECT_DOUBLE_EQ(p.mass("viral infection"), 0.60);
    EXPECT_DOUBLE_EQ(p.total(), 0.95);
}

TEST(Parse, OvershootIsRenormalized) {
    const PredictionSet p = parse_predictions("- A: 60%\n- B: 60%\n");
    EXPECT_TRUE(p.is_normalized());
    EXPECT_DOUBLE_EQ(p.mass("a"), 0.5);
}

TEST(Parse, FirstMentionWinsAndStoplistIgnored) {
    const PredictionSet p = parse_predictions("- Dengue: 70%\n- Zika: 30%\nConfidence: 90%\nDengue: 10%\n");
    EXPECT_EQ(p.size(), 2u);
    EXPECT_DOUBLE_EQ(p.mass("dengue"), 0.7);
}

TEST(Parse, FailureCarriesRawText) {
    try {
        parse_predictions("I cannot tell without more information.");
        FAIL() << "expected ParseFailure";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseFailure);
        EXPECT_EQ(e.detail(), "I cannot tell without more information.");
    }
}

TEST(Profile, ValidationAndJson) {
    AgentProfile p;
    p.id = "gpt4";
    p.kind = AgentKind::ChatBackend;
    EXPECT_THROW(p.validate(), Error);  // no model
    p.model = "gpt-4";
    EXPECT_NO_THROW(p.validate());
    p.default_k = 11;
    EXPECT_THROW(p.validate(), Error);
    p.default_k = 3;
    const nlohmann::json j = p;
    const auto back = j.get<AgentProfile>();
    EXPECT_EQ(back.id, "gpt4");
    EXPECT_EQ(back.kind, AgentKind::ChatBackend);
    EXPECT_EQ(back.default_k, 3);
    EXPECT_EQ(back.model, "gpt-4");
}

TEST(Scripted, ReplaysInOrderThenExhausts) {
    ScriptedAgent a("s", {{"- A: 100%", std::nullopt, std::nullopt},
                          {"text", PredictionSet{{"B", 1.0}}, std::string("because")}});
    const AgentResponse first = a.query("p1");
    EXPECT_DOUBLE_EQ(first.predictions.mass("a"), 1.0);
    EXPECT_EQ(first.justification, "- A: 100%");
    const AgentResponse second = a.query("p2");
    EXPECT_DOUBLE_EQ(second.predictions.mass("b"), 1.0);
    EXPECT_EQ(second.justification, "because");
    EXPECT_EQ(a.remaining(), 0u);
    EXPECT_EQ(a.prompts_seen(), (std::vector<std::string>{"p1", "p2"}));
    try {
        a.query("p3");
        FAIL() << "expected FixtureExhausted";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::FixtureExhausted);
    }
}

TEST(Scripted, ShippedFixturesParse) {
    for (const char* rel : {"replay/gpt4/jaundice.json", "replay/claude/jaundice.json",
                            "replay/gpt4/dengue.json", "replay/gemini/dengue.json"}) {
        const auto turns = load_fixture(fixture(rel));
        ASSERT_EQ(turns.size(), 4u) << rel;
        for (const auto& t : turns) {
            EXPECT_NO_THROW(parse_predictions(t.raw_text)) << rel;
        }
    }
    const auto gpt4 = load_fixture(fixture("replay/gpt4/jaundice.json"));
    const PredictionSet opening = parse_predictions(gpt4.front().raw_text);
    EXPECT_DOUBLE_EQ(opening.mass("hepatitis c"), 0.40);
    EXPECT_DOUBLE_EQ(opening.mass("acute liver failure"), 0.05);
}

TEST(Session, DirectoryFixturesResolveByCaseId) {
    AgentProfile p;
    p.id = "gpt4";
    p.fixtures = fixture("replay/gpt4");
    auto a = open_session(p, "dengue");
    EXPECT_EQ(a->id(), "gpt4");
    EXPECT_DOUBLE_EQ(a->query("x").predictions.mass("dengue fever"), 0.60);
    try {
        open_session(p, "no-such-case");
        FAIL() << "expected Io";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Io);
    }
}

TEST(Session, FreshSessionRestartsFixture) {
    AgentProfile p;
    p.id = "claude";
    p.fixtures = fixture("replay/claude/jaundice.json");
    auto first = open_session(p, "jaundice");
    first->query("x");
    auto second = open_session(p, "jaundice");
    EXPECT_DOUBLE_EQ(second->query("x").predictions.mass("hepatitis b"), 0.35);
}
