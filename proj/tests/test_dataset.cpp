// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include <gtest/gtest.h>

#include "evince/dataset.hpp"
#include "evince/error.hpp"
#include "support.hpp"

using namespace evince;
using namespace evince::dataset;
using evince::testing::fixture;
using evince::testing::make_case;
using evince::testing::TempDir;
using evince::testing::write_text;

namespace {

ErrorCode load_error(const std::string& csv, std::string* detail = nullptr) {
    TempDir dir("csv");
    write_text(dir / "d.csv", csv);
    try {
        load_dataset(dir / "d.csv");
    } catch (const Error& e) {
        if (detail != nullptr) {
            *detail = e.detail();
        }
        return e.code();
    }
    ADD_FAILURE() << "expected evince::Error";
    return ErrorCode::Io;
}

std::vector<CaseRecord> ten_cases() {
    std::vector<CaseRecord> cases;
    for (int i = 1; i <= 10; ++i) {
        cases.push_back(make_case("case-" + std::to_string(i), {"s" + std::to_string(i)}, "d" + std::to_string(i)));
    }
    return cases;
}

}  // namespace

TEST(CanonicalSymptom, Rules) {
    EXPECT_EQ(canonical_symptom(" itching"), "itching");
    EXPECT_EQ(canonical_symptom(" Skin_Rash  "), "skin rash");
    EXPECT_EQ(canonical_symptom("pain__behind_the_eyes"), "pain behind the eyes");
}

TEST(LoadDataset, KaggleSample) {
    const auto records = load_dataset(fixture("kaggle_sample.csv"));
    ASSERT_EQ(records.size(), 10u);
    EXPECT_EQ(records[0].case_id, "case-1");
    EXPECT_EQ(records[0].truth.str(), "fungal infection");
    EXPECT_EQ(records[0].symptoms, (std::vector<std::string>{"itching", "skin rash", "nodal skin eruptions"}));
    EXPECT_EQ(records[6].symptoms.size(), 14u);
}

TEST(LoadDataset, Errors) {
    std::string detail;
    EXPECT_EQ(load_error("Disease,Symptom_1\nFlu,cough\nCold,,\n", &detail), ErrorCode::MalformedCsv);
    EXPECT_EQ(load_error("Disease,Symptom_1,Symptom_2\nFlu,cough\nCold, , \n", &detail), ErrorCode::MalformedCsv);
    EXPECT_EQ(detail, "3");
    EXPECT_EQ(load_error("Illness,Symptom_1\nFlu,cough\n"), ErrorCode::MissingDiseaseColumn);
    EXPECT_EQ(load_error("Disease,Symptom_1\n,cough\n"), ErrorCode::MalformedCsv);
    EXPECT_THROW(load_dataset("/nonexistent/evince.csv"), Error);
}

TEST(LoadDataset, QuotedCellsAndBlankLines) {
    TempDir dir("csv");
    write_text(dir / "d.csv", "Symptom_1,disease\n\"joint, pain\",Dengue\n\n fever ,Flu\n");
    const auto r = load_dataset(dir / "d.csv");
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0].symptoms.front(), "joint, pain");
    EXPECT_EQ(r[1].truth.str(), "flu");
}

TEST(Dedup, HandCountedSample) {
    const auto records = load_dataset(fixture("kaggle_sample.csv"));
    const auto unique = dedup(records);
    // rows 2, 3 repeat row 1 (same symptom set); row 10 repeats row 4;
    // row 9 shares row 1's symptoms under a different label and stays.
    ASSERT_EQ(unique.size(), 7u);
    EXPECT_EQ(distinct_labels(unique), 6u);
    EXPECT_EQ(unique[0].case_id, "case-1");
    EXPECT_EQ(unique[1].case_id, "case-4");
    EXPECT_EQ(dedup(unique).size(), unique.size());
}

TEST(ScoreTopK, Examples) {
    const PredictionSet p{{"DF", .6}, {"CHIKV", .25}, {"ZIKV", .15}};
    EXPECT_EQ(score_topk(p, Label("DF")), 1.0);
    EXPECT_EQ(score_topk(p, Label("CHIKV")), 0.5);
    EXPECT_EQ(score_topk(p, Label("ZIKV")), 0.25);
    EXPECT_EQ(score_topk(p, Label("Flu")), 0.0);
    EXPECT_THROW(score_topk(PredictionSet{}, Label("DF")), Error);
}

TEST(EvaluateBatch, AlwaysCorrectAndRankTwo) {
    const Pipeline correct{"correct", [](const CaseRecord& c, int) {
                               return PredictionSet(std::map<Label, double>{{c.truth, 1.0}});
                           }};
    const AccuracyReport r = evaluate_batch(ten_cases(), correct, 3, 4);
    EXPECT_DOUBLE_EQ(r.mean, 100.0);
    EXPECT_DOUBLE_EQ(r.std_dev, 0.0);
    EXPECT_EQ(r.outcomes.size(), 30u);
    EXPECT_EQ(r.repetition_means.size(), 3u);

    const Pipeline second{"second", [](const CaseRecord& c, int) {
                              return PredictionSet(std::map<Label, double>{{Label("zzz other"), 0.6}, {c.truth, 0.4}});
                          }};
    EXPECT_DOUBLE_EQ(evaluate_batch(ten_cases(), second, 1).mean, 50.0);
}

TEST(EvaluateBatch, MixedAndFailures) {
    const Pipeline mixed{"mixed", [](const CaseRecord& c, int) {
                             const int n = std::stoi(c.case_id.substr(5));
                             if (n <= 5) {
                                 return PredictionSet(std::map<Label, double>{{c.truth, 1.0}});
                             }
                             return PredictionSet(std::map<Label, double>{{Label("wrong"), 1.0}});
                         }};
    EXPECT_DOUBLE_EQ(evaluate_batch(ten_cases(), mixed, 1).mean, 50.0);

    const Pipeline flaky{"flaky", [](const CaseRecord& c, int) {
                             if (c.case_id == "case-1") {
                                 throw Error(ErrorCode::BackendTimeout, "slow");
                             }
                             return PredictionSet(std::map<Label, double>{{c.truth, 1.0}});
                         }};
    const AccuracyReport r = evaluate_batch(ten_cases(), flaky, 2, 3);
    EXPECT_EQ(r.unscored, 2u);
    EXPECT_EQ(r.scored, 18u);
    EXPECT_DOUBLE_EQ(r.mean, 100.0);
    EXPECT_FALSE(r.outcomes[0].scored());
    EXPECT_THROW(evaluate_batch(ten_cases(), flaky, 0), Error);
}

TEST(EvaluateBatch, RepetitionSpread) {
    const Pipeline alternating{"alt", [](const CaseRecord& c, int rep) {
                                   if (rep == 0) {
                                       return PredictionSet(std::map<Label, double>{{c.truth, 1.0}});
                                   }
                                   return PredictionSet(std::map<Label, double>{{Label("wrong"), 1.0}});
                               }};
    const AccuracyReport r = evaluate_batch(ten_cases(), alternating, 2);
    EXPECT_EQ(r.repetition_means, (std::vector<double>{100.0, 0.0}));
    EXPECT_DOUBLE_EQ(r.std_dev, 50.0);
    EXPECT_DOUBLE_EQ(r.mean, 50.0);
}

TEST(ConfusionMatrix, HepatitisPattern) {
    const std::vector<Label> subset{Label("hepatitis a"), Label("hepatitis c"), Label("hepatitis d")};
    const auto outcome = [](const std::string& truth, const std::string& top) {
        EvalOutcome o;
        o.truth = truth;
        o.predictions = PredictionSet(std::map<Label, double>{{Label(top), 1.0}});
        return o;
    };
    std::vector<EvalOutcome> outcomes{outcome("hepatitis a", "hepatitis a"), outcome("hepatitis a", "hepatitis a"),
                                      outcome("hepatitis c", "hepatitis a"), outcome("hepatitis c", "cirrhosis"),
                                      outcome("hepatitis d", "hepatitis c"), outcome("flu", "flu")};
    EvalOutcome failed = outcome("hepatitis d", "hepatitis d");
    failed.error = "timeout";
    outcomes.push_back(failed);
    const ConfusionMatrix m = confusion_matrix(outcomes, subset);
    EXPECT_EQ(m.counts, (std::vector<std::vector<int>>{{2, 0, 0}, {1, 0, 0}, {0, 1, 0}}));
    EXPECT_EQ(m.other, (std::vector<int>{0, 1, 0}));
    EXPECT_EQ(m.total(), 5);
    std::ostringstream csv;
    write_confusion_csv(csv, m);
    EXPECT_EQ(csv.str(),
              "truth,hepatitis a,hepatitis c,hepatitis d,other\n"
              "hepatitis a,2,0,0,0\nhepatitis c,1,0,0,1\nhepatitis d,0,1,0,0\n");
    EXPECT_THROW(confusion_matrix(outcomes, {}), Error);
}

TEST(Audit, JaundiceFlagged) {
    const CaseRecord c = make_case("jaundice", {"itching"}, "jaundice");
    const PredictionSet agg{{"hepatitis c", .5}, {"hepatitis b", .3}, {"cirrhosis", .1}, {"obstructive jaundice", .05},
                            {"acute liver failure", .05}};
    const AuditReport r = audit_ground_truth(c, agg, 0.1, "t.json");
    EXPECT_TRUE(r.flagged);
    EXPECT_DOUBLE_EQ(r.gap, 0.5);
    EXPECT_EQ(r.truth_rank, 0u);
    EXPECT_EQ(r.top_label, "hepatitis c");
    EXPECT_EQ(r.transcript_ref, "t.json");
    EXPECT_FALSE(audit_ground_truth(c, agg, 1.0).flagged);
}

TEST(Audit, TopOneAndTopThreeNotFlagged) {
    const PredictionSet agg{{"a", .7}, {"b", .2}, {"c", .06}, {"d", .04}};
    EXPECT_FALSE(audit_ground_truth(make_case("x", {"s"}, "a"), agg).flagged);
    EXPECT_FALSE(audit_ground_truth(make_case("x", {"s"}, "c"), agg).flagged);
    EXPECT_TRUE(audit_ground_truth(make_case("x", {"s"}, "d"), agg).flagged);
    EXPECT_THROW(audit_ground_truth(make_case("x", {"s"}, "a"), PredictionSet{{"a", .5}}), Error);
}

TEST(Json, OutcomeLines) {
    EvalOutcome o;
    o.case_id = "case-1";
    o.pipeline_id = "p";
    o.truth = "flu";
    o.predictions = PredictionSet{{"flu", 1.0}};
    o.score = 1.0;
    o.truth_rank = 1;
    std::ostringstream out;
    write_outcomes_jsonl(out, {o, o});
    std::istringstream in(out.str());
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j.at("truth_rank"), 1);
        ++n;
    }
    EXPECT_EQ(n, 2);
}
