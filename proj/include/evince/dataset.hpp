// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evince/probdist.hpp"

namespace evince {

inline constexpr std::size_t kMaxSymptoms = 17;

struct CaseRecord {
    std::string case_id;
    std::vector<std::string> symptoms;  // canonical, deduplicated, input order
    Label truth;
};

void to_json(nlohmann::json& j, const CaseRecord& c);
CaseRecord case_from_json(const nlohmann::json& j);

/// trim, lower-case, underscores to spaces, whitespace runs collapsed.
std::string canonical_symptom(std::string_view raw);

namespace dataset {

/// Reads the "Disease, Symptom_1 ... Symptom_17" layout. Every column other
/// than the disease column is a symptom column; blank cells are dropped.
/// Case ids are "case-<row>" with 1-based data-row numbers.
std::vector<CaseRecord> load_dataset(const std::filesystem::path& path);

/// Two records are duplicates iff truth label and symptom set match; the
/// first occurrence survives and order is stable.
std::vector<CaseRecord> dedup(const std::vector<CaseRecord>& records);

std::size_t distinct_labels(const std::vector<CaseRecord>& records);

/// 1.0, 0.5 or 0.25 for the truth at rank 1, 2 or 3; 0.0 otherwise.
double score_topk(const PredictionSet& predictions, const Label& truth);

struct EvalOutcome {
    std::string case_id;
    std::string pipeline_id;
    std::string truth;
    int repetition = 0;
    PredictionSet predictions;
    double score = 0.0;
    std::optional<std::size_t> truth_rank;
    /// Set when the pipeline failed on this case; such outcomes are unscored.
    std::optional<std::string> error;

    bool scored() const { return !error.has_value(); }
};

struct Pipeline {
    std::string id;
    std::function<PredictionSet(const CaseRecord&, int repetition)> run;
};

struct AccuracyReport {
    std::string pipeline_id;
    std::size_t cases = 0;
    int repetitions = 0;
    std::vector<double> repetition_means;  // percent
    double mean = 0.0;                     // percent, over every scored outcome
    double std_dev = 0.0;                  // population std-dev of repetition_means
    std::size_t scored = 0;
    std::size_t unscored = 0;
    std::vector<EvalOutcome> outcomes;     // case-major, then repetition
};

/// Runs `pipeline` on every case `repetitions` times with at most
/// `parallelism` cases in flight. Failures are recorded per case, never
/// counted in the mean.
AccuracyReport evaluate_batch(const std::vector<CaseRecord>& cases, const Pipeline& pipeline,
                              int repetitions, std::size_t parallelism = 1);

struct ConfusionMatrix {
    std::vector<Label> labels;
    std::vector<std::vector<int>> counts;  // [truth][top-1 prediction]
    std::vector<int> other;                // per truth row: top-1 outside the subset

    int total() const;
};

ConfusionMatrix confusion_matrix(const std::vector<EvalOutcome>& outcomes,
                                 const std::vector<Label>& label_subset);

struct AuditReport {
    std::string case_id;
    std::string truth;
    bool flagged = false;
    double truth_mass = 0.0;
    std::size_t truth_rank = 0;  // 0 when absent
    std::string top_label;
    double top_mass = 0.0;
    double gap = 0.0;  // top_mass - truth_mass
    PredictionSet aggregate;
    std::string transcript_ref;
};

/// Flags the case when truth_mass + margin < top-1 mass and the truth is not
/// in the top three.
AuditReport audit_ground_truth(const CaseRecord& record, const PredictionSet& final_aggregate,
                               double margin = 0.10, std::string transcript_ref = {});

void to_json(nlohmann::json& j, const EvalOutcome& o);
void to_json(nlohmann::json& j, const AccuracyReport& r);
void to_json(nlohmann::json& j, const AuditReport& a);

void write_outcomes_jsonl(std::ostream& out, const std::vector<EvalOutcome>& outcomes);
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& m);

}  // namespace dataset
}  // namespace evince
