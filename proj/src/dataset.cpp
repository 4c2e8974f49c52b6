// SPDX-License-Identifier: Apache-2.0

#include "evince/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

#include "evince/error.hpp"

namespace evince {

void to_json(nlohmann::json& j, const CaseRecord& c) {
    j = {{"case_id", c.case_id}, {"symptoms", c.symptoms}, {"truth", c.truth.str()}};
}

CaseRecord case_from_json(const nlohmann::json& j) {
    CaseRecord c{j.at("case_id").get<std::string>(), {}, Label(j.at("truth").get<std::string>())};
    for (const auto& s : j.at("symptoms")) {
        const std::string sym = canonical_symptom(s.get<std::string>());
        if (!sym.empty() && std::find(c.symptoms.begin(), c.symptoms.end(), sym) == c.symptoms.end()) {
            c.symptoms.push_back(sym);
        }
    }
    if (c.symptoms.empty() || c.symptoms.size() > kMaxSymptoms) {
        throw Error(ErrorCode::InvalidArgument,
                    "case '" + c.case_id + "' must list between 1 and 17 symptoms");
    }
    return c;
}

std::string canonical_symptom(std::string_view raw) {
    std::string s(raw);
    std::replace(s.begin(), s.end(), '_', ' ');
    return canonicalize(s);
}

namespace dataset {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + "\"";
}

}  // namespace

std::vector<CaseRecord> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open dataset " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!canonicalize(line).empty()) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.empty()) {
        throw Error(ErrorCode::MalformedCsv, "dataset has no header row", std::to_string(line_no));
    }
    const auto disease_it = std::find_if(header.begin(), header.end(), [](const std::string& h) {
        return canonicalize(h) == "disease";
    });
    if (disease_it == header.end()) {
        throw Error(ErrorCode::MissingDiseaseColumn, "header has no 'Disease' column");
    }
    const auto disease_col = static_cast<std::size_t>(disease_it - header.begin());

    std::vector<CaseRecord> records;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (canonicalize(line).empty()) {
            continue;
        }
        ++row;
        const auto cells = split_csv_line(line);
        const auto malformed = [&](const std::string& why) {
            return Error(ErrorCode::MalformedCsv, "line " + std::to_string(line_no) + ": " + why,
                         std::to_string(line_no));
        };
        if (cells.size() > header.size()) {
            throw malformed("more cells than header columns");
        }
        if (disease_col >= cells.size() || canonicalize(cells[disease_col]).empty()) {
            throw malformed("disease cell is blank");
        }
        std::vector<std::string> symptoms;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == disease_col) {
                continue;
            }
            std::string s = canonical_symptom(cells[c]);
            if (!s.empty() && std::find(symptoms.begin(), symptoms.end(), s) == symptoms.end()) {
                symptoms.push_back(std::move(s));
            }
        }
        if (symptoms.empty()) {
            throw malformed("every symptom cell is blank");
        }
        if (symptoms.size() > kMaxSymptoms) {
            throw malformed("more than 17 symptoms");
        }
        records.push_back({"case-" + std::to_string(row), std::move(symptoms),
                           Label(cells[disease_col])});
    }
    return records;
}

std::vector<CaseRecord> dedup(const std::vector<CaseRecord>& records) {
    std::set<std::pair<std::string, std::set<std::string>>> seen;
    std::vector<CaseRecord> out;
    for (const auto& r : records) {
        auto key = std::make_pair(r.truth.str(), std::set<std::string>(r.symptoms.begin(), r.symptoms.end()));
        if (seen.insert(std::move(key)).second) {
            out.push_back(r);
        }
    }
    return out;
}

std::size_t distinct_labels(const std::vector<CaseRecord>& records) {
    std::set<Label> labels;
    for (const auto& r : records) {
        labels.insert(r.truth);
    }
    return labels.size();
}

double score_topk(const PredictionSet& predictions, const Label& truth) {
    if (predictions.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cannot score an empty prediction set");
    }
    switch (predictions.rank_of(truth)) {
        case 1: return 1.0;
        case 2: return 0.5;
        case 3: return 0.25;
        default: return 0.0;
    }
}

AccuracyReport evaluate_batch(const std::vector<CaseRecord>& cases, const Pipeline& pipeline,
                              int repetitions, std::size_t parallelism) {
    if (repetitions < 1) {
        throw Error(ErrorCode::InvalidArgument, "repetitions must be >= 1");
    }
    if (!pipeline.run) {
        throw Error(ErrorCode::InvalidArgument, "pipeline '" + pipeline.id + "' has no runner");
    }
    const std::size_t reps = static_cast<std::size_t>(repetitions);
    const std::size_t jobs = cases.size() * reps;
    std::vector<EvalOutcome> outcomes(jobs);

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t job = next++; job < jobs; job = next++) {
            const CaseRecord& c = cases[job / reps];
            EvalOutcome& o = outcomes[job];
            o.case_id = c.case_id;
            o.pipeline_id = pipeline.id;
            o.truth = c.truth.str();
            o.repetition = static_cast<int>(job % reps);
            try {
                o.predictions = pipeline.run(c, o.repetition);
                o.score = score_topk(o.predictions, c.truth);
                if (const auto rank = o.predictions.rank_of(c.truth); rank != 0) {
                    o.truth_rank = rank;
                }
            } catch (const std::exception& e) {
                o.error = e.what();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(jobs, 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) {
            pool.emplace_back(worker);
        }
    }

    AccuracyReport report;
    report.pipeline_id = pipeline.id;
    report.cases = cases.size();
    report.repetitions = repetitions;
    std::vector<double> rep_sum(reps, 0.0);
    std::vector<std::size_t> rep_count(reps, 0);
    double total = 0.0;
    for (const auto& o : outcomes) {
        if (!o.scored()) {
            ++report.unscored;
            continue;
        }
        ++report.scored;
        total += o.score;
        rep_sum[static_cast<std::size_t>(o.repetition)] += o.score;
        ++rep_count[static_cast<std::size_t>(o.repetition)];
    }
    report.mean = report.scored == 0 ? 0.0 : 100.0 * total / static_cast<double>(report.scored);
    for (std::size_t r = 0; r < reps; ++r) {
        report.repetition_means.push_back(
            rep_count[r] == 0 ? 0.0 : 100.0 * rep_sum[r] / static_cast<double>(rep_count[r]));
    }
    double mean_of_means = 0.0;
    for (double m : report.repetition_means) {
        mean_of_means += m;
    }
    mean_of_means /= static_cast<double>(reps);
    double var = 0.0;
    for (double m : report.repetition_means) {
        var += (m - mean_of_means) * (m - mean_of_means);
    }
    report.std_dev = std::sqrt(var / static_cast<double>(reps));
    report.outcomes = std::move(outcomes);
    return report;
}

int ConfusionMatrix::total() const {
    int sum = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        for (int c : counts[i]) {
            sum += c;
        }
        sum += other[i];
    }
    return sum;
}

ConfusionMatrix confusion_matrix(const std::vector<EvalOutcome>& outcomes,
                                 const std::vector<Label>& label_subset) {
    if (label_subset.empty()) {
        throw Error(ErrorCode::InvalidArgument, "confusion matrix needs a non-empty label subset");
    }
    ConfusionMatrix m;
    m.labels = label_subset;
    const std::size_t n = label_subset.size();
    m.counts.assign(n, std::vector<int>(n, 0));
    m.other.assign(n, 0);
    const auto index_of = [&](const Label& l) -> std::optional<std::size_t> {
        const auto it = std::find(label_subset.begin(), label_subset.end(), l);
        if (it == label_subset.end()) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - label_subset.begin());
    };
    for (const auto& o : outcomes) {
        if (!o.scored() || o.predictions.empty()) {
            continue;
        }
        const auto row = index_of(Label(o.truth));
        if (!row) {
            continue;
        }
        const Label top = o.predictions.ranked().front().first;
        if (const auto col = index_of(top)) {
            ++m.counts[*row][*col];
        } else {
            ++m.other[*row];
        }
    }
    return m;
}

AuditReport audit_ground_truth(const CaseRecord& record, const PredictionSet& final_aggregate,
                               double margin, std::string transcript_ref) {
    if (!final_aggregate.is_normalized()) {
        throw Error(ErrorCode::NotNormalized, "audit requires a normalized aggregate");
    }
    AuditReport a;
    a.case_id = record.case_id;
    a.truth = record.truth.str();
    a.aggregate = final_aggregate;
    a.transcript_ref = std::move(transcript_ref);
    a.truth_mass = final_aggregate.mass(record.truth);
    a.truth_rank = final_aggregate.rank_of(record.truth);
    const auto ranked = final_aggregate.ranked();
    a.top_label = ranked.front().first.str();
    a.top_mass = ranked.front().second;
    a.gap = a.top_mass - a.truth_mass;
    const bool in_top3 = a.truth_rank >= 1 && a.truth_rank <= 3;
    a.flagged = a.truth_mass + margin < a.top_mass && !in_top3;
    return a;
}

void to_json(nlohmann::json& j, const EvalOutcome& o) {
    j = {{"case_id", o.case_id},
         {"pipeline", o.pipeline_id},
         {"truth", o.truth},
         {"repetition", o.repetition},
         {"predictions", o.predictions},
         {"score", o.score},
         {"truth_rank", o.truth_rank ? nlohmann::json(*o.truth_rank) : nlohmann::json(nullptr)}};
    if (o.error) {
        j["error"] = *o.error;
    }
}

void to_json(nlohmann::json& j, const AccuracyReport& r) {
    j = {{"pipeline", r.pipeline_id},
         {"cases", r.cases},
         {"repetitions", r.repetitions},
         {"repetition_means", r.repetition_means},
         {"mean_percent", r.mean},
         {"std_dev", r.std_dev},
         {"scored", r.scored},
         {"unscored", r.unscored}};
}

void to_json(nlohmann::json& j, const AuditReport& a) {
    j = {{"case_id", a.case_id},
         {"truth", a.truth},
         {"flagged", a.flagged},
         {"truth_mass", a.truth_mass},
         {"truth_rank", a.truth_rank == 0 ? nlohmann::json(nullptr) : nlohmann::json(a.truth_rank)},
         {"top_label", a.top_label},
         {"top_mass", a.top_mass},
         {"gap", a.gap},
         {"aggregate", a.aggregate},
         {"transcript", a.transcript_ref}};
}

void write_outcomes_jsonl(std::ostream& out, const std::vector<EvalOutcome>& outcomes) {
    for (const auto& o : outcomes) {
        out << nlohmann::json(o).dump() << '\n';
    }
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& m) {
    out << "truth";
    for (const auto& l : m.labels) {
        out << ',' << csv_escape(l.str());
    }
    out << ",other\n";
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        out << csv_escape(m.labels[i].str());
        for (int c : m.counts[i]) {
            out << ',' << c;
        }
        out << ',' << m.other[i] << '\n';
    }
}

}  // namespace dataset
}  // namespace evince
