// SPDX-License-Identifier: Apache-2.0

#include "evince/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "evince/error.hpp"
#include "evince/pairing.hpp"

namespace evince::cli {

namespace {

namespace fs = std::filesystem;

/// Raised for problems the caller can fix by changing the command line.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

fs::path resolve(const fs::path& p, const fs::path& base) {
    if (p.empty() || p.is_absolute() || base.empty()) {
        return p;
    }
    return base / p;
}

std::vector<std::string> split_ids(const std::string& csv) {
    std::vector<std::string> ids;
    std::stringstream in(csv);
    for (std::string id; std::getline(in, id, ',');) {
        const auto first = id.find_first_not_of(' ');
        const auto last = id.find_last_not_of(' ');
        if (first != std::string::npos) {
            ids.push_back(id.substr(first, last - first + 1));
        }
    }
    return ids;
}

void ensure_writable(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path probe = dir / ".evince-write-check";
    {
        std::ofstream f(probe);
        if (!f || !(f << "ok")) {
            throw Error(ErrorCode::Io, "output directory " + dir.string() + " is not writable");
        }
    }
    fs::remove(probe, ec);
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << body)) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
}

std::string percent(double mass) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << mass * 100.0 << '%';
    return s.str();
}

struct CommonFlags {
    std::string config;
    std::string case_id;
    std::string agents;
    std::string pipeline = "debate";
    int reps = 1;
    double margin = 0.10;
    std::string out;
    std::size_t parallelism = 0;
    bool restrict_labels = false;
    std::string dataset;
};

/// Config file values with command-line overrides applied.
struct Context {
    EngineConfig config;
    CommonFlags flags;

    std::vector<CaseRecord> cases() const {
        if (!config.dataset.empty()) {
            return dataset::dedup(dataset::load_dataset(config.dataset));
        }
        if (config.cases.empty()) {
            throw UsageError("no cases: set \"dataset\" or \"cases\" in the config, or pass --dataset");
        }
        return config.cases;
    }

    std::vector<AgentProfile> agents(std::size_t at_least) const {
        std::vector<AgentProfile> picked;
        if (flags.agents.empty()) {
            for (std::size_t i = 0; i < config.roster.size() && i < std::max<std::size_t>(at_least, 2); ++i) {
                picked.push_back(config.roster[i]);
            }
        } else {
            for (const auto& id : split_ids(flags.agents)) {
                picked.push_back(config.agent(id));
            }
        }
        if (picked.size() < at_least) {
            throw UsageError("need at least " + std::to_string(at_least) + " agents, got " +
                             std::to_string(picked.size()));
        }
        for (const auto& p : picked) {
            p.validate();
        }
        return picked;
    }

    std::vector<std::string> candidate_labels(const std::vector<CaseRecord>& cases) const {
        std::vector<std::string> labels;
        if (!flags.restrict_labels) {
            return labels;
        }
        std::set<Label> seen;
        for (const auto& c : cases) {
            if (seen.insert(c.truth).second) {
                labels.push_back(c.truth.str());
            }
        }
        return labels;
    }
};

Context make_context(const CommonFlags& flags) {
    Context ctx;
    ctx.flags = flags;
    if (!flags.config.empty()) {
        ctx.config = load_config(flags.config);
    }
    if (!flags.dataset.empty()) {
        ctx.config.dataset = flags.dataset;
    }
    if (!flags.out.empty()) {
        ctx.config.out_dir = flags.out;
    }
    if (flags.parallelism > 0) {
        ctx.config.parallelism = flags.parallelism;
    }
    if (!ctx.config.dataset.empty() && !fs::exists(ctx.config.dataset)) {
        throw Error(ErrorCode::Io, "dataset " + ctx.config.dataset.string() + " does not exist");
    }
    return ctx;
}

/// One debate with fresh sessions; the judge session too when CRIT is on.
debate::DebateTranscript debate_case(const Context& ctx, const CaseRecord& c, const AgentProfile& a,
                                     const AgentProfile& b, const std::vector<std::string>& labels) {
    debate::DebateOptions options;
    options.ara = ctx.config.ara;
    options.candidate_labels = labels;
    options.crit_depth = ctx.config.crit_depth;
    std::unique_ptr<Agent> judge;
    if (ctx.config.confidence == ConfidenceSource::Crit) {
        if (!ctx.config.judge) {
            throw Error(ErrorCode::Config, "CRIT confidences need a \"judge\" profile");
        }
        judge = open_session(*ctx.config.judge, c.case_id);
        options.judge = judge.get();
    }
    return debate::run_debate(c, a, b, ctx.config.debate, options);
}

PredictionSet single_case(const CaseRecord& c, const AgentProfile& a, const std::vector<std::string>& labels) {
    auto agent = open_session(a, c.case_id);
    PromptContext prompt;
    prompt.symptoms = c.symptoms;
    prompt.requested_k = a.default_k;
    prompt.candidate_labels = labels;
    return normalize(agent->query(render_opening_prompt(prompt)).predictions);
}

dataset::Pipeline make_pipeline(const Context& ctx, const std::vector<AgentProfile>& agents,
                                const std::vector<std::string>& labels) {
    if (ctx.flags.pipeline == "single") {
        const AgentProfile a = agents.front();
        return {"single:" + a.id, [a, labels](const CaseRecord& c, int) { return single_case(c, a, labels); }};
    }
    const AgentProfile a = agents.at(0);
    const AgentProfile b = agents.at(1);
    return {"debate:" + a.id + "+" + b.id, [&ctx, a, b, labels](const CaseRecord& c, int) {
                return debate_case(ctx, c, a, b, labels).final_aggregate;
            }};
}

std::size_t pipeline_agents(const std::string& pipeline) {
    if (pipeline == "single") {
        return 1;
    }
    if (pipeline == "debate") {
        return 2;
    }
    throw UsageError("--pipeline must be 'single' or 'debate'");
}

void print_top3(std::ostream& out, const PredictionSet& p) {
    const auto ranked = p.ranked();
    for (std::size_t i = 0; i < ranked.size() && i < 3; ++i) {
        out << "  " << (i + 1) << ". " << ranked[i].first.str() << "  " << percent(ranked[i].second) << '\n';
    }
}

int cmd_debate(const CommonFlags& flags, std::ostream& out) {
    const Context ctx = make_context(flags);
    const auto agents = ctx.agents(2);
    if (agents.size() != 2) {
        throw UsageError("debate takes exactly two agents");
    }
    const auto cases = ctx.cases();
    const CaseRecord* chosen = nullptr;
    if (flags.case_id.empty()) {
        if (cases.size() != 1) {
            throw UsageError("--case is required when more than one case is available");
        }
        chosen = &cases.front();
    } else {
        for (const auto& c : cases) {
            if (c.case_id == flags.case_id) {
                chosen = &c;
            }
        }
        if (chosen == nullptr) {
            throw UsageError("unknown case '" + flags.case_id + "'");
        }
    }
    ensure_writable(ctx.config.out_dir);

    const fs::path transcript_path = ctx.config.out_dir / (chosen->case_id + ".transcript.json");
    const fs::path entropy_path = ctx.config.out_dir / (chosen->case_id + ".entropy.csv");
    const auto persist = [&](const debate::DebateTranscript& t) {
        write_file(transcript_path, nlohmann::json(t).dump(2) + "\n");
        std::ostringstream csv;
        debate::write_entropy_csv(csv, debate::entropy_trajectory(t));
        write_file(entropy_path, csv.str());
    };
    try {
        const auto t = debate_case(ctx, *chosen, agents[0], agents[1], ctx.candidate_labels(cases));
        persist(t);
        out << "case " << t.case_id << ": " << t.rounds.size() << " rounds ("
            << t.rounds.size() - 1 << " content + finale)\n";
        out << "joint top-3:\n";
        print_top3(out, t.final_aggregate);
        out << "transcript: " << transcript_path.string() << '\n';
        return kExitOk;
    } catch (const debate::DebateError& e) {
        persist(e.partial());
        throw;
    }
}

int cmd_evaluate(const CommonFlags& flags, std::ostream& out) {
    const std::size_t needed = pipeline_agents(flags.pipeline);
    if (flags.reps < 1) {
        throw UsageError("--reps must be at least 1");
    }
    const Context ctx = make_context(flags);
    const auto agents = ctx.agents(needed);
    const auto cases = ctx.cases();
    ensure_writable(ctx.config.out_dir);

    const auto labels = ctx.candidate_labels(cases);
    const dataset::Pipeline pipeline = make_pipeline(ctx, agents, labels);
    const dataset::AccuracyReport report =
        dataset::evaluate_batch(cases, pipeline, flags.reps, ctx.config.parallelism);

    const std::string stem = "evaluate-" + flags.pipeline;
    write_file(ctx.config.out_dir / (stem + ".json"), nlohmann::json(report).dump(2) + "\n");
    std::ostringstream jsonl;
    dataset::write_outcomes_jsonl(jsonl, report.outcomes);
    write_file(ctx.config.out_dir / (stem + ".jsonl"), jsonl.str());
    std::vector<Label> subset;
    std::set<Label> seen;
    for (const auto& c : cases) {
        if (seen.insert(c.truth).second) {
            subset.push_back(c.truth);
        }
    }
    std::ostringstream confusion;
    dataset::write_confusion_csv(confusion, dataset::confusion_matrix(report.outcomes, subset));
    write_file(ctx.config.out_dir / (stem + ".confusion.csv"), confusion.str());

    out << std::fixed << std::setprecision(2);
    out << pipeline.id << ": mean " << report.mean << "% over " << report.scored << " scored outcomes";
    if (report.unscored > 0) {
        out << " (" << report.unscored << " unscored)";
    }
    out << ", std-dev " << report.std_dev << '\n';
    for (std::size_t r = 0; r < report.repetition_means.size(); ++r) {
        out << "  repetition " << (r + 1) << ": " << report.repetition_means[r] << "%\n";
    }
    out << "report: " << (ctx.config.out_dir / (stem + ".json")).string() << '\n';
    return kExitOk;
}

int cmd_pair(const CommonFlags& flags, std::ostream& out) {
    const Context ctx = make_context(flags);
    std::vector<AgentProfile> agents;
    if (flags.agents.empty()) {
        agents = ctx.config.roster;
    } else {
        agents = ctx.agents(2);
    }
    if (agents.size() < 2) {
        throw UsageError("pairing needs at least two agents in the roster");
    }
    const auto cases = ctx.cases();
    ensure_writable(ctx.config.out_dir);

    std::vector<pairing::AgentProbe> probes;
    for (const auto& a : agents) {
        probes.push_back(pairing::probe_agent(a, cases, a.default_k));
    }
    out << std::left << std::setw(20) << "agent" << std::setw(6) << "k" << std::setw(14) << "entropy"
        << std::setw(10) << "quality" << "cases\n";
    out << std::fixed << std::setprecision(4);
    for (const auto& p : probes) {
        out << std::setw(20) << p.agent_id << std::setw(6) << p.probe_k << std::setw(14) << p.mean_entropy
            << std::setw(10) << p.mean_quality << p.cases_used << '\n';
    }
    nlohmann::json report = {{"probes", probes}, {"quality_epsilon", ctx.config.quality_epsilon}};
    try {
        const auto sel = pairing::select_pair(probes, ctx.config.quality_epsilon);
        report["selection"] = sel;
        write_file(ctx.config.out_dir / "pairing.json", report.dump(2) + "\n");
        out << "selected: " << sel.high_entropy_id << " (high entropy) + " << sel.low_entropy_id
            << " (low entropy), gap " << sel.entropy_gap << " bits\n";
        return kExitOk;
    } catch (const Error& e) {
        report["selection"] = nullptr;
        write_file(ctx.config.out_dir / "pairing.json", report.dump(2) + "\n");
        throw;
    }
}

int cmd_audit(const CommonFlags& flags, std::ostream& out) {
    const std::size_t needed = pipeline_agents(flags.pipeline);
    if (!(flags.margin >= 0.0)) {
        throw UsageError("--margin must be non-negative");
    }
    const Context ctx = make_context(flags);
    const auto agents = ctx.agents(needed);
    const auto cases = ctx.cases();
    ensure_writable(ctx.config.out_dir);
    const fs::path transcripts = ctx.config.out_dir / "transcripts";
    fs::create_directories(transcripts);

    const auto labels = ctx.candidate_labels(cases);
    std::ostringstream flagged_lines;
    std::size_t flagged = 0;
    for (const auto& c : cases) {
        PredictionSet aggregate;
        std::string ref;
        if (needed == 1) {
            aggregate = single_case(c, agents[0], labels);
        } else {
            const auto t = debate_case(ctx, c, agents[0], agents[1], labels);
            const fs::path path = transcripts / (c.case_id + ".json");
            write_file(path, nlohmann::json(t).dump(2) + "\n");
            aggregate = t.final_aggregate;
            ref = path.string();
        }
        const auto report = dataset::audit_ground_truth(c, aggregate, flags.margin, ref);
        if (report.flagged) {
            ++flagged;
            flagged_lines << nlohmann::json(report).dump() << '\n';
            out << "flagged " << c.case_id << ": truth '" << report.truth << "' at "
                << percent(report.truth_mass) << ", top-1 '" << report.top_label << "' at "
                << percent(report.top_mass) << '\n';
        }
    }
    write_file(ctx.config.out_dir / "audit.jsonl", flagged_lines.str());
    out << flagged << " of " << cases.size() << " cases flagged\n";
    return kExitOk;
}

}  // namespace

const AgentProfile& EngineConfig::agent(const std::string& id) const {
    for (const auto& p : roster) {
        if (p.id == id) {
            return p;
        }
    }
    throw UsageError("unknown agent id '" + id + "'");
}

EngineConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
    EngineConfig c;
    try {
        for (const auto& a : j.value("agents", nlohmann::json::array())) {
            AgentProfile p = a.get<AgentProfile>();
            p.fixtures = resolve(p.fixtures, base_dir);
            c.roster.push_back(std::move(p));
        }
        if (j.contains("judge") && !j.at("judge").is_null()) {
            AgentProfile p = j.at("judge").get<AgentProfile>();
            p.fixtures = resolve(p.fixtures, base_dir);
            c.judge = std::move(p);
        }
        if (j.contains("debate")) {
            c.debate = j.at("debate").get<debate::DebateConfig>();
        }
        if (j.contains("ara")) {
            const auto& a = j.at("ara");
            c.ara.reward = a.value("reward", c.ara.reward);
            if (a.contains("learning_rate") && !a.at("learning_rate").is_null()) {
                c.ara.learning_rate = a.at("learning_rate").get<double>();
            }
            const std::string source = a.value("confidence", std::string("uniform"));
            if (source == "crit") {
                c.confidence = ConfidenceSource::Crit;
            } else if (source != "uniform") {
                throw Error(ErrorCode::Config, "ara.confidence must be 'uniform' or 'crit'");
            }
        }
        c.crit_depth = j.value("crit_depth", c.crit_depth);
        if (j.contains("dataset") && !j.at("dataset").is_null()) {
            c.dataset = resolve(j.at("dataset").get<std::string>(), base_dir);
        }
        for (const auto& item : j.value("cases", nlohmann::json::array())) {
            c.cases.push_back(case_from_json(item));
        }
        if (j.contains("out_dir")) {
            c.out_dir = resolve(j.at("out_dir").get<std::string>(), base_dir);
        }
        c.parallelism = j.value("parallelism", c.parallelism);
        c.quality_epsilon = j.value("quality_epsilon", c.quality_epsilon);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Config, std::string("bad config value: ") + e.what());
    }
    ara::reward_function(c.ara.reward);
    c.debate.validate();
    return c;
}

EngineConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open config " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Config, "config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Debate-driven diagnosis engine: debates, evaluations, pairing probes, audits", "evince"};
    app.require_subcommand(1);
    CommonFlags flags;

    const auto add_common = [&flags](CLI::App* sub) {
        sub->add_option("--config", flags.config, "Engine config (JSON)");
        sub->add_option("--agents", flags.agents, "Comma-separated roster ids");
        sub->add_option("--out", flags.out, "Output directory");
        sub->add_option("--dataset", flags.dataset, "Case CSV; overrides the config");
        sub->add_option("--parallelism", flags.parallelism, "Concurrent cases");
        sub->add_flag("--restrict-labels", flags.restrict_labels,
                      "Restrict predictions to the dataset's disease labels");
    };
    auto* debate_cmd = app.add_subcommand("debate", "Run one debate and write its transcript");
    add_common(debate_cmd);
    debate_cmd->add_option("--case", flags.case_id, "Case id");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a pipeline over the dataset");
    add_common(evaluate_cmd);
    evaluate_cmd->add_option("--pipeline", flags.pipeline, "single or debate")
        ->check(CLI::IsMember({"single", "debate"}));
    evaluate_cmd->add_option("--reps", flags.reps, "Repetitions");

    auto* pair_cmd = app.add_subcommand("pair", "Probe agents and select a high/low entropy pair");
    add_common(pair_cmd);

    auto* audit_cmd = app.add_subcommand("audit", "Flag cases whose label the debate disputes");
    add_common(audit_cmd);
    audit_cmd->add_option("--pipeline", flags.pipeline, "single or debate")
        ->check(CLI::IsMember({"single", "debate"}));
    audit_cmd->add_option("--margin", flags.margin, "Probability margin");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (debate_cmd->parsed()) {
            return cmd_debate(flags, out);
        }
        if (evaluate_cmd->parsed()) {
            return cmd_evaluate(flags, out);
        }
        if (pair_cmd->parsed()) {
            return cmd_pair(flags, out);
        }
        return cmd_audit(flags, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        if (e.code() == ErrorCode::NoEligiblePair) {
            err << "no two probed agents are within the quality tolerance; widen "
                   "\"quality_epsilon\" or add agents\n";
        }
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace evince::cli
