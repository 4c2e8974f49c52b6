// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evince/agents.hpp"
#include "evince/ara.hpp"
#include "evince/dataset.hpp"
#include "evince/debate.hpp"

namespace evince::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

enum class ConfidenceSource { Uniform, Crit };

struct EngineConfig {
    std::vector<AgentProfile> roster;
    std::optional<AgentProfile> judge;
    debate::DebateConfig debate;
    ara::AraConfig ara;
    ConfidenceSource confidence = ConfidenceSource::Uniform;
    int crit_depth = 0;
    std::filesystem::path dataset;
    /// Cases given inline in the config; used when no dataset path is set.
    std::vector<CaseRecord> cases;
    std::filesystem::path out_dir = "evince-out";
    std::size_t parallelism = 1;
    double quality_epsilon = 0.10;

    const AgentProfile& agent(const std::string& id) const;
};

/// Reads a config document. Relative fixture and dataset paths resolve
/// against the config file's directory.
EngineConfig load_config(const std::filesystem::path& path);
EngineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Entry point behind the `evince` binary. Returns 0 on success, 1 on usage
/// errors and 2 on runtime failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace evince::cli
