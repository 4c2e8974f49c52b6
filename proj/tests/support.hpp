// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "evince/agents.hpp"
#include "evince/dataset.hpp"

namespace evince::testing {

inline std::filesystem::path fixture(const std::string& rel) {
    return std::filesystem::path(EVINCE_FIXTURE_DIR) / rel;
}

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = std::filesystem::temp_directory_path() /
                ("evince-" + tag + "-" + std::to_string(rng() % 1000000000ULL));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& body) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << body;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Agent whose replies come from a callback; records every prompt.
class FakeAgent : public Agent {
public:
    FakeAgent(std::string id, std::function<std::string(const std::string&)> reply)
        : id_(std::move(id)), reply_(std::move(reply)) {}

    const std::string& id() const override { return id_; }
    std::string complete(const std::string& prompt) override {
        prompts.push_back(prompt);
        return reply_(prompt);
    }

    std::vector<std::string> prompts;

private:
    std::string id_;
    std::function<std::string(const std::string&)> reply_;
};

/// "- name: NN%" lines for a prediction set, ranked.
inline std::string render_lines(const PredictionSet& p) {
    std::string out;
    for (const auto& [label, m] : p.ranked()) {
        out += "- " + label.str() + ": " + format_percent(m) + "\n";
    }
    return out;
}

inline FixtureTurn turn_of(const PredictionSet& p) { return {render_lines(p), p, std::nullopt}; }

inline void write_fixture(const std::filesystem::path& p, const std::vector<FixtureTurn>& turns) {
    write_text(p, nlohmann::json(turns).dump(2));
}

inline CaseRecord make_case(std::string id, std::vector<std::string> symptoms, std::string truth) {
    return {std::move(id), std::move(symptoms), Label(truth)};
}

}  // namespace evince::testing
