// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace evince {

/// Lower-case, whitespace-trimmed disease name. Two labels are equal iff
/// their canonical forms are byte-equal.
class Label {
public:
    explicit Label(std::string_view name);

    const std::string& str() const noexcept { return name_; }

    friend auto operator<=>(const Label&, const Label&) = default;
    friend bool operator==(const Label&, const Label&) = default;

private:
    std::string name_;
};

std::string canonicalize(std::string_view text);

inline constexpr double kNormalizedTolerance = 1e-9;

/// Finite map from labels to probability mass. Masses need not sum to one:
/// the flag records whether they do, and normalization is always an
/// explicit call to normalize().
class PredictionSet {
public:
    using Entry = std::pair<Label, double>;

    PredictionSet() = default;
    explicit PredictionSet(std::map<Label, double> masses);
    PredictionSet(std::initializer_list<std::pair<std::string_view, double>> masses);

    double mass(const Label& label) const;
    double mass(std::string_view label) const { return mass(Label(label)); }
    bool contains(const Label& label) const { return masses_.count(label) != 0; }

    bool is_normalized() const noexcept { return normalized_; }
    bool empty() const noexcept { return masses_.empty(); }
    std::size_t size() const noexcept { return masses_.size(); }
    double total() const;

    const std::map<Label, double>& masses() const noexcept { return masses_; }

    /// Entries by descending mass; equal masses fall back to label order.
    std::vector<Entry> ranked() const;

    /// 1-based rank of `label` in ranked(), or 0 when absent.
    std::size_t rank_of(const Label& label) const;

    friend bool operator==(const PredictionSet&, const PredictionSet&) = default;

private:
    std::map<Label, double> masses_;
    bool normalized_ = false;
};

struct DiscreteDist {
    static constexpr int kBins = 1000;
    std::map<Label, int> bins;

    int total() const;
    PredictionSet to_prediction_set() const;
};

PredictionSet normalize(const std::map<Label, double>& raw);
PredictionSet normalize(const PredictionSet& p);

/// Shannon entropy in bits. Requires a normalized set.
double shannon_entropy(const PredictionSet& p);

/// alpha * p_a + (1 - alpha) * p_b over the union of both label sets.
PredictionSet mixture(const PredictionSet& p_a, const PredictionSet& p_b, double alpha);

/// alpha * H(p_a) + (1 - alpha) * H(p_b); never exceeds H(mixture(p_a, p_b, alpha)).
double entropy_lower_bound(const PredictionSet& p_a, const PredictionSet& p_b, double alpha);

double entropy_gap(const PredictionSet& p_a, const PredictionSet& p_b);

PredictionSet truncate_top_k(const PredictionSet& p, std::size_t k);

/// Hamilton (largest-remainder) apportionment of 1000 integer bins.
DiscreteDist discretize(const PredictionSet& p);

/// Total-variation distance, both sides taken over the union of labels.
double total_variation(const PredictionSet& a, const PredictionSet& b);

void to_json(nlohmann::json& j, const PredictionSet& p);
void from_json(const nlohmann::json& j, PredictionSet& p);
void to_json(nlohmann::json& j, const DiscreteDist& d);

}  // namespace evince
