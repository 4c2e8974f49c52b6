// SPDX-License-Identifier: Apache-2.0

#include "evince/probdist.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "evince/error.hpp"

namespace evince {

namespace {

constexpr double kMassSlack = 1e-12;

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string canonicalize(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

Label::Label(std::string_view name) : name_(canonicalize(name)) {
    if (name_.empty()) {
        throw Error(ErrorCode::InvalidArgument, "label is empty after canonicalization");
    }
}

PredictionSet::PredictionSet(std::map<Label, double> masses) : masses_(std::move(masses)) {
    double sum = 0.0;
    for (auto& [label, m] : masses_) {
        if (!std::isfinite(m) || m < -kMassSlack || m > 1.0 + kMassSlack) {
            throw Error(ErrorCode::InvalidArgument,
                        "mass for '" + label.str() + "' outside [0,1]: " + std::to_string(m));
        }
        m = std::clamp(m, 0.0, 1.0);
        sum += m;
    }
    if (sum > 1.0 + kNormalizedTolerance) {
        throw Error(ErrorCode::InvalidArgument, "masses sum above one: " + std::to_string(sum));
    }
    normalized_ = !masses_.empty() && std::abs(sum - 1.0) <= kNormalizedTolerance;
}

PredictionSet::PredictionSet(std::initializer_list<std::pair<std::string_view, double>> masses) {
    std::map<Label, double> m;
    for (const auto& [name, mass] : masses) {
        if (!m.emplace(Label(name), mass).second) {
            throw Error(ErrorCode::InvalidArgument, "duplicate label '" + std::string(name) + "'");
        }
    }
    *this = PredictionSet(std::move(m));
}

double PredictionSet::mass(const Label& label) const {
    auto it = masses_.find(label);
    return it == masses_.end() ? 0.0 : it->second;
}

double PredictionSet::total() const {
    double sum = 0.0;
    for (const auto& [_, m] : masses_) {
        sum += m;
    }
    return sum;
}

std::vector<PredictionSet::Entry> PredictionSet::ranked() const {
    std::vector<Entry> out(masses_.begin(), masses_.end());
    // std::map iteration is already in label order, so a stable sort on mass
    // alone gives the label-order tiebreak.
    std::stable_sort(out.begin(), out.end(),
                     [](const Entry& a, const Entry& b) { return a.second > b.second; });
    return out;
}

std::size_t PredictionSet::rank_of(const Label& label) const {
    const auto order = ranked();
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i].first == label) {
            return i + 1;
        }
    }
    return 0;
}

int DiscreteDist::total() const {
    int sum = 0;
    for (const auto& [_, b] : bins) {
        sum += b;
    }
    return sum;
}

PredictionSet DiscreteDist::to_prediction_set() const {
    std::map<Label, double> m;
    for (const auto& [label, b] : bins) {
        m.emplace(label, static_cast<double>(b) / kBins);
    }
    return PredictionSet(std::move(m));
}

PredictionSet normalize(const std::map<Label, double>& raw) {
    double sum = 0.0;
    for (const auto& [label, w] : raw) {
        if (!std::isfinite(w) || w < 0.0) {
            throw Error(ErrorCode::InvalidArgument, "negative weight for '" + label.str() + "'");
        }
        sum += w;
    }
    if (sum <= 0.0) {
        throw Error(ErrorCode::AllZeroWeights, "cannot normalize: every weight is zero");
    }
    std::map<Label, double> out;
    for (const auto& [label, w] : raw) {
        out.emplace(label, w / sum);
    }
    return PredictionSet(std::move(out));
}

PredictionSet normalize(const PredictionSet& p) { return normalize(p.masses()); }

double shannon_entropy(const PredictionSet& p) {
    if (!p.is_normalized()) {
        throw Error(ErrorCode::NotNormalized, "entropy requires a normalized prediction set");
    }
    double h = 0.0;
    for (const auto& [_, m] : p.masses()) {
        if (m > 0.0) {
            h -= m * std::log2(m);
        }
    }
    return std::max(h, 0.0);
}

PredictionSet mixture(const PredictionSet& p_a, const PredictionSet& p_b, double alpha) {
    if (!p_a.is_normalized() || !p_b.is_normalized()) {
        throw Error(ErrorCode::NotNormalized, "mixture requires normalized inputs");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "mixture weight outside [0,1]");
    }
    std::map<Label, double> out;
    for (const auto& [label, m] : p_a.masses()) {
        out[label] += alpha * m;
    }
    for (const auto& [label, m] : p_b.masses()) {
        out[label] += (1.0 - alpha) * m;
    }
    return PredictionSet(std::move(out));
}

double entropy_lower_bound(const PredictionSet& p_a, const PredictionSet& p_b, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "mixture weight outside [0,1]");
    }
    return alpha * shannon_entropy(p_a) + (1.0 - alpha) * shannon_entropy(p_b);
}

double entropy_gap(const PredictionSet& p_a, const PredictionSet& p_b) {
    return std::abs(shannon_entropy(p_a) - shannon_entropy(p_b));
}

PredictionSet truncate_top_k(const PredictionSet& p, std::size_t k) {
    if (k == 0) {
        throw Error(ErrorCode::InvalidArgument, "top-k requires k >= 1");
    }
    if (k >= p.size()) {
        return p;
    }
    auto order = p.ranked();
    return normalize(std::map<Label, double>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k)));
}

DiscreteDist discretize(const PredictionSet& p) {
    if (!p.is_normalized()) {
        throw Error(ErrorCode::NotNormalized, "discretize requires a normalized prediction set");
    }
    struct Slot {
        Label label;
        int floor_bins;
        double remainder;
    };
    std::vector<Slot> slots;
    slots.reserve(p.size());
    int assigned = 0;
    for (const auto& [label, m] : p.masses()) {
        const double exact = m * DiscreteDist::kBins;
        // Guard against 0.3 * 1000 landing at 299.99999999999994.
        const int fl = static_cast<int>(std::floor(exact + 1e-9));
        slots.push_back({label, fl, exact - fl});
        assigned += fl;
    }
    std::vector<std::size_t> order(slots.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return slots[a].remainder > slots[b].remainder;
    });
    int missing = DiscreteDist::kBins - assigned;
    for (std::size_t i = 0; missing > 0 && i < order.size(); ++i, --missing) {
        ++slots[order[i]].floor_bins;
    }
    for (std::size_t i = order.size(); missing < 0 && i-- > 0;) {
        if (slots[order[i]].floor_bins > 0) {
            --slots[order[i]].floor_bins;
            ++missing;
        }
    }
    DiscreteDist out;
    for (auto& s : slots) {
        out.bins.emplace(std::move(s.label), s.floor_bins);
    }
    return out;
}

double total_variation(const PredictionSet& a, const PredictionSet& b) {
    double sum = 0.0;
    for (const auto& [label, m] : a.masses()) {
        sum += std::abs(m - b.mass(label));
    }
    for (const auto& [label, m] : b.masses()) {
        if (!a.contains(label)) {
            sum += m;
        }
    }
    return 0.5 * sum;
}

void to_json(nlohmann::json& j, const PredictionSet& p) {
    j = nlohmann::json::object();
    for (const auto& [label, m] : p.masses()) {
        j[label.str()] = m;
    }
    j["normalized"] = p.is_normalized();
}

void from_json(const nlohmann::json& j, PredictionSet& p) {
    if (!j.is_object()) {
        throw Error(ErrorCode::InvalidArgument, "prediction set must be a JSON object");
    }
    std::map<Label, double> m;
    for (const auto& [key, value] : j.items()) {
        if (key == "normalized") {
            continue;
        }
        if (!value.is_number()) {
            throw Error(ErrorCode::InvalidArgument, "mass for '" + key + "' is not a number");
        }
        if (!m.emplace(Label(key), value.get<double>()).second) {
            throw Error(ErrorCode::InvalidArgument, "duplicate label '" + key + "'");
        }
    }
    p = PredictionSet(std::move(m));
}

void to_json(nlohmann::json& j, const DiscreteDist& d) {
    j = nlohmann::json::object();
    for (const auto& [label, b] : d.bins) {
        j[label.str()] = b;
    }
}

}  // namespace evince
