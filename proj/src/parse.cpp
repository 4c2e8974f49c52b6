// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <regex>

#include "evince/agents.hpp"
#include "evince/error.hpp"

namespace evince {

namespace {

struct Hit {
    std::size_t position;
    std::string name;
    double percent;
};

// Words that precede a percentage in prose but never name a disease.
constexpr std::array<std::string_view, 8> kNotADisease = {
    "probability", "probabilities", "confidence", "likelihood",
    "total",       "sum",           "certainty",  "overall"};

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        lines.emplace_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

// Removes "(...)" groups that do not hold a percentage, innermost first.
std::string strip_qualifiers(std::string line) {
    static const std::regex qualifier(R"(\([^()%\n]*\))");
    std::string previous;
    do {
        previous = line;
        line = std::regex_replace(line, qualifier, " ");
    } while (line != previous);
    return line;
}

std::string clean_name(std::string name) {
    for (char& c : name) {
        if (c == '*' || c == '_' || c == '`' || c == '"' || c == '\\') {
            c = ' ';
        }
    }
    // Bullet glyph U+2022 in UTF-8.
    for (std::size_t p = name.find("\xE2\x80\xA2"); p != std::string::npos;
         p = name.find("\xE2\x80\xA2")) {
        name.replace(p, 3, " ");
    }
    std::string out = canonicalize(name);
    static const std::regex leading_marker(R"(^(?:[-+]\s*|\d+[.)]\s*)+)");
    out = std::regex_replace(out, leading_marker, "");
    for (std::string_view conj : {"and ", "or "}) {
        if (out.rfind(conj, 0) == 0) {
            out.erase(0, conj.size());
        }
    }
    while (!out.empty() && std::string_view(".,;:-'").find(out.back()) != std::string_view::npos) {
        out.pop_back();
    }
    while (!out.empty() && out.front() == ' ') {
        out.erase(0, 1);
    }
    while (!out.empty() && out.back() == ' ') {
        out.pop_back();
    }
    return out;
}

bool plausible_name(const std::string& name) {
    if (name.empty() || name.size() > 80) {
        return false;
    }
    if (!std::isalpha(static_cast<unsigned char>(name.front()))) {
        return false;
    }
    const auto words = std::count(name.begin(), name.end(), ' ') + 1;
    if (words > 8) {
        return false;
    }
    return std::find(kNotADisease.begin(), kNotADisease.end(), name) == kNotADisease.end();
}

void collect(const std::regex& pattern, std::string& line, std::size_t line_offset,
             std::vector<Hit>& hits) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (auto it = std::sregex_iterator(line.begin(), line.end(), pattern);
         it != std::sregex_iterator(); ++it) {
        const std::smatch& m = *it;
        const std::string name = clean_name(m[1].str());
        const double pct = std::stod(m[2].str());
        if (plausible_name(name) && pct >= 0.0 && pct <= 100.0) {
            hits.push_back({line_offset + static_cast<std::size_t>(m.position(0)), name, pct});
        }
        spans.emplace_back(static_cast<std::size_t>(m.position(0)),
                           static_cast<std::size_t>(m.length(0)));
    }
    // Consumed text becomes a delimiter so later patterns cannot reuse it.
    for (const auto& [pos, len] : spans) {
        std::fill_n(line.begin() + static_cast<std::ptrdiff_t>(pos), len, ',');
    }
}

}  // namespace

PredictionSet parse_predictions(std::string_view raw) {
    // "Dengue Fever (60%)"
    static const std::regex paren(R"(([^,;:()\n%]+?)\s*\(\s*(\d{1,3}(?:\.\d+)?)\s*%\s*\))");
    // "Hepatitis C: 40%", "Hepatitis C - 35%", with en/em dashes too.
    static const std::regex labelled(
        "([^,;:\\n%]+?)\\s*(?::|-|\xE2\x80\x93|\xE2\x80\x94)\\s*(\\d{1,3}(?:\\.\\d+)?)\\s*%");

    std::vector<Hit> hits;
    std::size_t offset = 0;
    for (const std::string& original : split_lines(raw)) {
        std::string line = strip_qualifiers(original);
        collect(paren, line, offset, hits);
        collect(labelled, line, offset, hits);
        offset += original.size() + 1;
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const Hit& a, const Hit& b) { return a.position < b.position; });

    std::map<Label, double> masses;
    for (const Hit& h : hits) {
        masses.emplace(Label(h.name), h.percent / 100.0);  // first mention wins
    }
    if (masses.empty()) {
        throw Error(ErrorCode::ParseFailure, "no prediction patterns found", std::string(raw));
    }
    double sum = 0.0;
    for (const auto& [_, m] : masses) {
        sum += m;
    }
    if (sum <= 0.0) {
        throw Error(ErrorCode::ParseFailure, "all parsed probabilities are zero", std::string(raw));
    }
    // Within 1e-6 of one counts as normalized; above one the reply overshot
    // 100% and is rescaled so the set stays a valid sub-distribution.
    if (std::abs(sum - 1.0) <= 1e-6 || sum > 1.0) {
        return normalize(masses);
    }
    return PredictionSet(std::move(masses));
}

}  // namespace evince
