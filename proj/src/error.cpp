// SPDX-License-Identifier: Apache-2.0

#include "evince/error.hpp"

namespace evince {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::AllZeroWeights: return "AllZeroWeights";
        case ErrorCode::NotNormalized: return "NotNormalized";
        case ErrorCode::EmptySymptoms: return "EmptySymptoms";
        case ErrorCode::BackendTimeout: return "BackendTimeout";
        case ErrorCode::BackendHttpError: return "BackendHttpError";
        case ErrorCode::ParseFailure: return "ParseFailure";
        case ErrorCode::FixtureExhausted: return "FixtureExhausted";
        case ErrorCode::ZeroTotalConfidence: return "ZeroTotalConfidence";
        case ErrorCode::EmptyHistory: return "EmptyHistory";
        case ErrorCode::NoEligiblePair: return "NoEligiblePair";
        case ErrorCode::MalformedCsv: return "MalformedCsv";
        case ErrorCode::MissingDiseaseColumn: return "MissingDiseaseColumn";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Config: return "Config";
    }
    return "Unknown";
}

int Error::http_status() const {
    if (code_ != ErrorCode::BackendHttpError || detail_.empty()) {
        return 0;
    }
    try {
        return std::stoi(detail_);
    } catch (const std::exception&) {
        return 0;
    }
}

}  // namespace evince
