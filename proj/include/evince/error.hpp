// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evince {

enum class ErrorCode {
    InvalidArgument,
    AllZeroWeights,
    NotNormalized,
    EmptySymptoms,
    BackendTimeout,
    BackendHttpError,
    ParseFailure,
    FixtureExhausted,
    ZeroTotalConfidence,
    EmptyHistory,
    NoEligiblePair,
    MalformedCsv,
    MissingDiseaseColumn,
    Io,
    Config,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the engine. `detail()` carries the payload that
/// goes with the code: the HTTP status for BackendHttpError, the offending
/// line number for MalformedCsv, the verbatim backend text for ParseFailure.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string detail = {})
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code),
          detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

    /// HTTP status for BackendHttpError (0 when the connection itself failed).
    int http_status() const;

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace evince
