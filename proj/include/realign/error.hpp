#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace realign {

enum class ErrorCode {
    ZeroVector,
    DimensionMismatch,
    DuplicateId,
    UnknownId,
    NotFrozen,
    NothingMaskable,
    UnalignableMask,
    EmptyBatch,
    NonFinite,
    InvalidLogProb,
    TokenOutOfRange,
    CountMismatch,
    MalformedInput,
    InvalidConfig,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code; every library failure is an Error.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace realign
