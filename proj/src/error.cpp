#include "realign/error.hpp"

namespace realign {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::UnknownId: return "UnknownId";
        case ErrorCode::NotFrozen: return "NotFrozen";
        case ErrorCode::NothingMaskable: return "NothingMaskable";
        case ErrorCode::UnalignableMask: return "UnalignableMask";
        case ErrorCode::EmptyBatch: return "EmptyBatch";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::InvalidLogProb: return "InvalidLogProb";
        case ErrorCode::TokenOutOfRange: return "TokenOutOfRange";
        case ErrorCode::CountMismatch: return "CountMismatch";
        case ErrorCode::MalformedInput: return "MalformedInput";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace realign
