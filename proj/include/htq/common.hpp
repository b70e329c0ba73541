#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace htq {

inline constexpr const char* kVersion = "0.1.0";

// Error kinds carried by every HtqError. The CLI maps them to exit codes:
// usage/contract -> 2, input/parse -> 3, numerical -> 4.
enum class ErrKind {
    NoTailSamples,
    InvalidGmin,
    DegenerateSamples,
    OutOfSupport,
    InvalidAlpha,
    OddSplit,
    OutOfRange,
    IndexOutOfRange,
    IndexTooLarge,
    TruncatedPayload,
    SupportMismatch,
    LengthMismatch,
    InvalidK,
    BudgetTooSmall,
    AlphaBelowGmin,
    GammaOutOfRange,
    InvalidEta,
    DimensionMismatch,
    CorruptMessage,
    IncompatibleConfigs,
    NoConvergence,
    IoError,
    ParseError,
    UsageError,
};

inline const char* err_kind_name(ErrKind k) {
    switch (k) {
        case ErrKind::NoTailSamples: return "NoTailSamples";
        case ErrKind::InvalidGmin: return "InvalidGmin";
        case ErrKind::DegenerateSamples: return "DegenerateSamples";
        case ErrKind::OutOfSupport: return "OutOfSupport";
        case ErrKind::InvalidAlpha: return "InvalidAlpha";
        case ErrKind::OddSplit: return "OddSplit";
        case ErrKind::OutOfRange: return "OutOfRange";
        case ErrKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrKind::IndexTooLarge: return "IndexTooLarge";
        case ErrKind::TruncatedPayload: return "TruncatedPayload";
        case ErrKind::SupportMismatch: return "SupportMismatch";
        case ErrKind::LengthMismatch: return "LengthMismatch";
        case ErrKind::InvalidK: return "InvalidK";
        case ErrKind::BudgetTooSmall: return "BudgetTooSmall";
        case ErrKind::AlphaBelowGmin: return "AlphaBelowGmin";
        case ErrKind::GammaOutOfRange: return "GammaOutOfRange";
        case ErrKind::InvalidEta: return "InvalidEta";
        case ErrKind::DimensionMismatch: return "DimensionMismatch";
        case ErrKind::CorruptMessage: return "CorruptMessage";
        case ErrKind::IncompatibleConfigs: return "IncompatibleConfigs";
        case ErrKind::NoConvergence: return "NoConvergence";
        case ErrKind::IoError: return "IoError";
        case ErrKind::ParseError: return "ParseError";
        case ErrKind::UsageError: return "UsageError";
    }
    return "Unknown";
}

class HtqError : public std::runtime_error {
public:
    HtqError(ErrKind kind, const std::string& message)
        : std::runtime_error(std::string(err_kind_name(kind)) + ": " + message), kind_(kind) {}

    ErrKind kind() const { return kind_; }

private:
    ErrKind kind_;
};

[[noreturn]] inline void raise(ErrKind kind, const std::string& message) {
    throw HtqError(kind, message);
}

inline void require(bool ok, ErrKind kind, const std::string& message) {
    if (!ok) raise(kind, message);
}

// Exit-code categories per the CLI contract.
inline int exit_code_for(ErrKind k) {
    switch (k) {
        case ErrKind::IoError:
        case ErrKind::ParseError:
        case ErrKind::CorruptMessage:
        case ErrKind::TruncatedPayload:
        case ErrKind::NoTailSamples:
        case ErrKind::DegenerateSamples:
            return 3;
        case ErrKind::AlphaBelowGmin:
        case ErrKind::GammaOutOfRange:
        case ErrKind::NoConvergence:
            return 4;
        default:
            return 2;
    }
}

}  // namespace htq
