#pragma once

#include <stdexcept>
#include <string>

namespace kronrev {

enum class ErrorKind {
    SingularBlock,
    SingularSubmatrix,
    InvalidSubset,
    SizeMismatch,
    ValidationFailed,
    Infeasible,
    StructureViolation,
    NoGroupFound,
    DegenerateSystem,
    AssumptionBreach,
    MalformedReduction,
    InconsistentAttachment,
    RankDeficient,
    RoundTripMismatch,
    Format,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::SingularBlock: return "SingularBlock";
    case ErrorKind::SingularSubmatrix: return "SingularSubmatrix";
    case ErrorKind::InvalidSubset: return "InvalidSubset";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::ValidationFailed: return "ValidationFailed";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::StructureViolation: return "StructureViolation";
    case ErrorKind::NoGroupFound: return "NoGroupFound";
    case ErrorKind::DegenerateSystem: return "DegenerateSystem";
    case ErrorKind::AssumptionBreach: return "AssumptionBreach";
    case ErrorKind::MalformedReduction: return "MalformedReduction";
    case ErrorKind::InconsistentAttachment: return "InconsistentAttachment";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::RoundTripMismatch: return "RoundTripMismatch";
    case ErrorKind::Format: return "Format";
    }
    return "Unknown";
}

}  // namespace kronrev
