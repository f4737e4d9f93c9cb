#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wtree {

enum class ErrorKind {
    MalformedTree,
    InvalidPoint,
    OutOfInterval,
    EqualEnds,
    ConstantGeodesic,
    FlagInvalid,
    PlanNotOptimal,
    MarginalMismatch,
    LeafyTree,
    NotDiracBased,
    NonUnitMeasure,
    InvalidMeasure,
    NotAntipodal,
    DiagonalMass,
    NotRealizable,
    MalformedForRadon,
    InconsistentData,
    SolverFailure,
    ParseError,
};

std::string_view to_string(ErrorKind kind);

/// Domain error raised by every wtree operation. The kind mirrors the error
/// names used in the CLI output.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace wtree
