#pragma once

#include <stdexcept>
#include <string>

namespace pv5 {

/// Machine-readable failure codes. The CLI writes the code name verbatim
/// into report.json, so names are part of the output contract.
enum class ErrorCode {
    ZeroGaugeParameter,
    InvalidTheta,
    ZeroBasePoint,
    PoleEvaluation,
    ChartSingular,
    SingularGauge,
    StepCollapse,
    InvalidPath,
    PathThroughOrigin,
    FitFailed,
    UndefinedU,
    StencilOutOfRange,
    EquationSingular,
    LoopThroughSingularity,
    BlowUpOnPath,
    WindingMismatch,
    Precondition,
    BadConfig,
};

inline const char* code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::ZeroGaugeParameter:     return "ZERO_GAUGE_PARAMETER";
        case ErrorCode::InvalidTheta:           return "INVALID_THETA";
        case ErrorCode::ZeroBasePoint:          return "ZERO_BASE_POINT";
        case ErrorCode::PoleEvaluation:         return "POLE_EVALUATION";
        case ErrorCode::ChartSingular:          return "CHART_SINGULAR";
        case ErrorCode::SingularGauge:          return "SINGULAR_GAUGE";
        case ErrorCode::StepCollapse:           return "STEP_COLLAPSE";
        case ErrorCode::InvalidPath:            return "INVALID_PATH";
        case ErrorCode::PathThroughOrigin:      return "PATH_THROUGH_ORIGIN";
        case ErrorCode::FitFailed:              return "FIT_FAILED";
        case ErrorCode::UndefinedU:             return "UNDEFINED_U";
        case ErrorCode::StencilOutOfRange:      return "STENCIL_OUT_OF_RANGE";
        case ErrorCode::EquationSingular:       return "EQUATION_SINGULAR";
        case ErrorCode::LoopThroughSingularity: return "LOOP_THROUGH_SINGULARITY";
        case ErrorCode::BlowUpOnPath:           return "BLOW_UP_ON_PATH";
        case ErrorCode::WindingMismatch:        return "WINDING_MISMATCH";
        case ErrorCode::Precondition:           return "PRECONDITION";
        case ErrorCode::BadConfig:              return "BAD_CONFIG";
    }
    return "UNKNOWN";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace pv5
