#pragma once

#include <stdexcept>
#include <string>

namespace asyrk {

enum class ErrorCode {
    IndexOutOfRange,
    DuplicateEntry,
    ZeroRow,
    ZeroColumn,
    NotNormalized,
    DimensionMismatch,
    PowerIterationDiverged,
    NonFinite,
    ComponentNotInSupport,
    Inconsistent,
    TooLarge,
    InvalidRho,
    MissingStats,
    StepTooLarge,
    ZeroLambdaMin,
    InvalidGamma,
    NonPositiveData,
    InsufficientData,
    NonPositiveSigma,
    SigmaUnavailable,
    InfeasibleSpec,
    ThreadSpawnFailure,
    IoError,
    InvalidArgument,
};

const char* error_code_name(ErrorCode c);

/// Library-wide exception. `code()` identifies the domain error; the CLI
/// maps it to exit code 1 with a JSON payload on stderr.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
}

} // namespace asyrk
