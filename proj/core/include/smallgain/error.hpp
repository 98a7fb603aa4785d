#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace smallgain {

/// Failure categories raised by the library. The CLI prints `error_name()`
/// verbatim, so the names are part of the command-line contract.
enum class ErrorKind {
    InvalidArgument,
    OutOfRange,
    ParseError,
    RejectedNotClassK,
    IncompatibleMaf,
    TooLarge,
    WrongAggregation,
    NotLinearizable,
    NotHomogeneous,
    NoConvergence,
    NotInOmega,
    Stalled,
    NotBounded,
    SeedNotFound,
    PathStalled,
    NotIrreducible,
    LambdaNotContractive,
    CycleConditionFails,
    EmptyGap,
    BisectionFailure,
    SpliceFailure,
    BlockSgcFails,
    GeneralCondFails,
    NotHurwitz,
    BadParameters,
    Diverged,
    ConfigError,
};

std::string_view error_name(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept { return error_name(kind_); }

private:
    ErrorKind kind_;
};

/// Parse failure with the byte offset into the source text.
class ParseError : public Error {
public:
    ParseError(std::size_t position, const std::string& message)
        : Error(ErrorKind::ParseError,
                "at position " + std::to_string(position) + ": " + message),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

}  // namespace smallgain
