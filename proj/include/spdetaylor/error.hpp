#pragma once

#include <stdexcept>
#include <string>

namespace spdetaylor
{
enum class ErrorCode
{
    InvalidArgument,
    ParentNotSmaller,
    LengthMismatch,
    NotActive,
    NoActiveTree,
    DerivativeOrderExceeded,
    NonPositiveStep,
    FactorizationFailed,
    MissingTimeIntegrals,
    UnsupportedDepth,
    NotLinearConstant,
    InsufficientPaths,
    Config,
    Io,
    AssertionFailed,
};

//! Name used in messages, e.g. "NotActive".
const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error
{
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

//! Raised when replaying a derivation path hits a non-active address.
class DerivationError : public Error
{
  public:
    DerivationError(std::size_t step, const std::string& what)
        : Error(ErrorCode::NotActive, what), step_(step)
    {
    }

    //! 1-based index of the failing step.
    std::size_t step() const noexcept { return step_; }

  private:
    std::size_t step_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what)
{
    throw Error(code, what);
}
}  // namespace spdetaylor
