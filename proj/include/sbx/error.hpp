#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sbx
{
enum class ErrorCode
{
    NonIntegrableLevyMeasure,
    NegativeArgument,
    MomentDivergence,
    ConditionA1Violated,
    NotSupercritical,
    NotNormalized,
    NonPositiveRate,
    TruncationFailure,
    RangeViolation,
    InvalidArgument,
    BoundaryLeak,
    BlowUp,
    ClipExceeded,
    NotInH,
    NonConvergedFront,
    MissingBank,
    InvalidEps,
    ParticleCapExceeded,
    ConditionA3Required,
    EmptyBank,
    InfiniteIntensity,
    Empty,
    NegativeSample,
    UnknownRecipe,
    ConfigInvalid,
};

std::string_view to_string(ErrorCode code);

//! Library exception; the code identifies the failed precondition.
class Error : public std::runtime_error
{
  public:
    Error(ErrorCode code, std::string const& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what)
        , code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

inline void require(bool ok, ErrorCode code, std::string const& what)
{
    if (!ok)
        throw Error(code, what);
}

}  // namespace sbx
