#include "sbx/error.hpp"

namespace sbx
{
std::string_view to_string(ErrorCode code)
{
    switch (code)
    {
        case ErrorCode::NonIntegrableLevyMeasure: return "NonIntegrableLevyMeasure";
        case ErrorCode::NegativeArgument: return "NegativeArgument";
        case ErrorCode::MomentDivergence: return "MomentDivergence";
        case ErrorCode::ConditionA1Violated: return "ConditionA1Violated";
        case ErrorCode::NotSupercritical: return "NotSupercritical";
        case ErrorCode::NotNormalized: return "NotNormalized";
        case ErrorCode::NonPositiveRate: return "NonPositiveRate";
        case ErrorCode::TruncationFailure: return "TruncationFailure";
        case ErrorCode::RangeViolation: return "RangeViolation";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::BoundaryLeak: return "BoundaryLeak";
        case ErrorCode::BlowUp: return "BlowUp";
        case ErrorCode::ClipExceeded: return "ClipExceeded";
        case ErrorCode::NotInH: return "NotInH";
        case ErrorCode::NonConvergedFront: return "NonConvergedFront";
        case ErrorCode::MissingBank: return "MissingBank";
        case ErrorCode::InvalidEps: return "InvalidEps";
        case ErrorCode::ParticleCapExceeded: return "ParticleCapExceeded";
        case ErrorCode::ConditionA3Required: return "ConditionA3Required";
        case ErrorCode::EmptyBank: return "EmptyBank";
        case ErrorCode::InfiniteIntensity: return "InfiniteIntensity";
        case ErrorCode::Empty: return "Empty";
        case ErrorCode::NegativeSample: return "NegativeSample";
        case ErrorCode::UnknownRecipe: return "UnknownRecipe";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    }
    return "Unknown";
}
}  // namespace sbx
