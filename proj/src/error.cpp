#include "markov/error.hpp"

namespace markov {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::NonFiniteValue: return "NonFiniteValue";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::NonPositiveDt: return "NonPositiveDt";
        case Errc::DegenerateDimension: return "DegenerateDimension";
        case Errc::PolarLatitude: return "PolarLatitude";
        case Errc::InsufficientData: return "InsufficientData";
        case Errc::InsufficientSpan: return "InsufficientSpan";
        case Errc::NegativeGap: return "NegativeGap";
        case Errc::FileNotFound: return "FileNotFound";
        case Errc::SchemaMismatch: return "SchemaMismatch";
        case Errc::UnparsableRow: return "UnparsableRow";
        case Errc::NonPositiveBandwidth: return "NonPositiveBandwidth";
        case Errc::NotStochastic: return "NotStochastic";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::TrainingDiverged: return "TrainingDiverged";
        case Errc::TrajectoryTooShort: return "TrajectoryTooShort";
        case Errc::NonStationarySpec: return "NonStationarySpec";
        case Errc::EmptyTrajectory: return "EmptyTrajectory";
        case Errc::EmptyCohort: return "EmptyCohort";
        case Errc::ZeroPooledVariance: return "ZeroPooledVariance";
        case Errc::ZeroDenominatorVariance: return "ZeroDenominatorVariance";
        case Errc::InvalidDf: return "InvalidDf";
        case Errc::InvalidInput: return "InvalidInput";
        case Errc::DomainError: return "DomainError";
        case Errc::OutOfRangeOrder: return "OutOfRangeOrder";
        case Errc::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& what, std::optional<std::size_t> row)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), row_(row) {}

}  // namespace markov
