#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace markov {

enum class Errc {
    DimensionMismatch,
    NonFiniteValue,
    LengthMismatch,
    NonPositiveDt,
    DegenerateDimension,
    PolarLatitude,
    InsufficientData,
    InsufficientSpan,
    NegativeGap,
    FileNotFound,
    SchemaMismatch,
    UnparsableRow,
    NonPositiveBandwidth,
    NotStochastic,
    EmptyInput,
    TrainingDiverged,
    TrajectoryTooShort,
    NonStationarySpec,
    EmptyTrajectory,
    EmptyCohort,
    ZeroPooledVariance,
    ZeroDenominatorVariance,
    InvalidDf,
    InvalidInput,
    DomainError,
    OutOfRangeOrder,
    InvalidConfig,
};

std::string_view errc_name(Errc code) noexcept;

/// Data or contract error raised by the library. The code is stable and is
/// what callers (and the CLI exit-code mapping) should dispatch on.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what, std::optional<std::size_t> row = std::nullopt);

    Errc code() const noexcept { return code_; }
    /// Row index for UnparsableRow (1-based data row, header excluded).
    std::optional<std::size_t> row() const noexcept { return row_; }

private:
    Errc code_;
    std::optional<std::size_t> row_;
};

}  // namespace markov
