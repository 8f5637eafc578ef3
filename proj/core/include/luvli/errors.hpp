#pragma once

#include <stdexcept>
#include <string>

namespace luvli {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical domain errors.
struct NonPositiveDefiniteError : Error { using Error::Error; };
struct NonDifferentiablePointError : Error { using Error::Error; };
struct AllNonPositiveError : Error { using Error::Error; };

// Shape and argument errors.
struct InvalidDimensionsError : Error { using Error::Error; };
struct DimensionMismatchError : Error { using Error::Error; };
struct InvalidArgumentError : Error { using Error::Error; };
struct EmptyInputError : Error { using Error::Error; };

// Fitting.
struct DegenerateError : Error { using Error::Error; };

// Metrics.
struct MissingEyeCornersError : Error { using Error::Error; };
struct NoVisibleLandmarksError : Error { using Error::Error; };
struct EmptyAfterFilterError : Error { using Error::Error; };
struct MissingBboxError : Error { using Error::Error; };

// Calibration.
struct TooFewRecordsError : Error { using Error::Error; };
struct TooFewPointsError : Error { using Error::Error; };

// File formats.
struct SyntaxError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct CountMismatchError : Error { using Error::Error; };

}  // namespace luvli
