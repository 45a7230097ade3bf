#pragma once

#include <stdexcept>
#include <string>

namespace mmcon {

// Base of all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad inputs, shapes, files or configuration. CLI maps these to exit code 1.
struct ValidationError : Error {
  using Error::Error;
};

// Numerically degenerate state (NaN/Inf losses, vanishing norms).
// CLI maps these to exit code 2.
struct NumericalError : Error {
  using Error::Error;
};

struct DimensionMismatch : ValidationError { using ValidationError::ValidationError; };
struct InvalidConfig : ValidationError { using ValidationError::ValidationError; };
struct IoError : ValidationError { using ValidationError::ValidationError; };

// losses
struct EmptyPositiveSet : ValidationError { using ValidationError::ValidationError; };
struct EmptyDenominator : ValidationError { using ValidationError::ValidationError; };

// multiview
struct SingletonBatch : ValidationError { using ValidationError::ValidationError; };
struct MixedDimensions : ValidationError { using ValidationError::ValidationError; };

// data
struct MalformedHeader : ValidationError { using ValidationError::ValidationError; };
struct InconsistentRow : ValidationError { using ValidationError::ValidationError; };
struct DuplicatePatient : ValidationError { using ValidationError::ValidationError; };
struct TooManyFolds : ValidationError { using ValidationError::ValidationError; };

// experiment
struct EmptyTestSet : ValidationError { using ValidationError::ValidationError; };
struct EmptyCounts : ValidationError { using ValidationError::ValidationError; };
struct NoPairs : ValidationError { using ValidationError::ValidationError; };
struct MalformedCheckpoint : ValidationError { using ValidationError::ValidationError; };

// numerics
struct ZeroNorm : NumericalError { using NumericalError::NumericalError; };
struct DegenerateEmbedding : NumericalError { using NumericalError::NumericalError; };
struct NonFiniteLoss : NumericalError { using NumericalError::NumericalError; };

}  // namespace mmcon
