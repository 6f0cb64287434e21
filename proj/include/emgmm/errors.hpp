#pragma once

#include <stdexcept>
#include <string>

namespace emgmm {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Model construction: weights do not sum to 1 within tolerance.
struct WeightsNotNormalized : Error {
    using Error::Error;
};

/// Model construction: a mixing weight is zero or negative.
struct NonPositiveWeight : Error {
    using Error::Error;
};

/// Model construction: two component means coincide (some R_ij = 0).
struct DuplicateMeans : Error {
    using Error::Error;
};

/// A NaN or infinity reached a computation that requires finite input.
struct NonFiniteInput : Error {
    using Error::Error;
};

/// Estimate and model disagree on K or d.
struct ShapeMismatch : Error {
    using Error::Error;
};

/// Scalar argument outside its documented domain.
struct DomainError : Error {
    using Error::Error;
};

/// Center scheme asked for more components than the dimension supports.
struct DimensionTooSmall : Error {
    using Error::Error;
};

/// A responsibility-weighted denominator vanished for one component.
struct DegenerateComponent : Error {
    DegenerateComponent(int component_, const std::string& what_)
        : Error(what_), component(component_) {}
    int component;
    int iteration = -1;  // filled in by run() when a multi-step driver fails
};

/// Estimate lies outside the region the operation requires.
struct RegionViolation : Error {
    using Error::Error;
};

/// Node doubling did not reach the requested quadrature accuracy.
struct QuadratureNotConverged : Error {
    using Error::Error;
};

/// Power iteration failed to stabilize within the iteration cap.
struct PowerIterationNotConverged : Error {
    using Error::Error;
};

/// The exponential moment stayed non-finite after widening the bracket.
struct MomentExplosion : Error {
    using Error::Error;
};

/// Filesystem-level failure (open/read/write).
struct IoError : Error {
    using Error::Error;
};

/// Malformed content in a data or config file.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace emgmm
