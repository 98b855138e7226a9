#pragma once

#include <stdexcept>

namespace lpoly {

/// Input violates a precondition that callers are expected to resample around
/// (zero vector handed to the Minkowski map, and so on).
class DegenerateInputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Geometric degeneracy: lower-dimensional hull, singular covariance.
class DegeneracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Request exceeds a desk-scale cap (dimension, subset count, facet shape).
class CapabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lpoly
