#pragma once

#include <stdexcept>
#include <string>

namespace covertic {

/// Base class for every domain error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class AlphabetMismatch : public Error {
public:
    using Error::Error;
};

class AbsoluteContinuityViolation : public Error {
public:
    using Error::Error;
};

class SimplexViolation : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

class EmptySubset : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A standing channel assumption does not hold for the given spec.
class AssumptionViolation : public Error {
public:
    using Error::Error;
};

/// The chi-squared distance (or the Gaussian lambda) vanished where the
/// region formulas divide by it.
class DegenerateChiSquared : public Error {
public:
    using Error::Error;
};

class NoFeasibleAllocation : public Error {
public:
    using Error::Error;
};

class InfeasibleSchedule : public Error {
public:
    using Error::Error;
};

/// An exact enumeration or pointwise evaluation would exceed its hard scale
/// guard; carries the computed cost so callers can see how far off they are.
class ScaleGuardExceeded : public Error {
public:
    ScaleGuardExceeded(const std::string& msg, double cost)
        : Error(msg), cost_(cost) {}
    double cost() const { return cost_; }

private:
    double cost_;
};

class PowerCapExceeded : public Error {
public:
    using Error::Error;
};

class SpecFormatError : public Error {
public:
    using Error::Error;
};

}  // namespace covertic
