#pragma once

#include <stdexcept>
#include <string>

namespace polyproc {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two polynomials (or a polynomial and an operator) live on different bases,
/// or a matrix does not match the size of its basis.
class BasisMismatch : public Error {
public:
    using Error::Error;
};

/// A state point, time, or degree lies outside the domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The generator does not respect the grading, or does not kill constants.
class GradingError : public Error {
public:
    using Error::Error;
};

/// Krylov closure exceeded its dimension budget.
class NotLocallyFinite : public Error {
public:
    using Error::Error;
};

class NotStronglyReducing : public Error {
public:
    using Error::Error;
};

/// A product of two basis entries is not available in the product table.
class ProductGap : public Error {
public:
    using Error::Error;
};

/// Malformed model, basis or generator input.
class InputError : public Error {
public:
    using Error::Error;
};

/// Simulation produced a non-finite state.
class SimulationError : public Error {
public:
    using Error::Error;
};

}  // namespace polyproc
