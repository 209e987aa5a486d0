#pragma once

#include <stdexcept>
#include <string>

namespace fdg {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad arguments: empty grids, infeasible dimensions, invalid enum values.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

// Evaluation point outside the basis domain.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Two function representations do not share a basis.
class BasisMismatch : public Error {
public:
    explicit BasisMismatch(const std::string& msg) : Error(msg) {}
};

// An operation requiring orthonormality was given a non-orthonormal basis.
class InvalidBasis : public Error {
public:
    explicit InvalidBasis(const std::string& msg) : Error(msg) {}
};

// Least-squares fit with fewer observations than basis functions.
class UnderdeterminedError : public Error {
public:
    UnderdeterminedError(const std::string& msg, int num_obs, int basis_size)
        : Error(msg), num_obs(num_obs), basis_size(basis_size) {}
    int num_obs;
    int basis_size;
};

// Normal equations too ill-conditioned to solve reliably.
class ConditioningError : public Error {
public:
    ConditioningError(const std::string& msg, int num_obs, int basis_size, double condition)
        : Error(msg), num_obs(num_obs), basis_size(basis_size), condition(condition) {}
    int num_obs;
    int basis_size;
    double condition;
};

// Spectrum collapsed to zero where a positive spectral bound is required.
class DegenerateSpectrumError : public Error {
public:
    explicit DegenerateSpectrumError(const std::string& msg) : Error(msg) {}
};

// Input matrix violates a positive-semidefiniteness requirement.
class NotPsdError : public Error {
public:
    explicit NotPsdError(const std::string& msg) : Error(msg) {}
};

// Cholesky or similar factorization failed (matrix not positive definite).
class FactorizationError : public Error {
public:
    explicit FactorizationError(const std::string& msg) : Error(msg) {}
};

// Invalid run configuration (CLI / config file).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Unreadable, unparsable or inconsistent input data.
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

}  // namespace fdg
