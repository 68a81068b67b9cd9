#pragma once

#include <stdexcept>
#include <string>

namespace fsvr {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input syntax (CSV header, config file grammar).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Structurally valid input with unusable content (bad values, duplicates,
/// too little data, corrupt or wrong-version model files).
class DataError : public Error {
public:
    using Error::Error;
};

/// Caller passed an argument outside an operation's domain.
class ParamError : public Error {
public:
    using Error::Error;
};

/// An operation was applied to a value that violates its required state,
/// e.g. extracting rules from a plain-kernel regressor.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Training failed. Carries the best KKT violation the solver reached
/// when the failure is non-convergence.
class TrainingError : public Error {
public:
    explicit TrainingError(const std::string& what, double best_violation = 0.0)
        : Error(what), best_kkt_violation(best_violation) {}

    double best_kkt_violation;
};

}  // namespace fsvr
