#pragma once

#include <stdexcept>
#include <string>

namespace bnmimo {

// Two families: a DomainError means the request itself is outside the
// model's validity region; a NumericError means a valid request could not
// be evaluated to the requested accuracy. The CLI maps them to exit codes
// 2 and 3 respectively.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class InfeasibleDistortion : public DomainError {
public:
    using DomainError::DomainError;
};

class InsufficientBottleneck : public DomainError {
public:
    using DomainError::DomainError;
};

/// E[1/lambda | lambda_min >= 0] does not exist when K == M.
class DivergentStatistic : public DomainError {
public:
    using DomainError::DomainError;
};

class UnsupportedLimit : public DomainError {
public:
    using DomainError::DomainError;
};

/// The requested joint-entropy estimate has too many cells for the sample size.
class CellExplosion : public DomainError {
public:
    using DomainError::DomainError;
};

class NonConvergence : public NumericError {
public:
    using NumericError::NumericError;
};

class BracketFailure : public NumericError {
public:
    using NumericError::NumericError;
};

class InsufficientAcceptance : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace bnmimo
