#pragma once

#include <stdexcept>
#include <string>

namespace perfectoid {

// Mismatched or invalid field/ring parameters.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Denominator-bound overflow, window underflow, exhausted series precision.
class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivisionByZeroError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class NonUnitError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NonConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedResidueRootError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateRootError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotPrimitiveError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class OracleTooLargeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SchemaError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when an internal consistency assertion fails.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace perfectoid
