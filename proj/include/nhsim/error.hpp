#pragma once

#include <stdexcept>
#include <string>

namespace nhsim {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A parameter record violates its invariants (negative rate, size mismatch, ...).
class InvalidParameter : public Error {
public:
    using Error::Error;
};

// The requested construction is undefined at an exceptional point (defective eigenbasis).
class ExceptionalPointError : public Error {
public:
    using Error::Error;
};

class EigensolverError : public Error {
public:
    using Error::Error;
};

// Integration failure; carries the simulation time at which it happened.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double time)
        : Error(what + " at t=" + std::to_string(time)), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

// A diagnostic could not be evaluated on the supplied data.
class DiagnosticError : public Error {
public:
    using Error::Error;
};

// Configuration problems: unknown scenario, parse errors, bad overrides.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace nhsim
