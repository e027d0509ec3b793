#pragma once

#include <stdexcept>
#include <string>

namespace collapse {

/// Arithmetic or comparison between quantities of different dimensions.
class DimensionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed quantity text or unknown unit token.
class ParseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A domain precondition failed (nonpositive mass, basis mismatch, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure during time integration; carries the failing time.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double time_s)
        : std::runtime_error(what), time_s_(time_s) {}

    double time_s() const noexcept { return time_s_; }

private:
    double time_s_;
};

}  // namespace collapse
