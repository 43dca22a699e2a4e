#pragma once

#include <stdexcept>
#include <string>

namespace riskgen {

// sup of a conjugate-type problem is +infinity, or an argument lies outside the domain
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// h >= h0 for the active penalty
class HorizonError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// malformed input data: unsorted knots, weights not summing to one, bad grid, CFL, ...
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// a computed quantity broke a structural bound the scheme must satisfy
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when the computational grid cannot hold the requested evaluation window.
class WindowError : public std::runtime_error {
public:
    WindowError(const std::string& what, double required_widening)
        : std::runtime_error(what), widening_(required_widening) {}

    /// Amount by which each side of the grid must be extended.
    double required_widening() const { return widening_; }

private:
    double widening_;
};

}  // namespace riskgen
