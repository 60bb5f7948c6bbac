#pragma once

#include <stdexcept>
#include <string>

namespace scatlab {

/// Violated precondition or malformed input (CLI exit status 1).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Intersection root could not be certified; usually a degenerate near-tangency.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reversed trajectory did not retrace the forward one event-for-event.
class ReversibilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be read or written (CLI exit status 2).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace scatlab
