#pragma once

#include <stdexcept>
#include <string>

namespace migedu {

/// Malformed input: schema, hierarchy, or header problems. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The requested indicator cannot be computed from the available data
/// (unbound field, empty population at risk, ...). Maps to CLI exit code 3.
class InsufficientDataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace migedu
