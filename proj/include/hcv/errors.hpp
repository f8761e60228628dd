#pragma once

#include <stdexcept>
#include <string>

namespace hcv {

/// Raised when an argument violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a softmax has no admissible entry to put mass on.
class EmptySupport : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised on malformed image, flow or weights files.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a volume buffer would exceed the configured allocation cap.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hcv
