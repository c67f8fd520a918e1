#pragma once

#include <stdexcept>
#include <string>

namespace gossip_coverage {

/// Thrown when an operation is called with arguments that break its contract.
class precondition_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown by the map and file loaders on unreadable or inconsistent input.
class input_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gossip_coverage
