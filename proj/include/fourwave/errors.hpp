// errors.hpp — error taxonomy mapped to CLI exit codes

#pragma once

#include <stdexcept>
#include <string>

namespace fourwave {

// invalid inputs or configuration (exit code 2)
struct validation_error : std::invalid_argument {
    explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// non-finite values, solver non-convergence (exit code 3)
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// memory / dimension caps exceeded, checked before allocation (exit code 4)
struct resource_error : std::runtime_error {
    explicit resource_error(const std::string& msg) : std::runtime_error(msg) {}
};

// missing prerequisite state (e.g. history not yet populated)
struct state_error : std::logic_error {
    explicit state_error(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace fourwave
