// errors.hpp — error taxonomy mapped onto CLI exit codes.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pmc {

// Bad configuration input (schema, units, physics preconditions). Exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Solver or optimizer failure. Exit code 3. Carries the offending residuals
// so callers can report how far from convergence the computation stopped.
struct NumericalError : std::runtime_error {
    std::vector<double> residuals;
    explicit NumericalError(const std::string& what, std::vector<double> res = {})
        : std::runtime_error(what), residuals(std::move(res)) {}
};

// Filesystem / format failure. Exit code 4.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pmc
