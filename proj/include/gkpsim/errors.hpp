#pragma once

#include <stdexcept>
#include <string>

namespace gkpsim {

// Bad parameters or inconsistent configuration. The CLI maps this to exit
// code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical diagnostic failed (truncated envelope, degenerate density,
// nonconvergent sum). The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Grid does not resolve or contain the state it is asked to hold.
struct GridError : NumericalError {
    explicit GridError(const std::string& msg) : NumericalError(msg) {}
};

}  // namespace gkpsim
