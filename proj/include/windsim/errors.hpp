#pragma once
#include <stdexcept>
#include <string>

namespace windsim {

// Bad user input: malformed config, inconsistent files, out-of-range parameters.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical blow-up detected mid-run (NaN/Inf moments, inverted elements, CFL breach).
struct SimulationError : std::runtime_error {
    explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Optimizer could not make progress (line search collapsed, non-finite loss).
struct OptimizationError : std::runtime_error {
    explicit OptimizationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / binary format failures.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace windsim
