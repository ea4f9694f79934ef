#pragma once

#include <stdexcept>
#include <string>

namespace affine2f {

// Bad user input: parameters, arguments, config keys.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Integrator step underflow, quadrature or series non-convergence.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace affine2f
