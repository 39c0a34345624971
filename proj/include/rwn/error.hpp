#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rwn {

/// Precondition violated by the caller (bad shape, out-of-range value).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative solve hit its iteration budget.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual, std::size_t iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    std::size_t iterations() const noexcept { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t iteration)
        : std::runtime_error(what), iteration_(iteration) {}

    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

/// Malformed file or stream.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedVersion : public FormatError {
public:
    using FormatError::FormatError;
};

} // namespace rwn
