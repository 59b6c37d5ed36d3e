#pragma once

#include <stdexcept>
#include <string>

namespace idyn {

/// Bad arguments: out-of-domain points, malformed sizes, invalid parameters.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Floating point breakdown (NaN, overflow, singular systems).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// A mathematical precondition of an algorithm does not hold
/// (non-contractive map, non-summable series, ...).
class PreconditionError : public std::runtime_error {
public:
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

/// Iteration limit reached before the requested tolerance.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : NumericalError(what), last_residual_(last_residual) {}

    [[nodiscard]] double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// A rate experiment produced a vanishing or non-finite error ratio.
class DegenerateExperiment : public NumericalError {
public:
    explicit DegenerateExperiment(const std::string& what) : NumericalError(what) {}
};

} // namespace idyn
