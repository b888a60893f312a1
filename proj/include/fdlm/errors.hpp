#pragma once

#include <stdexcept>
#include <string>

namespace fdlm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Kernel parameters outside their domain (non-positive or non-finite).
class ParameterDomainError : public Error {
public:
    using Error::Error;
};

/// A covariance block could not be factorized even at the largest jitter.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// Data and model live on different grids, or a dyadic point is missing.
class GridMismatchError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// A chain with zero variance (or otherwise unusable for autocorrelation analysis).
class DegenerateChainError : public Error {
public:
    using Error::Error;
};

class ChainTooShortError : public Error {
public:
    using Error::Error;
};

/// Numerical failure inside the sampler, tagged with the iteration and the step that failed.
class SamplerError : public Error {
public:
    SamplerError(long iteration, std::string step, const std::string& cause)
        : Error("sampler failed at iteration " + std::to_string(iteration) + " in step '" + step +
                "': " + cause),
          iteration_(iteration),
          step_(std::move(step)) {}

    [[nodiscard]] long iteration() const noexcept { return iteration_; }
    [[nodiscard]] const std::string& step() const noexcept { return step_; }

private:
    long iteration_;
    std::string step_;
};

}  // namespace fdlm
