#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace otseg {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Input bytes are not a decodable image of a supported kind.
class UnsupportedFormat : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// Two histograms that must carry the same total mass do not.
class MassMismatch : public Error {
public:
    MassMismatch(double lhs, double rhs)
        : Error("histogram masses differ: " + std::to_string(lhs) + " vs " + std::to_string(rhs)),
          lhs_mass(lhs), rhs_mass(rhs) {}

    double lhs_mass;
    double rhs_mass;
};

class NotConverged : public Error {
public:
    NotConverged(const std::string& what, double final_residual, std::size_t iters)
        : Error(what + " (residual " + std::to_string(final_residual) + " after " +
                std::to_string(iters) + " iterations)"),
          residual(final_residual), iterations(iters) {}

    double residual;
    std::size_t iterations;
};

class NumericalUnderflow : public Error {
public:
    using Error::Error;
};

/// A primal-dual iterate became non-finite.
class Diverged : public Error {
public:
    explicit Diverged(std::size_t iter)
        : Error("primal-dual iterate became non-finite at iteration " + std::to_string(iter)),
          iteration(iter) {}

    std::size_t iteration;
};

}  // namespace otseg
