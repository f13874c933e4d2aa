#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmb {

using Vector = std::vector<double>;

// Error hierarchy. The CLI maps each class onto an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data rejected (dimension mismatch, non-finite feature, bad label).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Parameter outside its admissible range (rho <= 0, delta outside (0,1), ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Witness (u, rho) violates a bound's hypotheses.
class InfeasibleWitness : public Error {
public:
    using Error::Error;
};

/// Trace was produced under settings the bound does not cover.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

inline constexpr double kRelTol = 1e-9;
inline constexpr double kAbsTol = 1e-12;
inline constexpr double kUnitBallSlack = 1e-9;

inline bool approx_equal(double a, double b, double rel = kRelTol, double abs = kAbsTol) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs;
}

/// a <= b up to relative tolerance.
inline bool approx_le(double a, double b, double rel = kRelTol, double abs = kAbsTol) {
    return a <= b + rel * std::max(std::abs(a), std::abs(b)) + abs;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace pmb
