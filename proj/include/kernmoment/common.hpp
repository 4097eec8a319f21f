#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace kernmoment {

// Row-major so that the path recursions walk contiguous memory along a row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Error taxonomy. The CLI maps each class onto a distinct exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Violated numeric precondition, failed factorisation, exceeded budget (exit code 3).
class NumericError : public Error {
public:
    using Error::Error;
};

// File could not be read or written, or its contents are malformed (exit code 4).
class IoError : public Error {
public:
    using Error::Error;
};

/// Binomial coefficient C(n, k) as a double; 0 when k > n.
double binomial(std::int64_t n, std::int64_t k);

}  // namespace kernmoment
