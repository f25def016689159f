#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace slicewatch {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Invalid dimensions or mismatched vector/matrix shapes.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Bad parameter values or inconsistent configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem / stream failures; message carries the path.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed measurement CSV; `row` is the 1-based line number.
struct CsvError : std::runtime_error {
    long row;
    CsvError(const std::string& msg, long row_number)
        : std::runtime_error(msg + " (row " + std::to_string(row_number) + ")"), row(row_number) {}
};

}  // namespace slicewatch
