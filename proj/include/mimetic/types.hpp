#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace mimetic {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Thrown when an operation is well-formed but outside the supported family
/// (as opposed to std::invalid_argument for malformed inputs).
struct unsupported_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace mimetic
