#pragma once

#include <Eigen/Dense>

namespace slrbm {

// Row-major throughout: batches are laid out one example per row, and the
// checkpoint format stores W row by row (one hidden unit per row).
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace slrbm
