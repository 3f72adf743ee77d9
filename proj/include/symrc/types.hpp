#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace symrc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

}  // namespace symrc
