#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace condensa {

using Index = long;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

}  // namespace condensa
