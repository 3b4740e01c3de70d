#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace bvwave {

/** Scalar type */
using scalar_t = double;

/** Dynamic vector */
using vector_t = Eigen::Matrix<scalar_t, Eigen::Dynamic, 1>;

/** Dynamic matrix */
using matrix_t = Eigen::Matrix<scalar_t, Eigen::Dynamic, Eigen::Dynamic>;

/** Compressed sparse matrix */
using sparse_t = Eigen::SparseMatrix<scalar_t>;

using index_t = Eigen::Index;

}  // namespace bvwave
