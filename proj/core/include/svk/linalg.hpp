#pragma once

#include <Eigen/Dense>

namespace svk {

using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Largest singular value of a row-major rows x cols block.  Exact (closed form)
// when min(rows, cols) <= 3, symmetric eigensolver on the smaller Gram otherwise.
double spectral_norm(const double* a, int rows, int cols);
double spectral_norm(const Matrix& a);

// Largest eigenvalue of a symmetric 3x3 matrix (trigonometric closed form).
double sym3_max_eigenvalue(const double* s);

}  // namespace svk
