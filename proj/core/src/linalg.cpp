#include "svk/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace svk {

double sym3_max_eigenvalue(const double* s) {
  const double a = s[0], b = s[4], c = s[8];
  const double d = s[1], e = s[5], f = s[2];  // (0,1), (1,2), (0,2)
  const double p1 = d * d + e * e + f * f;
  if (p1 <= 1e-300 * (a * a + b * b + c * c + 1e-300)) return std::max({a, b, c});
  const double q = (a + b + c) / 3;
  const double p2 = (a - q) * (a - q) + (b - q) * (b - q) + (c - q) * (c - q) + 2 * p1;
  const double p = std::sqrt(p2 / 6);
  // B = (A - qI)/p, r = det(B)/2
  const double ba = (a - q) / p, bb = (b - q) / p, bc = (c - q) / p;
  const double bd = d / p, be = e / p, bf = f / p;
  const double det = ba * (bb * bc - be * be) - bd * (bd * bc - be * bf) + bf * (bd * be - bb * bf);
  const double r = std::clamp(det / 2, -1.0, 1.0);
  const double phi = std::acos(r) / 3;
  return q + 2 * p * std::cos(phi);
}

double spectral_norm(const double* a, int rows, int cols) {
  if (rows == 1 && cols == 1) return std::abs(a[0]);
  if (rows == 1 || cols == 1) {
    double s = 0;
    for (int i = 0; i < rows * cols; ++i) s += a[i] * a[i];
    return std::sqrt(s);
  }
  // Gram of the smaller side
  const int k = std::min(rows, cols);
  double g[9];
  if (k <= 3) {
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        double s = 0;
        if (rows <= cols)
          for (int l = 0; l < cols; ++l) s += a[i * cols + l] * a[j * cols + l];
        else
          for (int l = 0; l < rows; ++l) s += a[l * cols + i] * a[l * cols + j];
        g[i * k + j] = s;
      }
    if (k == 2) {
      const double tr = g[0] + g[3], det = g[0] * g[3] - g[1] * g[2];
      const double disc = std::max(0.0, tr * tr - 4 * det);
      return std::sqrt(std::max(0.0, (tr + std::sqrt(disc)) / 2));
    }
    return std::sqrt(std::max(0.0, sym3_max_eigenvalue(g)));
  }
  Eigen::Map<const RowMatrix> A(a, rows, cols);
  Matrix G = rows <= cols ? Matrix(A * A.transpose()) : Matrix(A.transpose() * A);
  Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double spectral_norm(const Matrix& a) {
  RowMatrix r = a;
  return spectral_norm(r.data(), static_cast<int>(r.rows()), static_cast<int>(r.cols()));
}

}  // namespace svk
