#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "swapsym/errors.hpp"

namespace swapsym {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kPsdTolerance = 1e-12;

/// Throws unless `m` is symmetric and positive semidefinite within
/// kPsdTolerance. Returns the symmetrized matrix.
inline Matrix require_psd(const Matrix& m, const std::string& what) {
  if (m.rows() != m.cols()) throw InputError(what + ": matrix is not square");
  if (!m.allFinite()) throw InputError(what + ": matrix has non-finite entries");
  if (m.size() == 0) return m;
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kPsdTolerance) throw InputError(what + ": matrix is not symmetric");
  Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kPsdTolerance)
    throw InputError(what + ": matrix is not positive semidefinite");
  return sym;
}

/// Symmetric square root with negative eigenvalues clipped at zero.
inline Matrix psd_sqrt(const Matrix& m) {
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

/// Non-conjugating bilinear form w^T M w for complex w.
inline Complex bilinear(const ComplexVector& w, const Matrix& m) {
  return (w.transpose() * (m.cast<Complex>() * w))(0);
}

/// Matrix that swaps coordinates i and j (0-based) of R^dim.
inline Matrix swap_matrix(std::size_t dim, std::size_t i, std::size_t j) {
  Matrix p = Matrix::Identity(dim, dim);
  p.row(i).swap(p.row(j));
  return p;
}

inline Vector swapped(Vector x, std::size_t i, std::size_t j) {
  std::swap(x(i), x(j));
  return x;
}

inline Vector unit(std::size_t dim, std::size_t k) {
  Vector e = Vector::Zero(dim);
  e(k) = 1.0;
  return e;
}

}  // namespace swapsym
