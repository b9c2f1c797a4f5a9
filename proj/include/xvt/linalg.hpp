#pragma once

#include "xvt/matrix.hpp"

namespace xvt::linalg {

/// Thin SVD a = u * diag(sigma) * v^T with k = min(rows, cols).
/// u (m x k) and v (n x k) have orthonormal columns; sigma is nonincreasing.
/// Column signs are fixed so the largest-magnitude entry of each left
/// singular vector is positive.
struct SvdResult {
  Matrix u;
  Vec sigma;
  Matrix v;
};

SvdResult thin_svd(const Matrix& a);

/// Orthonormal complement of a D x N matrix with orthonormal columns:
/// returns R (D x (D-N)) with R^T P = 0 and R^T R = I.
Matrix orthonormal_complement(const Matrix& p);

/// Symmetric eigendecomposition by cyclic Jacobi; eigenvalues descending.
struct EigResult {
  Vec values;
  Matrix vectors;  // columns are eigenvectors
};

EigResult sym_eig(const Matrix& a);

/// Symmetric PSD square root. Eigenvalues below eigen_floor * max(lambda, 0)
/// are clamped to zero before taking the root.
Matrix psd_sqrt(const Matrix& q, double eigen_floor = 1e-10);

/// Numerical rank: number of singular values above rel_tol * sigma_max.
std::size_t numerical_rank(const Vec& sigma, double rel_tol = 1e-10);

}  // namespace xvt::linalg
