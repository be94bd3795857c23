#pragma once

#include "sysid/types.hpp"

namespace sysid::linalg {

/// Symmetric PSD square root via eigendecomposition. Eigenvalues below
/// 1e-14 * lambda_max are treated as a rank deficiency and rejected.
Matrix spd_sqrt(const Matrix& m);

/// Symmetric inverse square root; rejects eigenvalues <= 1e-13 * lambda_max.
Matrix spd_inv_sqrt(const Matrix& m);

/// Symmetric inverse via eigendecomposition with the same floor as
/// spd_inv_sqrt.
Matrix spd_inverse(const Matrix& m);

double spectral_radius(const Matrix& a);

/// Largest singular value.
double operator_norm(const Matrix& m);

/// Smallest/largest eigenvalue of a symmetric matrix.
std::pair<double, double> symmetric_eig_range(const Matrix& m);

Vector singular_values(const Matrix& m);

/// Schatten-p norm from singular values; p = inf gives the operator norm.
/// Throws std::invalid_argument for p < 1.
double schatten_norm(const Matrix& m, double p);

/// Solves P = A P Aᵀ + Q by the doubling recurrence; requires rho(A) < 1.
/// Stops when the update norm drops below 1e-13 * ||P||_F.
Matrix solve_discrete_lyapunov(const Matrix& a, const Matrix& q);

/// Relative Frobenius distance ||x - y||_F / max(||y||_F, eps).
double relative_error(const Matrix& x, const Matrix& y);

/// Kronecker product (row_factor ⊗ col_factor), block (i,j) = a_ij * B.
Matrix kronecker(const Matrix& a, const Matrix& b);

}  // namespace sysid::linalg
