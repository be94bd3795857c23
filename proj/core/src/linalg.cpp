#include "sysid/linalg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace sysid::linalg {

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> symmetric_eigs(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("symmetric eigendecomposition: matrix not square");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigendecomposition failed");
  }
  return es;
}

Matrix spd_power(const Matrix& m, double exponent, double floor_rel) {
  const auto es = symmetric_eigs(m);
  const Vector& evals = es.eigenvalues();
  const double lambda_max = evals.maxCoeff();
  if (!(lambda_max > 0.0)) {
    throw std::domain_error("matrix is not positive definite");
  }
  Vector powered(evals.size());
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals[i] <= floor_rel * lambda_max) {
      throw std::domain_error("matrix is numerically singular");
    }
    powered[i] = std::pow(evals[i], exponent);
  }
  return es.eigenvectors() * powered.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Matrix spd_sqrt(const Matrix& m) { return spd_power(m, 0.5, 1e-14); }

Matrix spd_inv_sqrt(const Matrix& m) { return spd_power(m, -0.5, 1e-13); }

Matrix spd_inverse(const Matrix& m) { return spd_power(m, -1.0, 1e-13); }

double spectral_radius(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("spectral_radius: matrix not square");
  }
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalue computation failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()[0];
}

std::pair<double, double> symmetric_eig_range(const Matrix& m) {
  const auto es = symmetric_eigs(m);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

Vector singular_values(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

double schatten_norm(const Matrix& m, double p) {
  if (!(p >= 1.0)) {
    throw std::invalid_argument("schatten_norm: p must be >= 1");
  }
  const Vector sv = singular_values(m);
  if (std::isinf(p)) return sv.size() > 0 ? sv[0] : 0.0;
  if (p == 2.0) return sv.norm();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) sum += std::pow(sv[i], p);
  return std::pow(sum, 1.0 / p);
}

Matrix solve_discrete_lyapunov(const Matrix& a, const Matrix& q) {
  if (a.rows() != a.cols() || q.rows() != q.cols() || a.rows() != q.rows()) {
    throw std::invalid_argument("solve_discrete_lyapunov: dimension mismatch");
  }
  Matrix p = 0.5 * (q + q.transpose());
  Matrix power = a;
  for (int iter = 0; iter < 200; ++iter) {
    const Matrix update = power * p * power.transpose();
    p += update;
    if (update.norm() <= 1e-13 * p.norm()) {
      return 0.5 * (p + p.transpose());
    }
    power = power * power;
  }
  throw std::runtime_error(
      "solve_discrete_lyapunov: no convergence (is rho(A) < 1?)");
}

double relative_error(const Matrix& x, const Matrix& y) {
  const double scale = y.norm();
  return (x - y).norm() / std::max(scale, std::numeric_limits<double>::min());
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace sysid::linalg
