#include "sysid/estimator.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "sysid/linalg.hpp"

namespace sysid {

Matrix ols_fit(const TrajectoryBatch& batch) {
  const Matrix x = design_matrix(batch);
  const Matrix y = response_matrix(batch);
  if (x.rows() < x.cols()) {
    throw SingularGramError("ols_fit: fewer rows than states, XtX is singular");
  }
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double smax = sv[0];
  const double smin = sv[sv.size() - 1];
  if (!(smin * smin > 1e-12 * smax * smax)) {
    throw SingularGramError("ols_fit: Gram matrix XtX is numerically singular");
  }
  // A_hat = Yt X (Xt X)^{-1} = (V S^{-1} Ut Y)t with X = U S Vt.
  const Matrix a_hat_t =
      svd.matrixV() * sv.cwiseInverse().asDiagonal() *
      (svd.matrixU().transpose() * y);
  return a_hat_t.transpose();
}

double schatten_norm(const Matrix& m, double p) {
  return linalg::schatten_norm(m, p);
}

ErrorReport error_report(const Matrix& a_hat, const ProblemInstance& instance,
                         const GramianSet& gramians,
                         const std::vector<double>& ps) {
  ErrorReport report;
  report.a_hat = a_hat;
  report.delta = a_hat - instance.a;
  const Vector sv = linalg::singular_values(report.delta);
  const double op = sv.size() > 0 ? sv[0] : 0.0;
  report.op_sq = op * op;
  report.weighted_sq =
      (report.delta * gramians.gamma_T * report.delta.transpose()).trace();

  auto schatten_sq_of = [&](double p) {
    if (std::isinf(p)) return report.op_sq;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) sum += std::pow(sv[i], p);
    return std::pow(sum, 2.0 / p);
  };
  for (const double p : ps) {
    if (!(p >= 1.0)) {
      throw std::invalid_argument("error_report: Schatten p must be >= 1");
    }
    report.schatten_sq[p] = schatten_sq_of(p);
  }
  report.schatten_sq[2.0] = schatten_sq_of(2.0);
  report.frob_sq = report.schatten_sq[2.0];
  const double inf = std::numeric_limits<double>::infinity();
  report.schatten_sq[inf] = report.op_sq;
  return report;
}

}  // namespace sysid
