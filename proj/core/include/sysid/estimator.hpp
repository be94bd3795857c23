#pragma once

#include <map>
#include <vector>

#include "sysid/gramians.hpp"
#include "sysid/trajectory.hpp"
#include "sysid/types.hpp"

namespace sysid {

/// Least-squares estimate A_hat = Yᵀ X (Xᵀ X)^{-1} over the stacked batch,
/// computed through a singular value decomposition of X. Throws
/// SingularGramError when sigma_min(X)² <= 1e-12 * sigma_max(X)².
Matrix ols_fit(const TrajectoryBatch& batch);

/// Parameter-error summary for an estimate against the true dynamics.
/// schatten_sq maps p -> ||Delta||²_{S_p}; p = inf keys the operator norm.
struct ErrorReport {
  Matrix a_hat;
  Matrix delta;
  double frob_sq = 0.0;
  double op_sq = 0.0;
  double weighted_sq = 0.0;  ///< Tr(Delta Gamma_T Deltaᵀ)
  std::map<double, double> schatten_sq;
};

ErrorReport error_report(const Matrix& a_hat, const ProblemInstance& instance,
                         const GramianSet& gramians,
                         const std::vector<double>& ps);

/// Schatten-p norm of a matrix (not squared); p = inf is the operator norm.
double schatten_norm(const Matrix& m, double p);

}  // namespace sysid
