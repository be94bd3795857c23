#pragma once

#include <optional>
#include <vector>

#include "sysid/noise.hpp"
#include "sysid/types.hpp"

namespace sysid {

/// An (M, rho) pair certifying ||A^k||_op <= M rho^k for every k >= 0.
struct StabilityCertificate {
  double m_const = 1.0;
  double rho = 0.0;
  bool valid = false;
  /// Power-sweep horizon prescribed for verification, max(200, 4*ceil(1/log(1/rho))).
  int k_check = 0;
};

/// Deterministic second-moment quantities of an instance at horizon T:
/// Sigma_t = cov(x_t), Gamma_T = (1/T) sum_t Sigma_t, and for strictly
/// stable A also the stationary covariance Sigma_inf, a stability
/// certificate, and the burn-in kappa(A).
struct GramianSet {
  std::vector<Matrix> sigma_t;  ///< Sigma_1..Sigma_T (empty beyond the storage cap)
  Matrix gamma_T;
  int T = 0;
  double spectral_radius = 0.0;
  bool strictly_stable = false;  ///< rho(A) < 1 - 1e-9
  std::optional<Matrix> sigma_inf;
  std::optional<StabilityCertificate> cert;
  std::optional<int> kappa;
};

/// Sigma_t sequences longer than this are not retained (Gamma_T is still exact).
inline constexpr int kSigmaSequenceCap = 20000;

GramianSet compute_gramians(const ProblemInstance& instance, int T);

/// Certificate with rho = (1 + rho(A))/2 and the minimal consistent M from a
/// power sweep. The sweep stops at the first k* with ||A^{k*}|| <= rho^{k*};
/// sub-multiplicativity then extends the bound to all k. valid is false when
/// rho(A) >= 1 - 1e-9.
StabilityCertificate stability_certificate(const Matrix& a);

/// kappa(A) = 2 * max(1, ceil(log(sqrt(2||Sigma_W||) M / sqrt((1-rho^2)
/// lambda_min(Sigma_inf))) / log(1/rho))), an even integer >= 2.
/// Throws if the certificate is invalid or Sigma_inf is unavailable.
int kappa_burn_in(const ProblemInstance& instance,
                  const StabilityCertificate& cert, const GramianSet& gramians);

/// Gamma_k = (1/k) sum_{t=1}^{k} Sigma_t, streaming (no sequence storage).
Matrix gamma_average(const ProblemInstance& instance, int k);

struct IsometryCheck {
  bool passes = false;    ///< eigs of Gamma_T^{-1/2} Gamma_kappa Gamma_T^{-1/2} in [1/4, 4]
  double eig_min = 0.0;
  double eig_max = 0.0;
  bool quarter_ok = false;  ///< Gamma_T >= Sigma_inf / 4
  int kappa = 0;
};

/// Checks the burn-in isometry at horizon T >= kappa(A); throws for
/// non-stable instances or T < kappa(A).
IsometryCheck check_gramian_isometry(const ProblemInstance& instance, int T);

}  // namespace sysid
