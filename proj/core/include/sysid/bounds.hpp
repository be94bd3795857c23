#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sysid/gramians.hpp"
#include "sysid/types.hpp"

namespace sysid::bounds {

/// Universal constants hidden by the paper's ≲; everything defaults to 1 and
/// is overridable from config so bound-level claims stay ratio-based.
struct BoundConstants {
  double c1 = 1.0;        ///< Frobenius many-trajectory higher-order term
  double c2 = 1.0;        ///< Frobenius stable higher-order term
  double c_op_lead = 1.0; ///< operator-norm leading term
  double c_op_aip = 1.0;  ///< operator-norm Burkholder higher-order term
  double c_op_snm = 1.0;  ///< operator-norm self-normalized higher-order term
  double c_burnin = 1.0;  ///< every burn-in requirement
  double c_prior = 1.0;   ///< prior-art bounds

  std::map<std::string, double> as_map() const;
};

enum class Regime { kManyTrajectories, kStable };

enum class BurninKind {
  kFrobMany13,
  kFrobStable14,
  kOpMany16,
  kOpStable17,
  kThm31Many,
  kThm31Stable,
  kThm32Many,
  kThm32Stable,
  kTGeKappa,
};

std::string to_string(BurninKind kind);

struct BurninResult {
  BurninKind kind;
  double required = 0.0;
  double actual = 0.0;
  bool satisfied = false;
};

/// CLT-optimal Frobenius target Tr(Sigma_W) Tr(Gamma_T^{-1}) / (mT); this is
/// the exact asymptotic limit of mT * E||Delta||_F^2.
double clt_rate_frobenius(const Matrix& sigma_w, const Matrix& gamma_T,
                          double m, double T);

/// CLT-optimal operator target
/// (||Sigma_W|| Tr(Gamma_T^{-1}) + Tr(Sigma_W)/lambda_min(Gamma_T)) / (mT).
double clt_rate_operator(const Matrix& sigma_w, const Matrix& gamma_T,
                         double m, double T);

/// max{Tr(M), log(d) ||M||_op} for PSD M.
double tr_bar(const Matrix& m, int d);

/// Which scaling sends the OLS error to a Gaussian limit.
enum class LimitRegime { kFixedTManyTraj, kStableLongT, kJoint };

/// Kronecker factors (row, col) of the limiting covariance of the scaled
/// column-major vec(A_hat - A): (Gamma_T^{-1}/T, Sigma_W) for sqrt(m) scaling,
/// (Sigma_inf^{-1}/m, Sigma_W) for sqrt(T), (Sigma_inf^{-1}, Sigma_W) for
/// sqrt(mT). Stable/Joint regimes require a strictly stable instance.
std::pair<Matrix, Matrix> asymptotic_covariance(LimitRegime regime,
                                                const ProblemInstance& instance,
                                                const GramianSet& gramians,
                                                int m, int T);

struct ThmBound {
  double leading = 0.0;
  double higher = 0.0;
  std::vector<BurninResult> burnin;
  bool dim_warning = false;  ///< set by the operator bound when d < 8
};

/// Frobenius-norm bound: leading (1+q) * CLT target plus the regime's
/// higher-order term, with the associated burn-in requirements evaluated.
ThmBound thm31_bound(const ProblemInstance& instance, const GramianSet& gramians,
                     int m, int T, double q, Regime regime,
                     const BoundConstants& constants = {});

/// Operator-norm bound with the log^2(d) leading factor.
ThmBound thm32_bound(const ProblemInstance& instance, const GramianSet& gramians,
                     int m, int T, Regime regime,
                     const BoundConstants& constants = {});

struct PriorBoundParams {
  double k_psi2 = 1.0;              ///< max coordinate psi_2-norm K
  double k_vec = 1.0;               ///< directional psi_2-norm K_vec
  double delta = 0.36787944117144233;  ///< failure probability, default e^{-1}
  std::optional<double> j_a;        ///< sum_t ||A^t||, filled when available
};

struct PriorBounds {
  double prior_frob = 0.0;               ///< K² d (d + log(1/δ)) / (mT λ_min)
  double prior_excess_conversion = 0.0;  ///< K² d² / (mT λ_min(Gamma_T))
  double prior_op = 0.0;                 ///< K_vec² d / (mT λ_min)
};

/// Prior-art bounds with constant 1; λ_min is taken from Sigma_inf when the
/// instance is strictly stable, else from Gamma_T.
PriorBounds prior_bounds(const PriorBoundParams& params,
                         const GramianSet& gramians, int d, int m, int T,
                         const BoundConstants& constants = {});

/// Evaluates one burn-in inequality; returns both sides and the verdict.
BurninResult burnin_check(BurninKind kind, const ProblemInstance& instance,
                          const GramianSet& gramians, int m, int T, double q,
                          const BoundConstants& constants = {});

/// J(A) = sum_t ||A^t||, truncated at the certificate sweep horizon with the
/// geometric tail M rho^{K+1}/(1-rho) added.
double truncated_j_a(const Matrix& a, const StabilityCertificate& cert);

/// Everything the paper evaluates in closed form, bundled for reporting.
struct RateReport {
  double gamma_f_target = 0.0;
  double gamma_op_target = 0.0;
  ThmBound thm31_many;
  std::optional<ThmBound> thm31_stable;
  ThmBound thm32_many;
  std::optional<ThmBound> thm32_stable;
  PriorBounds prior;
  std::vector<BurninResult> burnin;
  std::map<std::string, double> constants_used;
};

RateReport evaluate_rates(const ProblemInstance& instance,
                          const GramianSet& gramians, int m, int T, double q,
                          const PriorBoundParams& prior_params = {},
                          const BoundConstants& constants = {});

}  // namespace sysid::bounds
