#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "sysid/gramians.hpp"
#include "sysid/trajectory.hpp"
#include "sysid/types.hpp"

namespace sysid::diagnostics {

/// Pathwise second-order decomposition Delta = Q_hat Gamma_T^{-1} +
/// Q_hat (Sigma_hat^{-1} - Gamma_T^{-1}) of the OLS error, with the squared
/// Schatten norms of the total and both terms per requested p.
struct DecompositionReport {
  Matrix q_hat;      ///< WᵀX / (mT)
  Matrix sigma_hat;  ///< XᵀX / (mT)
  Matrix sigma_bar;  ///< Gamma_T^{-1/2} Sigma_hat Gamma_T^{-1/2}
  std::optional<Matrix> sigma_tilde_kappa;  ///< Gamma_kappa^{-1/2} Sigma_hat Gamma_kappa^{-1/2}
  Matrix delta;      ///< A_hat - A from the OLS fit
  std::map<double, double> t1_sq;     ///< p -> ||Q_hat Gamma_T^{-1}||²_{S_p}
  std::map<double, double> t2_sq;     ///< p -> ||Q_hat (Sigma_hat^{-1} - Gamma_T^{-1})||²_{S_p}
  std::map<double, double> total_sq;  ///< p -> ||Delta||²_{S_p}
  double iso_error = 0.0;             ///< ||I - Sigma_bar||_op
  double decomposition_residual = 0.0;  ///< rel. ||Delta - Q_hat Sigma_hat^{-1}||
};

DecompositionReport decompose(const TrajectoryBatch& batch,
                              const ProblemInstance& instance,
                              const GramianSet& gramians,
                              const std::vector<double>& ps);

/// The flattened martingale difference sequence
/// D_j = (mT)^{-1} w_{t_j}^{(i_j)} (x_{t_j}^{(i_j)})ᵀ Gamma_T^{-1} with
/// i_j = floor((j-1)/T)+1 and t_j = ((j-1) mod T)+1.
struct MartingaleSequence {
  std::vector<Matrix> increments;
  std::vector<std::pair<int, int>> order;  ///< (i_j, t_j), 1-based
};

MartingaleSequence martingale_increments(const TrajectoryBatch& batch,
                                         const ProblemInstance& instance,
                                         const GramianSet& gramians);

/// Relative Frobenius residuals of the two quadratic-variation closed forms:
/// sum_j E_{j-1}[D_jᵀD_j] = (Tr(Sigma_W)/mT) Gamma_T^{-1/2} Sigma_bar Gamma_T^{-1/2}
/// sum_j E_{j-1}[D_jD_jᵀ] = (Tr(Gamma_T^{-1} Sigma_bar)/mT) Sigma_W
/// The left sides are assembled increment by increment using the analytic
/// conditional expectations E[wwᵀ] = Sigma_W and E[||w||²] = Tr(Sigma_W).
struct QvResiduals {
  double residual_col = 0.0;
  double residual_row = 0.0;
};

QvResiduals quadratic_variation_identities(const TrajectoryBatch& batch,
                                           const ProblemInstance& instance,
                                           const GramianSet& gramians);

/// vᵀ Sigma_bar v rewritten as a quadratic form of the concatenated whitened
/// noise (w_0 .. w_{T-1} per trajectory) through the block-Toeplitz map.
/// trace_q is Tr(Q(v)), which the whitened normalization forces to 1.
struct QuadFormCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double trace_q = 0.0;
};

QuadFormCheck block_toeplitz_quadratic_form(const TrajectoryBatch& batch,
                                            const ProblemInstance& instance,
                                            const GramianSet& gramians,
                                            const Vector& v);

/// Monte Carlo r-th moment of the isometry error ||I - Sigma_bar|| per
/// (m, T) grid point, with the theoretical envelope (constant 1) alongside.
struct IsometryProbeRow {
  int m = 0;
  int T = 0;
  double moment = 0.0;   ///< (E ||I - Sigma_bar||^r)^{1/r} estimate
  double stderr_ = 0.0;
  double envelope = 0.0;
};

std::vector<IsometryProbeRow> isometry_probe(const ProblemInstance& instance,
                                             const std::vector<int>& m_grid,
                                             const std::vector<int>& T_grid,
                                             double r, int N,
                                             std::uint64_t seed,
                                             int threads = 0);

/// Empirical first-window small-ball probabilities
/// Pr((1/k) sum_t <v, x_t>² <= eps vᵀ Gamma_k v) against the (c eps)^alpha
/// envelope, maximized and averaged over v_count random unit directions.
struct SmallBallRow {
  double eps = 0.0;
  double prob_max = 0.0;
  double prob_mean = 0.0;
  double stderr_ = 0.0;  ///< binomial stderr at prob_max
  double envelope = 0.0;
};

std::vector<SmallBallRow> small_ball_probe(const ProblemInstance& instance,
                                           int k,
                                           const std::vector<double>& eps_grid,
                                           int N, std::uint64_t seed,
                                           int v_count, double c, double alpha,
                                           int threads = 0);

/// Monte Carlo E||A G B||²_op for iid standard Gaussian G against the
/// two-sided envelope; the lower constant 1/2 is exact.
struct ChevetResult {
  double mc_mean = 0.0;
  double stderr_ = 0.0;
  double lower_env = 0.0;
  double upper_env = 0.0;
};

ChevetResult chevet_oracle(const Matrix& a, const Matrix& b, int N,
                           std::uint64_t seed, double upper_constant = 8.0,
                           int threads = 0);

/// Per-replicate ingredients of the matrix Burkholder inequality, exposed so
/// the aggregation can be tested on synthetic inputs.
struct BurkholderSample {
  double m_op_sq = 0.0;       ///< ||sum_j D_j||²_op
  double col_pow = 0.0;       ///< ||sum_j E_{j-1} D_jᵀD_j||_op^{r/2}
  double row_pow = 0.0;       ///< ||sum_j E_{j-1} D_jD_jᵀ||_op^{r/2}
  double schatten_sum = 0.0;  ///< sum_j ||D_j||^r_{S_r}
};

struct BurkholderProbe {
  double lhs = 0.0;            ///< (E||M_{mT}||²_op)^{1/2}
  double term_col = 0.0;
  double term_row = 0.0;
  double term_schatten = 0.0;
  double ratio = 0.0;          ///< lhs / (r * (term_col + term_row + term_schatten))
  double r = 0.0;              ///< max(2, log d)
  bool dim_warning = false;    ///< d < 8
};

BurkholderProbe aggregate_burkholder(const std::vector<BurkholderSample>& samples,
                                     double r);

BurkholderProbe burkholder_probe(const ProblemInstance& instance,
                                 const GramianSet& gramians, int m, int T,
                                 int N, std::uint64_t seed, int threads = 0);

}  // namespace sysid::diagnostics
