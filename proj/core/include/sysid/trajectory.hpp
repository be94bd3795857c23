#pragma once

#include <cstdint>

#include "sysid/noise.hpp"
#include "sysid/types.hpp"

namespace sysid {

/// m trajectories of x_{t+1} = A x_t + w_t started from x_0 = 0.
///
/// states holds the m x (T+1) x d array trajectory-major: rows
/// [i*(T+1) .. i*(T+1)+T] are x_1 .. x_{T+1} of trajectory i. noises holds
/// the m x T x d array of w_1 .. w_T (the regression residuals). The
/// generating draw w_0 is not stored separately since x_1 = w_0.
struct TrajectoryBatch {
  Matrix states;
  Matrix noises;
  int m = 0;
  int T = 0;
  int d = 0;
  std::uint64_t seed = 0;

  /// x_t of trajectory i, t in [1, T+1].
  Eigen::Ref<const Eigen::RowVectorXd> state(int i, int t) const {
    return states.row(static_cast<Eigen::Index>(i) * (T + 1) + t - 1);
  }
  /// w_t of trajectory i, t in [1, T].
  Eigen::Ref<const Eigen::RowVectorXd> noise(int i, int t) const {
    return noises.row(static_cast<Eigen::Index>(i) * T + t - 1);
  }
  /// The (T+1) x d state block of trajectory i.
  Eigen::Ref<const Matrix> trajectory_states(int i) const {
    return states.middleRows(static_cast<Eigen::Index>(i) * (T + 1), T + 1);
  }
  /// The T x d noise block of trajectory i.
  Eigen::Ref<const Matrix> trajectory_noises(int i) const {
    return noises.middleRows(static_cast<Eigen::Index>(i) * T, T);
  }
};

/// Simulates a batch with per-trajectory substreams derived from `seed`;
/// the result is bit-identical for any `threads` value.
TrajectoryBatch simulate_batch(const ProblemInstance& instance, int m, int T,
                               std::uint64_t seed, int threads = 1);

/// Stacked design matrix X (mT x d) with rows {x_t, t=1..T} per trajectory.
Matrix design_matrix(const TrajectoryBatch& batch);
/// Stacked response matrix Y (mT x d) with rows {x_{t+1}, t=1..T}.
Matrix response_matrix(const TrajectoryBatch& batch);
/// Stacked noise matrix W (mT x d) with rows {w_t, t=1..T}.
Matrix noise_matrix(const TrajectoryBatch& batch);

/// Empirical covariance XᵀX / (mT), accumulated without stacking.
Matrix empirical_state_covariance(const TrajectoryBatch& batch);

/// Cross moment Q_hat = WᵀX / (mT), accumulated without stacking.
Matrix empirical_cross_moment(const TrajectoryBatch& batch);

/// max over (i, t) of ||x_{t+1} - A x_t - w_t||_inf.
double recursion_residual(const TrajectoryBatch& batch,
                          const ProblemInstance& instance);

}  // namespace sysid
