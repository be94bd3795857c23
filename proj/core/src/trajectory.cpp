#include "sysid/trajectory.hpp"

#include <stdexcept>

#include "sysid/parallel.hpp"
#include "sysid/rng.hpp"

namespace sysid {

TrajectoryBatch simulate_batch(const ProblemInstance& instance, int m, int T,
                               std::uint64_t seed, int threads) {
  if (m < 1 || T < 1) {
    throw std::invalid_argument("simulate_batch: need m >= 1 and T >= 1");
  }
  const int d = instance.d;
  TrajectoryBatch batch;
  batch.m = m;
  batch.T = T;
  batch.d = d;
  batch.seed = seed;
  batch.states.resize(static_cast<Eigen::Index>(m) * (T + 1), d);
  batch.noises.resize(static_cast<Eigen::Index>(m) * T, d);

  parallel_for(m, threads, [&](int i) {
    auto stream = rng::trajectory_stream(seed, 0, static_cast<std::uint64_t>(i));
    const Eigen::Index sbase = static_cast<Eigen::Index>(i) * (T + 1);
    const Eigen::Index nbase = static_cast<Eigen::Index>(i) * T;
    Vector x = instance.noise.sample(stream);  // x_1 = w_0
    batch.states.row(sbase) = x;
    for (int t = 1; t <= T; ++t) {
      const Vector w = instance.noise.sample(stream);
      batch.noises.row(nbase + t - 1) = w;
      x = instance.a * x + w;
      batch.states.row(sbase + t) = x;
    }
  });
  return batch;
}

namespace {

Matrix stack_states(const TrajectoryBatch& batch, int first_row) {
  Matrix out(static_cast<Eigen::Index>(batch.m) * batch.T, batch.d);
  for (int i = 0; i < batch.m; ++i) {
    out.middleRows(static_cast<Eigen::Index>(i) * batch.T, batch.T) =
        batch.states.middleRows(
            static_cast<Eigen::Index>(i) * (batch.T + 1) + first_row, batch.T);
  }
  return out;
}

}  // namespace

Matrix design_matrix(const TrajectoryBatch& batch) {
  return stack_states(batch, 0);
}

Matrix response_matrix(const TrajectoryBatch& batch) {
  return stack_states(batch, 1);
}

Matrix noise_matrix(const TrajectoryBatch& batch) { return batch.noises; }

Matrix empirical_state_covariance(const TrajectoryBatch& batch) {
  Matrix sum = Matrix::Zero(batch.d, batch.d);
  for (int i = 0; i < batch.m; ++i) {
    const auto x = batch.trajectory_states(i).topRows(batch.T);
    sum.noalias() += x.transpose() * x;
  }
  sum /= static_cast<double>(batch.m) * batch.T;
  return 0.5 * (sum + sum.transpose());
}

Matrix empirical_cross_moment(const TrajectoryBatch& batch) {
  Matrix sum = Matrix::Zero(batch.d, batch.d);
  for (int i = 0; i < batch.m; ++i) {
    const auto x = batch.trajectory_states(i).topRows(batch.T);
    sum.noalias() += batch.trajectory_noises(i).transpose() * x;
  }
  return sum / (static_cast<double>(batch.m) * batch.T);
}

double recursion_residual(const TrajectoryBatch& batch,
                          const ProblemInstance& instance) {
  double worst = 0.0;
  for (int i = 0; i < batch.m; ++i) {
    const auto xs = batch.trajectory_states(i);
    const Matrix residual = xs.bottomRows(batch.T) -
                            xs.topRows(batch.T) * instance.a.transpose() -
                            batch.trajectory_noises(i);
    worst = std::max(worst, residual.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace sysid
