#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sysid/gramians.hpp"
#include "sysid/noise.hpp"
#include "sysid/rng.hpp"
#include "sysid/trajectory.hpp"
#include "sysid/types.hpp"

namespace testsupport {

using sysid::Matrix;
using sysid::Vector;

/// Builds a batch by replaying explicit noise draws w_0..w_T per trajectory
/// (row t of `draws[i]` is w_t). Lets tests pin exact recursions.
inline sysid::TrajectoryBatch replay_batch(const sysid::ProblemInstance& instance,
                                           const std::vector<Matrix>& draws) {
  const int m = static_cast<int>(draws.size());
  const int T = static_cast<int>(draws.front().rows()) - 1;
  const int d = instance.d;
  sysid::TrajectoryBatch batch;
  batch.m = m;
  batch.T = T;
  batch.d = d;
  batch.states.resize(static_cast<Eigen::Index>(m) * (T + 1), d);
  batch.noises.resize(static_cast<Eigen::Index>(m) * T, d);
  for (int i = 0; i < m; ++i) {
    Vector x = draws[i].row(0).transpose();  // x_1 = w_0
    batch.states.row(static_cast<Eigen::Index>(i) * (T + 1)) = x;
    for (int t = 1; t <= T; ++t) {
      const Vector w = draws[i].row(t).transpose();
      batch.noises.row(static_cast<Eigen::Index>(i) * T + t - 1) = w;
      x = instance.a * x + w;
      batch.states.row(static_cast<Eigen::Index>(i) * (T + 1) + t) = x;
    }
  }
  return batch;
}

/// Random SPD matrix B Bᵀ + 0.1 tr(B Bᵀ)/d I.
inline Matrix random_spd(int d, sysid::rng::Stream& stream) {
  Matrix b(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) b(i, j) = stream.normal();
  Matrix spd = b * b.transpose();
  return spd + (0.1 * spd.trace() / d) * Matrix::Identity(d, d);
}

/// Random instance with spectral radius scaled into (lo, hi) and random SPD
/// noise covariance.
inline sysid::ProblemInstance random_stable_instance(int d, double lo, double hi,
                                                     sysid::rng::Stream& stream) {
  Matrix a(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) a(i, j) = stream.normal();
  const double rho = sysid::linalg::spectral_radius(a);
  const double target = lo + (hi - lo) * stream.uniform01();
  if (rho > 0.0) {
    a *= target / rho;
  } else {
    a.setZero();
  }
  return {a, sysid::NoiseModel::gaussian(random_spd(d, stream))};
}

/// Pr(chi²_1 <= eps) = erf(sqrt(eps/2)).
inline double chi_square_1_cdf(double eps) {
  return std::erf(std::sqrt(eps / 2.0));
}

/// Monte Carlo estimate of E 2|1/2 - ∫_0^1 W(s)² ds| by discretizing the
/// Wiener process with `steps` increments over `paths` paths. This is the
/// limit law of the random-walk isometry error (d = 1).
inline double brownian_isometry_limit(int paths, int steps, std::uint64_t seed) {
  double sum = 0.0;
  for (int p = 0; p < paths; ++p) {
    sysid::rng::Stream stream(sysid::rng::substream_seed(seed, p));
    double walk = 0.0;
    double integral = 0.0;
    for (int s = 0; s < steps; ++s) {
      walk += stream.normal();
      integral += walk * walk;
    }
    integral /= static_cast<double>(steps) * steps;  // ∫ W² with W(k/S) = S_k/√S
    sum += 2.0 * std::abs(0.5 - integral);
  }
  return sum / paths;
}

}  // namespace testsupport
