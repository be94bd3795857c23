#include <doctest.h>

#include <cmath>
#include <set>

#include "sysid/linalg.hpp"
#include "sysid/noise.hpp"
#include "sysid/rng.hpp"
#include "sysid/trajectory.hpp"

#include "test_support.hpp"

using namespace sysid;
using testsupport::random_spd;

TEST_CASE("noise sampling is reproducible for a fixed seed") {
  const auto model = NoiseModel::gaussian(Matrix::Identity(2, 2));
  auto s1 = rng::Stream(42);
  auto s2 = rng::Stream(42);
  const Vector a = model.sample(s1);
  const Vector b = model.sample(s2);
  CHECK(a == b);
  // And advances deterministically.
  CHECK(model.sample(s1) == model.sample(s2));
}

TEST_CASE("spike law: whitened coordinates live on {-M, 0, +M} with Pr(±M) = 1/(2M²)") {
  const double magnitude = 3.0;
  const auto model = NoiseModel::spike_isotropic(Matrix::Identity(2, 2), magnitude);
  auto stream = rng::Stream(7);
  const int n = 100000;
  int plus = 0, minus = 0;
  for (int i = 0; i < n; ++i) {
    const Vector w = model.sample_whitened(stream);
    for (int j = 0; j < 2; ++j) {
      const double v = w[j];
      CHECK((v == 3.0 || v == 0.0 || v == -3.0));
      if (v == 3.0) ++plus;
      if (v == -3.0) ++minus;
    }
  }
  const double p = 1.0 / 18.0;
  const double se = std::sqrt(p * (1 - p) / (2.0 * n));
  CHECK(std::abs(plus / (2.0 * n) - p) < 5 * se);
  CHECK(std::abs(minus / (2.0 * n) - p) < 5 * se);
}

TEST_CASE("uniform ball in 1-d: whitened samples uniform on [-sqrt(3), sqrt(3)]") {
  const auto model = NoiseModel::uniform_ball(Matrix::Identity(1, 1));
  auto stream = rng::Stream(11);
  const double root3 = std::sqrt(3.0);
  const int n = 1000000;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = model.sample_whitened(stream)[0];
    REQUIRE(std::abs(v) <= root3 + 1e-12);
    sum_sq += v * v;
  }
  // Var of U[-r, r] is r²/3 = 1; the sample variance pins the radius.
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("whiten: identity and diagonal cases") {
  const auto iso = NoiseModel::gaussian(Matrix::Identity(3, 3));
  Vector w(3);
  w << 1.0, -2.0, 0.5;
  CHECK((iso.whiten(w) - w).norm() == 0.0);

  Matrix sigma = Matrix::Zero(2, 2);
  sigma(0, 0) = 4.0;
  sigma(1, 1) = 9.0;
  const auto diag = NoiseModel::gaussian(sigma);
  Vector v(2);
  v << 2.0, 3.0;
  const Vector whitened = diag.whiten(v);
  CHECK(whitened[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(whitened[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("colored samples match Sigma_W and whitened samples match identity") {
  auto seed_stream = rng::Stream(101);
  const int d = 3;
  const Matrix sigma_w = random_spd(d, seed_stream);
  for (const auto family : {NoiseFamily::kGaussian, NoiseFamily::kSpikeIsotropic,
                            NoiseFamily::kUniformBall}) {
    NoiseModel model = family == NoiseFamily::kGaussian
                           ? NoiseModel::gaussian(sigma_w)
                       : family == NoiseFamily::kSpikeIsotropic
                           ? NoiseModel::spike_isotropic(sigma_w, 2.0)
                           : NoiseModel::uniform_ball(sigma_w);
    auto stream = rng::Stream(55);
    const int n = 100000;
    Matrix sum_colored = Matrix::Zero(d, d);
    Matrix sum_white = Matrix::Zero(d, d);
    for (int i = 0; i < n; ++i) {
      const Vector w = model.sample(stream);
      sum_colored += w * w.transpose();
      const Vector wb = model.whiten(w);
      sum_white += wb * wb.transpose();
    }
    const double tol = 5.0 / std::sqrt(static_cast<double>(n)) * d;
    CHECK(linalg::relative_error(sum_colored / n, sigma_w) < tol);
    CHECK(linalg::relative_error(sum_white / n, Matrix::Identity(d, d)) < tol);
  }
}

TEST_CASE("product family: per-coordinate laws and nu defaults") {
  const std::vector<CoordinateLaw> laws = {CoordinateLaw::kRademacher,
                                           CoordinateLaw::kUniform};
  const auto model = NoiseModel::product_coordinate(Matrix::Identity(2, 2), laws);
  CHECK(model.nu() == 1.0);
  auto stream = rng::Stream(13);
  for (int i = 0; i < 1000; ++i) {
    const Vector w = model.sample_whitened(stream);
    CHECK(std::abs(w[0]) == 1.0);
    CHECK(std::abs(w[1]) <= std::sqrt(3.0) + 1e-12);
  }
  // Spike nu default: M / sqrt(2 log(1 + M²)).
  const auto spike = NoiseModel::spike_isotropic(Matrix::Identity(1, 1), 3.0);
  CHECK(spike.nu() ==
        doctest::Approx(3.0 / std::sqrt(2.0 * std::log(10.0))).epsilon(1e-12));
  const auto overridden = NoiseModel::spike_isotropic(Matrix::Identity(1, 1), 3.0, 2.5);
  CHECK(overridden.nu() == 2.5);
}

TEST_CASE("invalid covariances are rejected") {
  Matrix asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(NoiseModel::gaussian(asym), std::invalid_argument);
  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS(NoiseModel::gaussian(singular), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel::spike_isotropic(Matrix::Identity(2, 2), 0.5),
                  std::invalid_argument);
}

TEST_CASE("zero dynamics: states equal shifted noises") {
  const ProblemInstance instance{Matrix::Zero(3, 3),
                                 NoiseModel::gaussian(Matrix::Identity(3, 3))};
  const auto batch = simulate_batch(instance, 2, 5, 99);
  for (int i = 0; i < 2; ++i) {
    for (int t = 1; t <= 5; ++t) {
      CHECK((batch.state(i, t + 1) - batch.noise(i, t)).norm() == 0.0);
    }
  }
}

TEST_CASE("forced scalar recursion x_{t+1} = 2 x_t + w_t") {
  const ProblemInstance instance{2.0 * Matrix::Identity(1, 1),
                                 NoiseModel::gaussian(Matrix::Identity(1, 1))};
  Matrix draws(4, 1);
  draws << 1.0, 0.0, 1.0, 0.0;  // w_0..w_3
  const auto batch = testsupport::replay_batch(instance, {draws});
  CHECK(batch.state(0, 1)[0] == 1.0);
  CHECK(batch.state(0, 2)[0] == 2.0);
  CHECK(batch.state(0, 3)[0] == 5.0);
  CHECK(recursion_residual(batch, instance) == 0.0);
}

TEST_CASE("random walk: population covariance of x_t is t sigma² I") {
  const ProblemInstance instance{Matrix::Identity(2, 2),
                                 NoiseModel::gaussian(Matrix::Identity(2, 2))};
  const int m = 100000;
  const auto batch = simulate_batch(instance, m, 10, 1234);
  Matrix sum = Matrix::Zero(2, 2);
  for (int i = 0; i < m; ++i) {
    const Vector x = batch.state(i, 10).transpose();
    sum += x * x.transpose();
  }
  CHECK(linalg::relative_error(sum / m, 10.0 * Matrix::Identity(2, 2)) < 0.02);
}

TEST_CASE("recursion residual is at machine precision on simulated batches") {
  auto stream = rng::Stream(3);
  const auto instance = testsupport::random_stable_instance(4, 0.2, 0.9, stream);
  const auto batch = simulate_batch(instance, 3, 50, 777);
  CHECK(recursion_residual(batch, instance) <= 1e-12);
}

TEST_CASE("simulation is bit-identical across thread counts") {
  auto stream = rng::Stream(4);
  const auto instance = testsupport::random_stable_instance(3, 0.2, 0.9, stream);
  const auto serial = simulate_batch(instance, 8, 20, 2024, 1);
  const auto threaded = simulate_batch(instance, 8, 20, 2024, 4);
  CHECK(serial.states == threaded.states);
  CHECK(serial.noises == threaded.noises);
}

TEST_CASE("trajectories are mutually independent (cross correlation of x_1)") {
  const ProblemInstance instance{0.5 * Matrix::Identity(1, 1),
                                 NoiseModel::gaussian(Matrix::Identity(1, 1))};
  const int pairs = 10000;
  const auto batch = simulate_batch(instance, 2 * pairs, 1, 5150);
  double sum_xy = 0.0, sum_x = 0.0, sum_y = 0.0, sum_xx = 0.0, sum_yy = 0.0;
  for (int p = 0; p < pairs; ++p) {
    const double x = batch.state(2 * p, 1)[0];
    const double y = batch.state(2 * p + 1, 1)[0];
    sum_x += x;
    sum_y += y;
    sum_xy += x * y;
    sum_xx += x * x;
    sum_yy += y * y;
  }
  const double n = pairs;
  const double corr = (sum_xy / n - sum_x / n * sum_y / n) /
                      std::sqrt((sum_xx / n - sum_x / n * sum_x / n) *
                                (sum_yy / n - sum_y / n * sum_y / n));
  CHECK(std::abs(corr) < 0.05);
}

TEST_CASE("dimension mismatch between A and Sigma_W is rejected") {
  CHECK_THROWS_AS(ProblemInstance(Matrix::Identity(3, 3),
                                  NoiseModel::gaussian(Matrix::Identity(2, 2))),
                  std::invalid_argument);
}
