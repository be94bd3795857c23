#include <doctest.h>

#include <cmath>
#include <limits>

#include "sysid/bounds.hpp"
#include "sysid/estimator.hpp"
#include "sysid/linalg.hpp"
#include "sysid/rng.hpp"
#include "sysid/trajectory.hpp"

#include "test_support.hpp"

using namespace sysid;
using testsupport::replay_batch;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("hand least squares: states 1, 2, 5 give A_hat = 2.4") {
  const ProblemInstance instance{2.0 * Matrix::Identity(1, 1),
                                 NoiseModel::gaussian(Matrix::Identity(1, 1))};
  Matrix draws(3, 1);
  draws << 1.0, 0.0, 1.0;  // -> states 1, 2, 5
  const auto batch = replay_batch(instance, {draws});
  CHECK(ols_fit(batch)(0, 0) == doctest::Approx(2.4).epsilon(1e-14));
}

TEST_CASE("normal-equation residual is tiny on simulated fits") {
  auto stream = rng::Stream(61);
  for (int rep = 0; rep < 5; ++rep) {
    const auto instance = testsupport::random_stable_instance(3, 0.2, 0.9, stream);
    const auto batch = simulate_batch(instance, 2, 40, 900 + rep);
    const Matrix a_hat = ols_fit(batch);
    const Matrix x = design_matrix(batch);
    const Matrix y = response_matrix(batch);
    const Matrix gram = x.transpose() * x;
    const Matrix cross = y.transpose() * x;
    CHECK((a_hat * gram - cross).norm() <= 1e-10 * cross.norm());
  }
}

TEST_CASE("orthogonal invariance: rotating states maps A_hat to U A_hat U^T") {
  auto stream = rng::Stream(62);
  const auto instance = testsupport::random_stable_instance(3, 0.3, 0.8, stream);
  const auto batch = simulate_batch(instance, 2, 30, 321);

  // Householder reflection as the test rotation.
  Vector u(3);
  u << 1.0, -2.0, 0.5;
  u.normalize();
  const Matrix rot = Matrix::Identity(3, 3) - 2.0 * u * u.transpose();

  TrajectoryBatch rotated = batch;
  rotated.states = batch.states * rot.transpose();
  rotated.noises = batch.noises * rot.transpose();
  const Matrix direct = ols_fit(rotated);
  const Matrix mapped = rot * ols_fit(batch) * rot.transpose();
  CHECK(linalg::relative_error(direct, mapped) <= 1e-10);
}

TEST_CASE("fit error sits below the Theorem bound with constants 10") {
  auto stream = rng::Stream(63);
  const auto instance = testsupport::random_stable_instance(3, 0.2, 0.7, stream);
  const int m = 200, T = 20;
  const auto batch = simulate_batch(instance, m, T, 777);
  const Matrix a_hat = ols_fit(batch);
  REQUIRE(a_hat.allFinite());
  const auto gramians = compute_gramians(instance, T);
  bounds::BoundConstants constants;
  constants.c1 = 10.0;
  const auto bound = bounds::thm31_bound(instance, gramians, m, T, 1.0,
                                         bounds::Regime::kManyTrajectories,
                                         constants);
  CHECK((a_hat - instance.a).squaredNorm() < bound.leading + bound.higher);
}

TEST_CASE("singular Gram at tiny mT reports, never regularizes") {
  const ProblemInstance instance{Matrix::Zero(2, 2),
                                 NoiseModel::gaussian(Matrix::Identity(2, 2))};
  const auto batch = simulate_batch(instance, 1, 1, 5);  // X has one row
  CHECK_THROWS_AS(ols_fit(batch), SingularGramError);
}

TEST_CASE("error report: zero error") {
  const ProblemInstance instance{0.5 * Matrix::Identity(2, 2),
                                 NoiseModel::gaussian(Matrix::Identity(2, 2))};
  const auto gramians = compute_gramians(instance, 5);
  const auto report = error_report(instance.a, instance, gramians, {1.0, 3.0});
  CHECK(report.frob_sq == 0.0);
  CHECK(report.op_sq == 0.0);
  CHECK(report.weighted_sq == 0.0);
  for (const auto& [p, v] : report.schatten_sq) CHECK(v == 0.0);
}

TEST_CASE("error report: diag(3, 4) norms and weighted norm") {
  const ProblemInstance instance{Matrix::Zero(2, 2),
                                 NoiseModel::gaussian(Matrix::Identity(2, 2))};
  // Gamma_T = I for A = 0, Sigma_W = I.
  auto gramians = compute_gramians(instance, 3);
  Matrix a_hat = Matrix::Zero(2, 2);
  a_hat(0, 0) = 3.0;
  a_hat(1, 1) = 4.0;
  auto report = error_report(a_hat, instance, gramians, {1.0});
  CHECK(report.frob_sq == doctest::Approx(25.0).epsilon(1e-13));
  CHECK(report.op_sq == doctest::Approx(16.0).epsilon(1e-13));
  CHECK(report.schatten_sq.at(1.0) == doctest::Approx(49.0).epsilon(1e-13));

  // Weighted by Gamma_T = diag(2, 1): Tr(Delta Gamma Delta^T) = 9*2 + 16*1.
  gramians.gamma_T = Matrix::Zero(2, 2);
  gramians.gamma_T(0, 0) = 2.0;
  gramians.gamma_T(1, 1) = 1.0;
  report = error_report(a_hat, instance, gramians, {});
  CHECK(report.weighted_sq == doctest::Approx(34.0).epsilon(1e-13));
}

TEST_CASE("schatten norm: identity, rank one, and the norm-equivalence chain") {
  CHECK(schatten_norm(Matrix::Identity(5, 5), 2.0) ==
        doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));

  auto stream = rng::Stream(64);
  Vector u(4), v(4);
  for (int i = 0; i < 4; ++i) {
    u[i] = stream.normal();
    v[i] = stream.normal();
  }
  u.normalize();
  v.normalize();
  const Matrix rank1 = u * v.transpose();
  for (const double p : {1.0, 2.0, 4.0, kInf}) {
    CHECK(schatten_norm(rank1, p) == doctest::Approx(1.0).epsilon(1e-12));
  }

  const int d = 5;
  Matrix m(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) m(i, j) = stream.normal();
  const double op = linalg::operator_norm(m);
  for (const double p : {1.0, 2.0, 4.0, std::log(5.0), kInf}) {
    const double sp = schatten_norm(m, p);
    CHECK(op <= sp * (1.0 + 1e-12));
    const double factor = std::isinf(p) ? 1.0 : std::pow(d, 1.0 / p);
    CHECK(sp <= factor * op * (1.0 + 1e-12));
  }
  CHECK_THROWS_AS(schatten_norm(m, 0.5), std::invalid_argument);
}

TEST_CASE("error report keeps the Fact chain op <= S_p <= d^{2/p} op squared") {
  auto stream = rng::Stream(65);
  const auto instance = testsupport::random_stable_instance(4, 0.3, 0.8, stream);
  const auto gramians = compute_gramians(instance, 10);
  const auto batch = simulate_batch(instance, 3, 10, 88);
  const auto report =
      error_report(ols_fit(batch), instance, gramians, {1.0, 2.0, 4.0, 7.5});
  for (const auto& [p, sq] : report.schatten_sq) {
    CHECK(report.op_sq <= sq + 1e-12);
    if (!std::isinf(p)) {
      CHECK(sq <= std::pow(4.0, 2.0 / p) * report.op_sq + 1e-12);
    }
  }
  CHECK(report.frob_sq == report.schatten_sq.at(2.0));
}
