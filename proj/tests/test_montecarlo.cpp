#include <doctest.h>

#include <cmath>

#include "sysid/montecarlo.hpp"
#include "sysid/presets.hpp"
#include "sysid/table.hpp"

#include "test_support.hpp"

using namespace sysid;
using namespace sysid::mc;

TEST_CASE("estimate_risk: scalar A = 0 at T = 1 scales like 1/m") {
  const auto instance = presets::make("scalar-stable", 1);
  const ProblemInstance zero{Matrix::Zero(1, 1),
                             NoiseModel::gaussian(Matrix::Identity(1, 1))};
  const int m = 10000;
  const auto result =
      estimate_risk(zero, m, 1, NormSpec{NormSpec::Kind::kFrobSq}, 200, 12, 1);
  CHECK(result.failures == 0);
  CHECK(result.n == 200);
  CHECK(result.mean > 0.8e-4);
  CHECK(result.mean < 1.25e-4);
  (void)instance;
}

TEST_CASE("estimate_risk: doubling N roughly halves the stderr") {
  const auto instance = presets::scalar_stable(1);
  const auto small =
      estimate_risk(instance, 1, 200, NormSpec{NormSpec::Kind::kFrobSq}, 250, 5, 1);
  const auto large =
      estimate_risk(instance, 1, 200, NormSpec{NormSpec::Kind::kFrobSq}, 1000, 5, 1);
  const double ratio = large.stderr_ / small.stderr_;
  CHECK(std::abs(ratio - 0.5) < 0.2);
}

TEST_CASE("estimate_risk: all-singular replicates raise, failures counted") {
  const ProblemInstance instance{Matrix::Zero(2, 2),
                                 NoiseModel::gaussian(Matrix::Identity(2, 2))};
  CHECK_THROWS_AS(
      estimate_risk(instance, 1, 1, NormSpec{NormSpec::Kind::kFrobSq}, 10, 3, 1),
      SingularGramError);
  const auto fine =
      estimate_risk(instance, 4, 1, NormSpec{NormSpec::Kind::kFrobSq}, 50, 3, 1);
  CHECK(fine.failures == 0);
  CHECK(fine.n == 50);
}

TEST_CASE("estimate_risk: norms agree where they must") {
  const auto instance = presets::scalar_stable(1);
  // In d = 1 the Frobenius, operator, and Schatten risks coincide.
  const auto frob =
      estimate_risk(instance, 2, 50, NormSpec{NormSpec::Kind::kFrobSq}, 60, 9, 1);
  const auto op =
      estimate_risk(instance, 2, 50, NormSpec{NormSpec::Kind::kOpSq}, 60, 9, 1);
  const auto schatten = estimate_risk(
      instance, 2, 50, NormSpec{NormSpec::Kind::kSchattenSq, 3.0}, 60, 9, 1);
  CHECK(frob.mean == doctest::Approx(op.mean).epsilon(1e-12));
  CHECK(frob.mean == doctest::Approx(schatten.mean).epsilon(1e-12));
}

TEST_CASE("NormSpec parsing") {
  CHECK(NormSpec::parse("frob").kind == NormSpec::Kind::kFrobSq);
  CHECK(NormSpec::parse("op").kind == NormSpec::Kind::kOpSq);
  CHECK(NormSpec::parse("weighted").kind == NormSpec::Kind::kWeightedSq);
  const auto schatten = NormSpec::parse("schatten:2.5");
  CHECK(schatten.kind == NormSpec::Kind::kSchattenSq);
  CHECK(schatten.p == 2.5);
  CHECK_THROWS_AS(NormSpec::parse("l2"), std::invalid_argument);
  CHECK_THROWS_AS(NormSpec::parse("schatten:0.5"), std::invalid_argument);
}

TEST_CASE("clt covariance check: A = 0, T = 1 many-trajectory regime") {
  const ProblemInstance instance{Matrix::Zero(2, 2),
                                 NoiseModel::gaussian(Matrix::Identity(2, 2))};
  const auto result = clt_covariance_check(
      instance, bounds::LimitRegime::kFixedTManyTraj, 2000, 1, 400, 77, 1);
  CHECK(result.failures == 0);
  CHECK(result.rel_dist < 0.3);
  CHECK(result.predicted.rows() == 4);
  // Predicted = Sigma_W^{-1} ⊗ Sigma_W = I_4 here.
  CHECK((result.predicted - Matrix::Identity(4, 4)).norm() < 1e-10);
}

TEST_CASE("clt covariance check is independent of the thread count") {
  const auto instance = presets::scalar_stable(1);
  const auto serial = clt_covariance_check(
      instance, bounds::LimitRegime::kStableLongT, 1, 300, 100, 2024, 1);
  const auto threaded = clt_covariance_check(
      instance, bounds::LimitRegime::kStableLongT, 1, 300, 100, 2024, 3);
  CHECK(serial.rel_dist == threaded.rel_dist);
  CHECK(serial.sample_cov == threaded.sample_cov);
}

TEST_CASE("regression slope recovers an exact line") {
  const std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y = {1.0, 0.0, -1.0, -2.0};
  CHECK(regression_slope(x, y) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK_THROWS_AS(regression_slope({1.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("rate sweep: scalar-stable T grid has slope near -1") {
  const auto instance = presets::scalar_stable(1);
  const auto result = rate_sweep(instance,
                                 {{1, 200}, {1, 400}, {1, 800}, {1, 1600}},
                                 NormSpec{NormSpec::Kind::kFrobSq}, 150, 42, {}, 1);
  CHECK(result.rows.size() == 4);
  CHECK(result.slope > -1.35);
  CHECK(result.slope < -0.65);
  for (const auto& row : result.rows) {
    CHECK(row.measured > 0.0);
    CHECK(row.stderr_ > 0.0);
    CHECK(row.gamma_target > 0.0);
    CHECK(row.ratio_measured == doctest::Approx(row.measured / row.gamma_target));
  }
}

TEST_CASE("rate sweep is reproducible and thread-invariant byte for byte") {
  const auto instance = presets::frob_gap(3);
  const auto run = [&](int threads) {
    const auto result = rate_sweep(instance, {{2, 40}, {2, 80}},
                                   NormSpec{NormSpec::Kind::kFrobSq}, 40, 7, {},
                                   threads);
    Table table;
    table.columns = {"m", "T", "measured", "stderr"};
    for (const auto& row : result.rows) {
      table.add_row({static_cast<double>(row.m), static_cast<double>(row.T),
                     row.measured, row.stderr_});
    }
    return to_csv(table);
  };
  const std::string once = run(1);
  CHECK(once == run(1));
  CHECK(once == run(3));
}

TEST_CASE("gap demonstration: smoke on small dimensions") {
  const auto rows = gap_demonstration(GapPreset::kFrobGap, {4, 8}, 400, 1, 60,
                                      99, {}, 1);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.measured > 0.0);
    CHECK(row.gamma > 0.0);
    CHECK(row.ratio_prior > 1.0);
    CHECK(row.ratio_measured > 0.4);
    CHECK(row.ratio_measured < 2.5);
  }
  CHECK(rows[1].ratio_prior > rows[0].ratio_prior);
  CHECK_THROWS_AS(gap_demonstration(GapPreset::kFrobGap, {8, 4}, 100, 1, 10, 1, {}, 1),
                  std::invalid_argument);
}
