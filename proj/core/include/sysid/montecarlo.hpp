#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sysid/bounds.hpp"
#include "sysid/gramians.hpp"
#include "sysid/types.hpp"

namespace sysid::mc {

/// Replicated estimate of an expectation. Replicates whose Gram matrix is
/// singular are excluded from n and counted in failures, never silently
/// dropped.
struct MCResult {
  double mean = 0.0;
  double stderr_ = 0.0;
  int n = 0;
  int failures = 0;
};

struct NormSpec {
  enum class Kind { kFrobSq, kOpSq, kSchattenSq, kWeightedSq };
  Kind kind = Kind::kFrobSq;
  double p = 2.0;  // only read for kSchattenSq

  static NormSpec parse(const std::string& text);
  std::string name() const;
};

/// Monte Carlo estimate of E||A_hat - A||² in the requested norm over N
/// independent batches. Throws SingularGramError if every replicate fails.
MCResult estimate_risk(const ProblemInstance& instance, int m, int T,
                       const NormSpec& norm, int N, std::uint64_t seed,
                       int threads = 0);

/// Sample covariance of the CLT-scaled vec(A_hat - A) against the predicted
/// Kronecker-product limit.
struct CltCheckResult {
  double rel_dist = 0.0;  ///< ||sample - predicted||_F / ||predicted||_F
  Matrix sample_cov;      ///< d² x d²
  Matrix predicted;       ///< d² x d²
  int failures = 0;
};

CltCheckResult clt_covariance_check(const ProblemInstance& instance,
                                    bounds::LimitRegime regime, int m, int T,
                                    int N, std::uint64_t seed, int threads = 0);

struct SweepPoint {
  int m = 1;
  int T = 1;
};

struct SweepRow {
  int m = 0;
  int T = 0;
  double measured = 0.0;
  double stderr_ = 0.0;
  double gamma_target = 0.0;
  double prior_frob = 0.0;
  double prior_excess = 0.0;
  double prior_op = 0.0;
  double ratio_measured = 0.0;  ///< measured / gamma_target
  double ratio_prior = 0.0;     ///< matching prior bound / gamma_target
  int failures = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double slope = 0.0;  ///< least-squares slope of log(measured) vs log(mT)
};

SweepResult rate_sweep(const ProblemInstance& instance,
                       const std::vector<SweepPoint>& grid,
                       const NormSpec& norm, int N, std::uint64_t seed,
                       const bounds::PriorBoundParams& prior_params = {},
                       int threads = 0);

enum class GapPreset { kFrobGap, kOpGap };

struct GapRow {
  int d = 0;
  double measured = 0.0;
  double stderr_ = 0.0;
  double gamma = 0.0;
  double prior = 0.0;
  double ratio_prior = 0.0;
  double ratio_measured = 0.0;
  int failures = 0;
};

/// The headline dimension-gap table: per d, the measured risk, the CLT
/// target, the matching prior-art bound, and both ratios.
std::vector<GapRow> gap_demonstration(GapPreset preset,
                                      const std::vector<int>& d_list, int T,
                                      int m, int N, std::uint64_t seed,
                                      const bounds::PriorBoundParams& prior_params = {},
                                      int threads = 0);

/// Least-squares slope of y against x.
double regression_slope(const std::vector<double>& x,
                        const std::vector<double>& y);

}  // namespace sysid::mc
