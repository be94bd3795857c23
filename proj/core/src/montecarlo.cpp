#include "sysid/montecarlo.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

#include "sysid/estimator.hpp"
#include "sysid/linalg.hpp"
#include "sysid/parallel.hpp"
#include "sysid/presets.hpp"
#include "sysid/rng.hpp"
#include "sysid/trajectory.hpp"

namespace sysid::mc {

namespace {

/// Pairwise sum over [lo, hi) in a fixed order.
double pairwise_sum(const std::vector<double>& v, int lo, int hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (int i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  const int mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

MCResult summarize(const std::vector<std::optional<double>>& values) {
  std::vector<double> kept;
  kept.reserve(values.size());
  int failures = 0;
  for (const auto& v : values) {
    if (v.has_value()) {
      kept.push_back(*v);
    } else {
      ++failures;
    }
  }
  if (kept.empty()) {
    throw SingularGramError("estimate_risk: every replicate was singular");
  }
  MCResult out;
  out.n = static_cast<int>(kept.size());
  out.failures = failures;
  out.mean = pairwise_sum(kept, 0, out.n) / out.n;
  if (out.n > 1) {
    std::vector<double> sq(kept.size());
    for (size_t i = 0; i < kept.size(); ++i) {
      const double c = kept[i] - out.mean;
      sq[i] = c * c;
    }
    const double var = pairwise_sum(sq, 0, out.n) / (out.n - 1);
    out.stderr_ = std::sqrt(var / out.n);
  }
  return out;
}

double risk_value(const Matrix& delta, const NormSpec& norm,
                  const Matrix& gamma_T) {
  switch (norm.kind) {
    case NormSpec::Kind::kFrobSq:
      return delta.squaredNorm();
    case NormSpec::Kind::kOpSq: {
      const double op = linalg::operator_norm(delta);
      return op * op;
    }
    case NormSpec::Kind::kSchattenSq: {
      const double s = linalg::schatten_norm(delta, norm.p);
      return s * s;
    }
    case NormSpec::Kind::kWeightedSq:
      return (delta * gamma_T * delta.transpose()).trace();
  }
  throw std::logic_error("unreachable norm kind");
}

}  // namespace

NormSpec NormSpec::parse(const std::string& text) {
  NormSpec spec;
  if (text == "frob") {
    spec.kind = Kind::kFrobSq;
  } else if (text == "op") {
    spec.kind = Kind::kOpSq;
  } else if (text == "weighted") {
    spec.kind = Kind::kWeightedSq;
  } else if (text.rfind("schatten:", 0) == 0) {
    spec.kind = Kind::kSchattenSq;
    spec.p = std::stod(text.substr(9));
    if (!(spec.p >= 1.0)) {
      throw std::invalid_argument("norm: Schatten p must be >= 1");
    }
  } else {
    throw std::invalid_argument("norm: expected frob|op|weighted|schatten:<p>");
  }
  return spec;
}

std::string NormSpec::name() const {
  switch (kind) {
    case Kind::kFrobSq: return "frob";
    case Kind::kOpSq: return "op";
    case Kind::kWeightedSq: return "weighted";
    case Kind::kSchattenSq: return "schatten:" + std::to_string(p);
  }
  return "unknown";
}

MCResult estimate_risk(const ProblemInstance& instance, int m, int T,
                       const NormSpec& norm, int N, std::uint64_t seed,
                       int threads) {
  if (N < 2) throw std::invalid_argument("estimate_risk: need N >= 2");
  const Matrix gamma_T = norm.kind == NormSpec::Kind::kWeightedSq
                             ? compute_gramians(instance, T).gamma_T
                             : Matrix();
  std::vector<std::optional<double>> values(N);
  parallel_for(N, threads, [&](int r) {
    const TrajectoryBatch batch =
        simulate_batch(instance, m, T, rng::substream_seed(seed, r));
    try {
      const Matrix delta = ols_fit(batch) - instance.a;
      values[r] = risk_value(delta, norm, gamma_T);
    } catch (const SingularGramError&) {
      values[r] = std::nullopt;
    }
  });
  return summarize(values);
}

CltCheckResult clt_covariance_check(const ProblemInstance& instance,
                                    bounds::LimitRegime regime, int m, int T,
                                    int N, std::uint64_t seed, int threads) {
  if (N < 2) throw std::invalid_argument("clt_covariance_check: need N >= 2");
  const GramianSet gramians = compute_gramians(instance, T);
  const auto [row_factor, col_factor] =
      bounds::asymptotic_covariance(regime, instance, gramians, m, T);

  double scale = 0.0;
  switch (regime) {
    case bounds::LimitRegime::kFixedTManyTraj:
      scale = std::sqrt(static_cast<double>(m));
      break;
    case bounds::LimitRegime::kStableLongT:
      scale = std::sqrt(static_cast<double>(T));
      break;
    case bounds::LimitRegime::kJoint:
      scale = std::sqrt(static_cast<double>(m) * T);
      break;
  }

  const int d = instance.d;
  Matrix draws(N, d * d);
  std::vector<std::optional<int>> ok(N);
  parallel_for(N, threads, [&](int r) {
    const TrajectoryBatch batch =
        simulate_batch(instance, m, T, rng::substream_seed(seed, r));
    try {
      const Matrix delta = ols_fit(batch) - instance.a;
      // Column-major vec, matching the Kronecker factor convention.
      draws.row(r) =
          scale * Eigen::Map<const Vector>(delta.data(), d * d).transpose();
      ok[r] = 1;
    } catch (const SingularGramError&) {
      draws.row(r).setZero();
      ok[r] = std::nullopt;
    }
  });

  CltCheckResult result;
  std::vector<int> kept;
  for (int r = 0; r < N; ++r) {
    if (ok[r].has_value()) kept.push_back(r);
    else ++result.failures;
  }
  if (static_cast<int>(kept.size()) < 2) {
    throw SingularGramError("clt_covariance_check: not enough usable replicates");
  }
  Matrix usable(kept.size(), d * d);
  for (size_t idx = 0; idx < kept.size(); ++idx) usable.row(idx) = draws.row(kept[idx]);
  const Eigen::RowVectorXd mean = usable.colwise().mean();
  usable.rowwise() -= mean;
  result.sample_cov =
      usable.transpose() * usable / static_cast<double>(kept.size() - 1);
  result.predicted = linalg::kronecker(row_factor, col_factor);
  result.rel_dist = linalg::relative_error(result.sample_cov, result.predicted);
  return result;
}

double regression_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("regression_slope: need matching n >= 2");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("regression_slope: degenerate x");
  return sxy / sxx;
}

SweepResult rate_sweep(const ProblemInstance& instance,
                       const std::vector<SweepPoint>& grid,
                       const NormSpec& norm, int N, std::uint64_t seed,
                       const bounds::PriorBoundParams& prior_params,
                       int threads) {
  if (grid.empty()) throw std::invalid_argument("rate_sweep: empty grid");
  SweepResult result;
  std::vector<double> log_mt, log_measured;
  int point_index = 0;
  for (const SweepPoint& point : grid) {
    const std::uint64_t point_seed =
        rng::substream_seed(seed, 0xA11CE00ULL + point_index++);
    const MCResult risk =
        estimate_risk(instance, point.m, point.T, norm, N, point_seed, threads);
    const GramianSet gramians = compute_gramians(instance, point.T);
    const Matrix& sigma_w = instance.noise.covariance();

    SweepRow row;
    row.m = point.m;
    row.T = point.T;
    row.measured = risk.mean;
    row.stderr_ = risk.stderr_;
    row.failures = risk.failures;
    switch (norm.kind) {
      case NormSpec::Kind::kOpSq:
        row.gamma_target = bounds::clt_rate_operator(sigma_w, gramians.gamma_T,
                                                     point.m, point.T);
        break;
      case NormSpec::Kind::kWeightedSq:
        row.gamma_target = sigma_w.trace() * instance.d /
                           (static_cast<double>(point.m) * point.T);
        break;
      default:
        row.gamma_target = bounds::clt_rate_frobenius(sigma_w, gramians.gamma_T,
                                                      point.m, point.T);
        break;
    }
    const bounds::PriorBounds prior = bounds::prior_bounds(
        prior_params, gramians, instance.d, point.m, point.T);
    row.prior_frob = prior.prior_frob;
    row.prior_excess = prior.prior_excess_conversion;
    row.prior_op = prior.prior_op;
    row.ratio_measured = row.measured / row.gamma_target;
    row.ratio_prior = (norm.kind == NormSpec::Kind::kOpSq ? row.prior_op
                                                          : row.prior_frob) /
                      row.gamma_target;
    result.rows.push_back(row);

    log_mt.push_back(std::log(static_cast<double>(point.m) * point.T));
    log_measured.push_back(std::log(row.measured));
  }
  result.slope = grid.size() >= 2 ? regression_slope(log_mt, log_measured) : 0.0;
  return result;
}

std::vector<GapRow> gap_demonstration(GapPreset preset,
                                      const std::vector<int>& d_list, int T,
                                      int m, int N, std::uint64_t seed,
                                      const bounds::PriorBoundParams& prior_params,
                                      int threads) {
  for (size_t i = 1; i < d_list.size(); ++i) {
    if (d_list[i] <= d_list[i - 1]) {
      throw std::invalid_argument("gap_demonstration: d_list must ascend");
    }
  }
  std::vector<GapRow> rows;
  int index = 0;
  for (const int d : d_list) {
    const ProblemInstance instance =
        preset == GapPreset::kFrobGap ? presets::frob_gap(d) : presets::op_gap(d);
    const GramianSet gramians = compute_gramians(instance, T);
    const NormSpec norm{preset == GapPreset::kFrobGap ? NormSpec::Kind::kFrobSq
                                                      : NormSpec::Kind::kOpSq,
                        2.0};
    const MCResult risk =
        estimate_risk(instance, m, T, norm, N,
                      rng::substream_seed(seed, 0x6A9ULL + index++), threads);
    const bounds::PriorBounds prior =
        bounds::prior_bounds(prior_params, gramians, d, m, T);
    GapRow row;
    row.d = d;
    row.measured = risk.mean;
    row.stderr_ = risk.stderr_;
    row.failures = risk.failures;
    if (preset == GapPreset::kFrobGap) {
      row.gamma = bounds::clt_rate_frobenius(instance.noise.covariance(),
                                             gramians.gamma_T, m, T);
      row.prior = prior.prior_frob;
    } else {
      row.gamma = bounds::clt_rate_operator(instance.noise.covariance(),
                                            gramians.gamma_T, m, T);
      row.prior = prior.prior_op;
    }
    row.ratio_prior = row.prior / row.gamma;
    row.ratio_measured = row.measured / row.gamma;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sysid::mc
