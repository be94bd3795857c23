#include "sysid/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sysid/estimator.hpp"
#include "sysid/linalg.hpp"
#include "sysid/parallel.hpp"
#include "sysid/rng.hpp"

namespace sysid::diagnostics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_compatible(const TrajectoryBatch& batch,
                      const ProblemInstance& instance,
                      const GramianSet& gramians) {
  if (batch.d != instance.d || gramians.gamma_T.rows() != instance.d) {
    throw std::invalid_argument("diagnostics: dimension mismatch");
  }
  if (gramians.T != batch.T) {
    throw std::invalid_argument("diagnostics: Gramians computed at a different T");
  }
}

std::vector<double> with_default_ps(std::vector<double> ps) {
  ps.push_back(2.0);
  ps.push_back(kInf);
  return ps;
}

struct MeanStd {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Pairwise-summed mean and standard error, in index order.
MeanStd mean_and_stderr(const std::vector<double>& values) {
  const int n = static_cast<int>(values.size());
  if (n == 0) return {};
  std::function<double(int, int, const std::function<double(int)>&)> reduce =
      [&](int lo, int hi, const std::function<double(int)>& f) -> double {
    if (hi - lo <= 8) {
      double s = 0.0;
      for (int i = lo; i < hi; ++i) s += f(i);
      return s;
    }
    const int mid = lo + (hi - lo) / 2;
    return reduce(lo, mid, f) + reduce(mid, hi, f);
  };
  MeanStd out;
  out.mean = reduce(0, n, [&](int i) { return values[i]; }) / n;
  if (n > 1) {
    const double ss = reduce(0, n, [&](int i) {
      const double c = values[i] - out.mean;
      return c * c;
    });
    out.stderr_ = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
  }
  return out;
}

}  // namespace

DecompositionReport decompose(const TrajectoryBatch& batch,
                              const ProblemInstance& instance,
                              const GramianSet& gramians,
                              const std::vector<double>& ps) {
  check_compatible(batch, instance, gramians);
  DecompositionReport report;
  report.q_hat = empirical_cross_moment(batch);
  report.sigma_hat = empirical_state_covariance(batch);

  const auto [lo, hi] = linalg::symmetric_eig_range(report.sigma_hat);
  if (!(lo > 1e-12 * hi)) {
    throw SingularGramError("decompose: empirical covariance is singular");
  }
  const Matrix sigma_hat_inv = linalg::spd_inverse(report.sigma_hat);
  const Matrix gamma_inv = linalg::spd_inverse(gramians.gamma_T);
  const Matrix gamma_inv_sqrt = linalg::spd_inv_sqrt(gramians.gamma_T);

  report.sigma_bar = gamma_inv_sqrt * report.sigma_hat * gamma_inv_sqrt;
  report.sigma_bar = 0.5 * (report.sigma_bar + report.sigma_bar.transpose());
  if (gramians.kappa.has_value()) {
    const Matrix gk_inv_sqrt =
        linalg::spd_inv_sqrt(gamma_average(instance, *gramians.kappa));
    Matrix tilde = gk_inv_sqrt * report.sigma_hat * gk_inv_sqrt;
    report.sigma_tilde_kappa = 0.5 * (tilde + tilde.transpose());
  }
  report.iso_error = linalg::operator_norm(
      Matrix::Identity(batch.d, batch.d) - report.sigma_bar);

  report.delta = ols_fit(batch) - instance.a;
  const Matrix delta_product = report.q_hat * sigma_hat_inv;
  report.decomposition_residual =
      linalg::relative_error(delta_product, report.delta);

  const Matrix t1 = report.q_hat * gamma_inv;
  const Matrix t2 = report.q_hat * (sigma_hat_inv - gamma_inv);
  for (const double p : with_default_ps(ps)) {
    const double n1 = linalg::schatten_norm(t1, p);
    const double n2 = linalg::schatten_norm(t2, p);
    const double nt = linalg::schatten_norm(report.delta, p);
    report.t1_sq[p] = n1 * n1;
    report.t2_sq[p] = n2 * n2;
    report.total_sq[p] = nt * nt;
  }
  return report;
}

MartingaleSequence martingale_increments(const TrajectoryBatch& batch,
                                         const ProblemInstance& instance,
                                         const GramianSet& gramians) {
  check_compatible(batch, instance, gramians);
  const Matrix gamma_inv = linalg::spd_inverse(gramians.gamma_T);
  const double scale = 1.0 / (static_cast<double>(batch.m) * batch.T);
  MartingaleSequence seq;
  const int total = batch.m * batch.T;
  seq.increments.reserve(total);
  seq.order.reserve(total);
  for (int j = 1; j <= total; ++j) {
    const int i_j = (j - 1) / batch.T + 1;
    const int t_j = (j - 1) % batch.T + 1;
    const Vector w = batch.noise(i_j - 1, t_j);
    const Vector x = batch.state(i_j - 1, t_j);
    seq.increments.push_back(scale * w * (gamma_inv * x).transpose());
    seq.order.emplace_back(i_j, t_j);
  }
  return seq;
}

QvResiduals quadratic_variation_identities(const TrajectoryBatch& batch,
                                           const ProblemInstance& instance,
                                           const GramianSet& gramians) {
  check_compatible(batch, instance, gramians);
  const int d = batch.d;
  const Matrix& sigma_w = instance.noise.covariance();
  const Matrix gamma_inv = linalg::spd_inverse(gramians.gamma_T);
  const Matrix gamma_inv_sqrt = linalg::spd_inv_sqrt(gramians.gamma_T);
  const double mT = static_cast<double>(batch.m) * batch.T;
  const double inv_mt_sq = 1.0 / (mT * mT);

  // Brute-force sums of the analytic conditional expectations per increment.
  Matrix lhs_col = Matrix::Zero(d, d);
  double y_norm_sq_sum = 0.0;
  for (int i = 0; i < batch.m; ++i) {
    for (int t = 1; t <= batch.T; ++t) {
      const Vector y = gamma_inv * batch.state(i, t).transpose();
      lhs_col.noalias() += inv_mt_sq * sigma_w.trace() * y * y.transpose();
      y_norm_sq_sum += y.squaredNorm();
    }
  }
  const Matrix lhs_row = inv_mt_sq * y_norm_sq_sum * sigma_w;

  const Matrix sigma_hat = empirical_state_covariance(batch);
  const Matrix sigma_bar = gamma_inv_sqrt * sigma_hat * gamma_inv_sqrt;
  const Matrix rhs_col =
      (sigma_w.trace() / mT) * gamma_inv_sqrt * sigma_bar * gamma_inv_sqrt;
  const Matrix rhs_row = ((gamma_inv * sigma_bar).trace() / mT) * sigma_w;

  return {linalg::relative_error(lhs_col, rhs_col),
          linalg::relative_error(lhs_row, rhs_row)};
}

QuadFormCheck block_toeplitz_quadratic_form(const TrajectoryBatch& batch,
                                            const ProblemInstance& instance,
                                            const GramianSet& gramians,
                                            const Vector& v) {
  check_compatible(batch, instance, gramians);
  if (std::abs(v.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("block_toeplitz_quadratic_form: v must be unit");
  }
  const int T = batch.T;
  const int d = batch.d;
  const Matrix gamma_inv_sqrt = linalg::spd_inv_sqrt(gramians.gamma_T);
  const Matrix& sqrt_w = instance.noise.sqrt_covariance();

  // l_s = (vᵀ Gamma_T^{-1/2} A^s Sigma_W^{1/2})ᵀ, s = 0..T-1.
  std::vector<Vector> ell(T);
  Vector u = gamma_inv_sqrt * v;
  for (int s = 0; s < T; ++s) {
    ell[s] = sqrt_w.transpose() * u;
    u = instance.a.transpose() * u;
  }

  QuadFormCheck check;
  const double mT = static_cast<double>(batch.m) * T;

  // lhs = vᵀ Sigma_bar v through the state covariance.
  const Vector u0 = gamma_inv_sqrt * v;
  check.lhs = u0.dot(empirical_state_covariance(batch) * u0);

  // rhs = (1/mT) sum_i || L~_T(v) wbar^{(i)} ||² with wbar = (w_0 .. w_{T-1}).
  double rhs = 0.0;
  Matrix wbar(T, d);
  for (int i = 0; i < batch.m; ++i) {
    wbar.row(0) = instance.noise.whiten(batch.state(i, 1).transpose());
    for (int s = 1; s < T; ++s) {
      wbar.row(s) = instance.noise.whiten(batch.noise(i, s).transpose());
    }
    for (int t = 1; t <= T; ++t) {
      double entry = 0.0;
      for (int k = 0; k < t; ++k) {
        entry += ell[k].dot(wbar.row(t - 1 - k));
      }
      rhs += entry * entry;
    }
  }
  check.rhs = rhs / mT;

  double trace = 0.0;
  for (int k = 0; k < T; ++k) {
    trace += static_cast<double>(T - k) * ell[k].squaredNorm();
  }
  check.trace_q = trace / static_cast<double>(T);
  return check;
}

std::vector<IsometryProbeRow> isometry_probe(const ProblemInstance& instance,
                                             const std::vector<int>& m_grid,
                                             const std::vector<int>& T_grid,
                                             double r, int N,
                                             std::uint64_t seed, int threads) {
  if (!(r >= 1.0)) throw std::invalid_argument("isometry_probe: need r >= 1");
  if (N < 2) throw std::invalid_argument("isometry_probe: need N >= 2");
  const int d = instance.d;
  const double nu = instance.noise.nu();
  const double sigma_w_op = linalg::operator_norm(instance.noise.covariance());
  const auto phi = [](double tau) { return std::max(tau, tau * tau); };

  std::vector<IsometryProbeRow> rows;
  int point_index = 0;
  for (const int T : T_grid) {
    const GramianSet gramians = compute_gramians(instance, T);
    const Matrix gamma_inv_sqrt = linalg::spd_inv_sqrt(gramians.gamma_T);
    const double lambda_gamma =
        linalg::symmetric_eig_range(gramians.gamma_T).first;
    for (const int m : m_grid) {
      const std::uint64_t point_seed =
          rng::substream_seed(seed, static_cast<std::uint64_t>(point_index++));
      std::vector<double> values(N);
      parallel_for(N, threads, [&](int n) {
        const TrajectoryBatch batch = simulate_batch(
            instance, m, T, rng::substream_seed(point_seed, n));
        const Matrix sigma_bar = gamma_inv_sqrt *
                                 empirical_state_covariance(batch) *
                                 gamma_inv_sqrt;
        const double err =
            linalg::operator_norm(Matrix::Identity(d, d) - sigma_bar);
        values[n] = std::pow(err, r);
      });
      const MeanStd stats = mean_and_stderr(values);
      IsometryProbeRow row;
      row.m = m;
      row.T = T;
      row.moment = std::pow(stats.mean, 1.0 / r);
      row.stderr_ = stats.mean > 0.0
                        ? stats.stderr_ * row.moment / (r * stats.mean)
                        : 0.0;
      if (gramians.cert.has_value() && gramians.cert->valid) {
        const auto& cert = *gramians.cert;
        row.envelope =
            nu * nu *
            phi(std::sqrt(std::sqrt(sigma_w_op) * cert.m_const * (d + r) /
                          (std::sqrt(lambda_gamma) * (1.0 - cert.rho) *
                           static_cast<double>(m) * T)));
      } else {
        row.envelope = nu * nu * phi(std::sqrt((d + r) / static_cast<double>(m)));
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<SmallBallRow> small_ball_probe(const ProblemInstance& instance,
                                           int k,
                                           const std::vector<double>& eps_grid,
                                           int N, std::uint64_t seed,
                                           int v_count, double c, double alpha,
                                           int threads) {
  if (k < 1) throw std::invalid_argument("small_ball_probe: need k >= 1");
  if (N < 1000) throw std::invalid_argument("small_ball_probe: need N >= 1000");
  if (v_count < 1) throw std::invalid_argument("small_ball_probe: need v_count >= 1");
  const int d = instance.d;
  const Matrix gamma_k = gamma_average(instance, k);

  // Deterministic test directions, drawn ahead of the trajectory streams.
  std::vector<Vector> vs(v_count);
  {
    auto vstream = rng::Stream(rng::substream_seed(seed, 0xD17ULL));
    for (auto& v : vs) {
      v.resize(d);
      do {
        for (int i = 0; i < d; ++i) v[i] = vstream.normal();
      } while (v.norm() == 0.0);
      v.normalize();
    }
  }
  std::vector<double> thresholds(v_count);
  for (int j = 0; j < v_count; ++j) {
    thresholds[j] = vs[j].dot(gamma_k * vs[j]);
  }

  // energies(n, j) = (1/k) sum_t <v_j, x_t>² for replicate n.
  Matrix energies(N, v_count);
  parallel_for(N, threads, [&](int n) {
    const TrajectoryBatch batch =
        simulate_batch(instance, 1, k, rng::substream_seed(seed, n));
    const auto x = batch.trajectory_states(0).topRows(k);
    for (int j = 0; j < v_count; ++j) {
      energies(n, j) = (x * vs[j]).squaredNorm() / static_cast<double>(k);
    }
  });

  std::vector<SmallBallRow> rows;
  for (const double eps : eps_grid) {
    SmallBallRow row;
    row.eps = eps;
    double mean = 0.0;
    double worst = 0.0;
    for (int j = 0; j < v_count; ++j) {
      int count = 0;
      for (int n = 0; n < N; ++n) {
        if (energies(n, j) <= eps * thresholds[j]) ++count;
      }
      const double p = static_cast<double>(count) / N;
      mean += p / v_count;
      worst = std::max(worst, p);
    }
    row.prob_max = worst;
    row.prob_mean = mean;
    row.stderr_ = std::sqrt(std::max(worst * (1.0 - worst), 1.0 / N) / N);
    row.envelope = std::pow(c * eps, alpha);
    rows.push_back(row);
  }
  return rows;
}

ChevetResult chevet_oracle(const Matrix& a, const Matrix& b, int N,
                           std::uint64_t seed, double upper_constant,
                           int threads) {
  if (N < 2) throw std::invalid_argument("chevet_oracle: need N >= 2");
  const Eigen::Index g_rows = a.cols();
  const Eigen::Index g_cols = b.rows();
  std::vector<double> values(N);
  parallel_for(N, threads, [&](int n) {
    auto stream = rng::Stream(rng::substream_seed(seed, n));
    Matrix g(g_rows, g_cols);
    for (Eigen::Index jj = 0; jj < g_cols; ++jj) {
      for (Eigen::Index ii = 0; ii < g_rows; ++ii) {
        g(ii, jj) = stream.normal();
      }
    }
    const double norm = linalg::operator_norm(a * g * b);
    values[n] = norm * norm;
  });
  const MeanStd stats = mean_and_stderr(values);
  const double a_f = a.norm(), b_f = b.norm();
  const double a_op = linalg::operator_norm(a);
  const double b_op = linalg::operator_norm(b);
  const double mix = a_f * a_f * b_op * b_op + a_op * a_op * b_f * b_f;
  return {stats.mean, stats.stderr_, 0.5 * mix, upper_constant * mix};
}

BurkholderProbe aggregate_burkholder(const std::vector<BurkholderSample>& samples,
                                     double r) {
  std::vector<double> m_op_sq, col_pow, row_pow, schatten_sum;
  for (const auto& s : samples) {
    m_op_sq.push_back(s.m_op_sq);
    col_pow.push_back(s.col_pow);
    row_pow.push_back(s.row_pow);
    schatten_sum.push_back(s.schatten_sum);
  }
  BurkholderProbe probe;
  probe.r = r;
  probe.lhs = std::sqrt(mean_and_stderr(m_op_sq).mean);
  probe.term_col = std::pow(mean_and_stderr(col_pow).mean, 1.0 / r);
  probe.term_row = std::pow(mean_and_stderr(row_pow).mean, 1.0 / r);
  probe.term_schatten = std::pow(mean_and_stderr(schatten_sum).mean, 1.0 / r);
  probe.ratio =
      probe.lhs / (r * (probe.term_col + probe.term_row + probe.term_schatten));
  return probe;
}

BurkholderProbe burkholder_probe(const ProblemInstance& instance,
                                 const GramianSet& gramians, int m, int T,
                                 int N, std::uint64_t seed, int threads) {
  if (N < 2) throw std::invalid_argument("burkholder_probe: need N >= 2");
  const int d = instance.d;
  const double r = std::max(2.0, std::log(static_cast<double>(d)));
  const Matrix& sigma_w = instance.noise.covariance();
  const Matrix gamma_inv = linalg::spd_inverse(gramians.gamma_T);
  const double sigma_w_op = linalg::operator_norm(sigma_w);
  const double mT = static_cast<double>(m) * T;

  std::vector<BurkholderSample> samples(N);
  parallel_for(N, threads, [&](int n) {
    const TrajectoryBatch batch =
        simulate_batch(instance, m, T, rng::substream_seed(seed, n));
    const Matrix sigma_hat = empirical_state_covariance(batch);
    const Matrix martingale = empirical_cross_moment(batch) * gamma_inv;
    BurkholderSample s;
    const double op = linalg::operator_norm(martingale);
    s.m_op_sq = op * op;
    const Matrix s_col = (sigma_w.trace() / mT) * gamma_inv * sigma_hat * gamma_inv;
    s.col_pow = std::pow(linalg::operator_norm(s_col), r / 2.0);
    const double trace_term = (gamma_inv * gamma_inv * sigma_hat).trace();
    s.row_pow = std::pow(sigma_w_op * trace_term / mT, r / 2.0);
    double schatten_sum = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int t = 1; t <= T; ++t) {
        const double sv = batch.noise(i, t).norm() *
                          (gamma_inv * batch.state(i, t).transpose()).norm() / mT;
        schatten_sum += std::pow(sv, r);
      }
    }
    s.schatten_sum = schatten_sum;
    samples[n] = s;
  });

  BurkholderProbe probe = aggregate_burkholder(samples, r);
  probe.dim_warning = d < 8;
  return probe;
}

}  // namespace sysid::diagnostics
