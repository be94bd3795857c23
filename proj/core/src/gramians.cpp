#include "sysid/gramians.hpp"

#include <cmath>
#include <stdexcept>

#include "sysid/linalg.hpp"

namespace sysid {

namespace {

constexpr double kStableMargin = 1e-9;

}  // namespace

StabilityCertificate stability_certificate(const Matrix& a) {
  StabilityCertificate cert;
  const double rho_a = linalg::spectral_radius(a);
  if (!(rho_a < 1.0 - kStableMargin)) {
    cert.valid = false;
    cert.rho = rho_a;
    return cert;
  }
  cert.valid = true;
  cert.rho = 0.5 * (1.0 + rho_a);
  cert.k_check = std::max(
      200, 4 * static_cast<int>(std::ceil(1.0 / std::log(1.0 / cert.rho))));

  // Sweep k = 0, 1, ... maximizing ||A^k|| / rho^k. Once ||A^k|| <= rho^k the
  // running max certifies all larger powers via sub-multiplicativity. Powers
  // are rescaled to dodge underflow on long sweeps.
  const double log_rho = std::log(cert.rho);
  double log_max = 0.0;  // k = 0 term
  Matrix power = Matrix::Identity(a.rows(), a.cols());
  double log_scale = 0.0;
  const long hard_cap = std::max<long>(10L * cert.k_check, 1000000L);
  bool certified = false;
  for (long k = 1; k <= hard_cap; ++k) {
    power = power * a;
    const double norm = linalg::operator_norm(power);
    if (norm == 0.0) {  // nilpotent: all further powers vanish
      certified = true;
      break;
    }
    const double log_norm = log_scale + std::log(norm);
    if (norm < 1e-100 || norm > 1e100) {
      log_scale = log_norm;
      power /= norm;
    }
    const double log_q = log_norm - static_cast<double>(k) * log_rho;
    log_max = std::max(log_max, log_q);
    if (log_q <= 0.0) {
      certified = true;
      break;
    }
  }
  if (!certified) {
    throw std::runtime_error(
        "stability_certificate: power sweep did not certify a tail bound");
  }
  cert.m_const = std::exp(log_max);
  return cert;
}

GramianSet compute_gramians(const ProblemInstance& instance, int T) {
  if (T < 1) throw std::invalid_argument("compute_gramians: need T >= 1");
  const Matrix& a = instance.a;
  const Matrix& sigma_w = instance.noise.covariance();
  if (a.rows() != sigma_w.rows()) {
    throw std::invalid_argument("compute_gramians: dimension mismatch");
  }

  GramianSet out;
  out.T = T;
  out.spectral_radius = linalg::spectral_radius(a);
  out.strictly_stable = out.spectral_radius < 1.0 - kStableMargin;

  Matrix sigma = sigma_w;  // Sigma_1
  Matrix sum = sigma;
  const bool keep_sequence = T <= kSigmaSequenceCap;
  if (keep_sequence) {
    out.sigma_t.reserve(T);
    out.sigma_t.push_back(sigma);
  }
  for (int t = 2; t <= T; ++t) {
    sigma = a * sigma * a.transpose() + sigma_w;
    sigma = 0.5 * (sigma + sigma.transpose());
    sum += sigma;
    if (keep_sequence) out.sigma_t.push_back(sigma);
  }
  out.gamma_T = sum / static_cast<double>(T);

  if (out.strictly_stable) {
    out.sigma_inf = linalg::solve_discrete_lyapunov(a, sigma_w);
    out.cert = stability_certificate(a);
    out.kappa = kappa_burn_in(instance, *out.cert, out);
  }
  return out;
}

int kappa_burn_in(const ProblemInstance& instance,
                  const StabilityCertificate& cert,
                  const GramianSet& gramians) {
  if (!cert.valid) {
    throw std::invalid_argument("kappa_burn_in: certificate is not valid");
  }
  if (!gramians.sigma_inf.has_value()) {
    throw std::invalid_argument("kappa_burn_in: Sigma_inf unavailable");
  }
  const double sigma_w_op = linalg::operator_norm(instance.noise.covariance());
  const double lambda_min_inf =
      linalg::symmetric_eig_range(*gramians.sigma_inf).first;
  const double rho = cert.rho;
  const double arg = std::sqrt(2.0 * sigma_w_op) * cert.m_const /
                     std::sqrt((1.0 - rho * rho) * lambda_min_inf);
  const double raw = std::log(arg) / std::log(1.0 / rho);
  const long half = std::max(1L, static_cast<long>(std::ceil(raw)));
  return static_cast<int>(2 * half);
}

Matrix gamma_average(const ProblemInstance& instance, int k) {
  if (k < 1) throw std::invalid_argument("gamma_average: need k >= 1");
  const Matrix& a = instance.a;
  const Matrix& sigma_w = instance.noise.covariance();
  Matrix sigma = sigma_w;
  Matrix sum = sigma;
  for (int t = 2; t <= k; ++t) {
    sigma = a * sigma * a.transpose() + sigma_w;
    sigma = 0.5 * (sigma + sigma.transpose());
    sum += sigma;
  }
  return sum / static_cast<double>(k);
}

IsometryCheck check_gramian_isometry(const ProblemInstance& instance, int T) {
  const GramianSet gramians = compute_gramians(instance, T);
  if (!gramians.strictly_stable || !gramians.kappa.has_value()) {
    throw std::invalid_argument(
        "check_gramian_isometry: instance is not strictly stable");
  }
  const int kappa = *gramians.kappa;
  if (T < kappa) {
    throw std::invalid_argument("check_gramian_isometry: T < kappa(A)");
  }

  IsometryCheck check;
  check.kappa = kappa;
  const Matrix gamma_kappa = gamma_average(instance, kappa);
  const Matrix gamma_T_inv_sqrt = linalg::spd_inv_sqrt(gramians.gamma_T);
  const Matrix ratio = gamma_T_inv_sqrt * gamma_kappa * gamma_T_inv_sqrt;
  std::tie(check.eig_min, check.eig_max) = linalg::symmetric_eig_range(ratio);

  const Matrix inf_inv_sqrt = linalg::spd_inv_sqrt(*gramians.sigma_inf);
  const Matrix whitened = inf_inv_sqrt * gramians.gamma_T * inf_inv_sqrt;
  check.quarter_ok =
      linalg::symmetric_eig_range(whitened).first >= 0.25 - 1e-9;

  check.passes = check.eig_min >= 0.25 - 1e-9 && check.eig_max <= 4.0 + 1e-9;
  return check;
}

}  // namespace sysid
