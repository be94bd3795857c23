#include "sysid/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "sysid/linalg.hpp"

namespace sysid::bounds {

namespace {

struct GammaStats {
  double trace_inv;
  double lambda_min;
  double op_inv;  // 1 / lambda_min
};

GammaStats gamma_stats(const Matrix& gamma_T) {
  const auto [lo, hi] = linalg::symmetric_eig_range(gamma_T);
  if (!(lo > 0.0) || lo <= 1e-13 * hi) {
    throw std::domain_error("bounds: Gamma_T is numerically singular");
  }
  return {linalg::spd_inverse(gamma_T).trace(), lo, 1.0 / lo};
}

const Matrix& require_sigma_inf(const GramianSet& gramians, const char* who) {
  if (!gramians.sigma_inf.has_value()) {
    throw std::invalid_argument(std::string(who) +
                                ": requires a strictly stable instance");
  }
  return *gramians.sigma_inf;
}

const StabilityCertificate& require_cert(const GramianSet& gramians,
                                         const char* who) {
  if (!gramians.cert.has_value() || !gramians.cert->valid) {
    throw std::invalid_argument(std::string(who) +
                                ": requires a valid stability certificate");
  }
  return *gramians.cert;
}

}  // namespace

std::map<std::string, double> BoundConstants::as_map() const {
  return {{"c1", c1},
          {"c2", c2},
          {"c_op_lead", c_op_lead},
          {"c_op_aip", c_op_aip},
          {"c_op_snm", c_op_snm},
          {"c_burnin", c_burnin},
          {"c_prior", c_prior}};
}

std::string to_string(BurninKind kind) {
  switch (kind) {
    case BurninKind::kFrobMany13: return "frob_many_eq13";
    case BurninKind::kFrobStable14: return "frob_stable_eq14";
    case BurninKind::kOpMany16: return "op_many_eq16";
    case BurninKind::kOpStable17: return "op_stable_eq17";
    case BurninKind::kThm31Many: return "thm31_many_hypothesis";
    case BurninKind::kThm31Stable: return "thm31_stable_hypothesis";
    case BurninKind::kThm32Many: return "thm32_many_hypothesis";
    case BurninKind::kThm32Stable: return "thm32_stable_hypothesis";
    case BurninKind::kTGeKappa: return "t_ge_kappa";
  }
  return "unknown";
}

double clt_rate_frobenius(const Matrix& sigma_w, const Matrix& gamma_T,
                          double m, double T) {
  const GammaStats stats = gamma_stats(gamma_T);
  return sigma_w.trace() * stats.trace_inv / (m * T);
}

double clt_rate_operator(const Matrix& sigma_w, const Matrix& gamma_T,
                         double m, double T) {
  const GammaStats stats = gamma_stats(gamma_T);
  return (linalg::operator_norm(sigma_w) * stats.trace_inv +
          sigma_w.trace() * stats.op_inv) /
         (m * T);
}

double tr_bar(const Matrix& m, int d) {
  return std::max(m.trace(), std::log(static_cast<double>(d)) *
                                 linalg::operator_norm(m));
}

std::pair<Matrix, Matrix> asymptotic_covariance(LimitRegime regime,
                                                const ProblemInstance& instance,
                                                const GramianSet& gramians,
                                                int m, int T) {
  const Matrix& sigma_w = instance.noise.covariance();
  switch (regime) {
    case LimitRegime::kFixedTManyTraj:
      return {linalg::spd_inverse(gramians.gamma_T) / static_cast<double>(T),
              sigma_w};
    case LimitRegime::kStableLongT: {
      const Matrix& inf = require_sigma_inf(gramians, "asymptotic_covariance");
      return {linalg::spd_inverse(inf) / static_cast<double>(m), sigma_w};
    }
    case LimitRegime::kJoint: {
      const Matrix& inf = require_sigma_inf(gramians, "asymptotic_covariance");
      return {linalg::spd_inverse(inf), sigma_w};
    }
  }
  throw std::logic_error("unreachable limit regime");
}

BurninResult burnin_check(BurninKind kind, const ProblemInstance& instance,
                          const GramianSet& gramians, int m, int T, double q,
                          const BoundConstants& constants) {
  const Matrix& sigma_w = instance.noise.covariance();
  const double nu = instance.noise.nu();
  const double d = instance.d;
  const double c = constants.c_burnin;
  const double sigma_w_op = linalg::operator_norm(sigma_w);
  const double sigma_w_tr = sigma_w.trace();
  const GammaStats gs = gamma_stats(gramians.gamma_T);
  const double mT = static_cast<double>(m) * static_cast<double>(T);
  const double log_d = std::log(d);

  BurninResult out;
  out.kind = kind;
  switch (kind) {
    case BurninKind::kFrobMany13:
      out.actual = m;
      out.required = c * std::pow(nu, 6) * d * d * d * sigma_w_op /
                     (q * q * gs.trace_inv * gs.lambda_min * sigma_w_tr);
      break;
    case BurninKind::kFrobStable14: {
      const auto& cert = require_cert(gramians, "burnin_check");
      const double lmin_inf =
          linalg::symmetric_eig_range(require_sigma_inf(gramians, "burnin_check"))
              .first;
      out.actual = mT;
      out.required = c * std::pow(nu, 6) * d * d * d * cert.m_const *
                     std::pow(sigma_w_op, 1.5) /
                     (q * q * (1.0 - cert.rho) * gs.trace_inv *
                      std::pow(lmin_inf, 1.5) * sigma_w_tr);
      break;
    }
    case BurninKind::kOpMany16: {
      const double denom = sigma_w_op * gs.trace_inv + sigma_w_tr * gs.op_inv;
      const double phi_T = sigma_w_op / gs.lambda_min;
      const double numer =
          std::pow(nu, 4) * tr_bar(sigma_w, instance.d) *
              tr_bar(linalg::spd_inverse(gramians.gamma_T), instance.d) +
          std::pow(nu, 6) * d * d * phi_T / (log_d * log_d);
      out.actual = std::pow(static_cast<double>(m), 1.0 - 2.0 / log_d);
      out.required =
          c * (numer / denom) * std::pow(static_cast<double>(T), 2.0 / log_d);
      break;
    }
    case BurninKind::kOpStable17: {
      const auto& cert = require_cert(gramians, "burnin_check");
      const double lmin_inf =
          linalg::symmetric_eig_range(require_sigma_inf(gramians, "burnin_check"))
              .first;
      const double denom = sigma_w_op * gs.trace_inv + sigma_w_tr * gs.op_inv;
      const double phi_inf = sigma_w_op / lmin_inf;
      const double numer =
          std::pow(nu, 4) * tr_bar(sigma_w, instance.d) *
              tr_bar(linalg::spd_inverse(gramians.gamma_T), instance.d) +
          std::pow(nu, 6) * d * d * cert.m_const * std::pow(phi_inf, 1.5) /
              ((1.0 - cert.rho) * log_d * log_d);
      out.actual = std::pow(mT, 1.0 - 2.0 / log_d);
      out.required = c * numer / denom;
      break;
    }
    case BurninKind::kThm31Many:
      out.actual = m;
      out.required = c * d;
      break;
    case BurninKind::kThm31Stable: {
      const auto& cert = require_cert(gramians, "burnin_check");
      const double lmin_inf =
          linalg::symmetric_eig_range(require_sigma_inf(gramians, "burnin_check"))
              .first;
      const double kappa = gramians.kappa.value_or(2);
      out.actual = mT;
      out.required = c *
                     std::max(kappa, cert.m_const / (1.0 - cert.rho) *
                                         std::sqrt(sigma_w_op / lmin_inf)) *
                     d;
      break;
    }
    case BurninKind::kThm32Many:
      out.actual = m;
      out.required = c * std::max(1.0, std::pow(nu, 4)) * d;
      break;
    case BurninKind::kThm32Stable: {
      const auto& cert = require_cert(gramians, "burnin_check");
      const double lmin_inf =
          linalg::symmetric_eig_range(require_sigma_inf(gramians, "burnin_check"))
              .first;
      const double kappa = gramians.kappa.value_or(2);
      out.actual = mT;
      out.required =
          c *
          std::max(kappa, std::max(1.0, std::pow(nu, 4)) * cert.m_const /
                              (1.0 - cert.rho) * std::sqrt(sigma_w_op / lmin_inf)) *
          d;
      break;
    }
    case BurninKind::kTGeKappa:
      out.actual = T;
      out.required = gramians.kappa.value_or(2);
      break;
  }
  out.satisfied = out.actual >= out.required;
  return out;
}

ThmBound thm31_bound(const ProblemInstance& instance, const GramianSet& gramians,
                     int m, int T, double q, Regime regime,
                     const BoundConstants& constants) {
  if (!(q > 0.0)) throw std::invalid_argument("thm31_bound: need q > 0");
  const Matrix& sigma_w = instance.noise.covariance();
  const double nu = instance.noise.nu();
  const double d = instance.d;
  const double mT = static_cast<double>(m) * static_cast<double>(T);
  const GammaStats gs = gamma_stats(gramians.gamma_T);
  const double sigma_w_op = linalg::operator_norm(sigma_w);

  ThmBound out;
  out.leading = (1.0 + q) * clt_rate_frobenius(sigma_w, gramians.gamma_T, m, T);
  if (regime == Regime::kManyTrajectories) {
    out.higher = (1.0 + 1.0 / q) * constants.c1 * std::pow(nu, 6) * d * d * d *
                 sigma_w_op /
                 (gs.lambda_min * static_cast<double>(m) * mT);
    out.burnin.push_back(burnin_check(BurninKind::kThm31Many, instance,
                                      gramians, m, T, q, constants));
    out.burnin.push_back(burnin_check(BurninKind::kFrobMany13, instance,
                                      gramians, m, T, q, constants));
  } else {
    const auto& cert = require_cert(gramians, "thm31_bound");
    const double lmin_inf =
        linalg::symmetric_eig_range(require_sigma_inf(gramians, "thm31_bound"))
            .first;
    out.higher = (1.0 + 1.0 / q) * constants.c2 * std::pow(nu, 6) * d * d * d *
                 cert.m_const * std::pow(sigma_w_op, 1.5) /
                 ((1.0 - cert.rho) * std::pow(lmin_inf, 1.5) * mT * mT);
    out.burnin.push_back(burnin_check(BurninKind::kTGeKappa, instance, gramians,
                                      m, T, q, constants));
    out.burnin.push_back(burnin_check(BurninKind::kThm31Stable, instance,
                                      gramians, m, T, q, constants));
    out.burnin.push_back(burnin_check(BurninKind::kFrobStable14, instance,
                                      gramians, m, T, q, constants));
  }
  return out;
}

ThmBound thm32_bound(const ProblemInstance& instance, const GramianSet& gramians,
                     int m, int T, Regime regime,
                     const BoundConstants& constants) {
  const Matrix& sigma_w = instance.noise.covariance();
  const double nu = instance.noise.nu();
  const double d = instance.d;
  const double log_d = std::log(d);
  const double mT = static_cast<double>(m) * static_cast<double>(T);
  const GammaStats gs = gamma_stats(gramians.gamma_T);
  const double sigma_w_op = linalg::operator_norm(sigma_w);
  const Matrix gamma_inv = linalg::spd_inverse(gramians.gamma_T);

  ThmBound out;
  out.dim_warning = instance.d < 8;
  out.leading = constants.c_op_lead * log_d * log_d *
                (sigma_w_op * gs.trace_inv + sigma_w.trace() * gs.op_inv) / mT;
  const double aip_numer = std::pow(nu, 4) * tr_bar(sigma_w, instance.d) *
                           tr_bar(gamma_inv, instance.d);
  if (regime == Regime::kManyTrajectories) {
    const double aip =
        aip_numer / (std::pow(static_cast<double>(m), 2.0 * (1.0 - 1.0 / log_d)) *
                     std::pow(static_cast<double>(T), 2.0 * (0.5 - 1.0 / log_d)));
    const double snm = std::pow(nu, 6) * d * d * (sigma_w_op / gs.lambda_min) /
                       (static_cast<double>(m) * mT);
    out.higher = constants.c_op_aip * log_d * log_d * aip + constants.c_op_snm * snm;
    out.burnin.push_back(burnin_check(BurninKind::kThm32Many, instance, gramians,
                                      m, T, 1.0, constants));
    out.burnin.push_back(burnin_check(BurninKind::kOpMany16, instance, gramians,
                                      m, T, 1.0, constants));
  } else {
    const auto& cert = require_cert(gramians, "thm32_bound");
    const double lmin_inf =
        linalg::symmetric_eig_range(require_sigma_inf(gramians, "thm32_bound"))
            .first;
    const double phi_inf = sigma_w_op / lmin_inf;
    const double aip = aip_numer / std::pow(mT, 2.0 * (1.0 - 1.0 / log_d));
    const double snm = std::pow(nu, 6) * d * d * cert.m_const *
                       std::pow(phi_inf, 1.5) / ((1.0 - cert.rho) * mT * mT);
    out.higher = constants.c_op_aip * log_d * log_d * aip + constants.c_op_snm * snm;
    out.burnin.push_back(burnin_check(BurninKind::kTGeKappa, instance, gramians,
                                      m, T, 1.0, constants));
    out.burnin.push_back(burnin_check(BurninKind::kThm32Stable, instance,
                                      gramians, m, T, 1.0, constants));
    out.burnin.push_back(burnin_check(BurninKind::kOpStable17, instance,
                                      gramians, m, T, 1.0, constants));
  }
  return out;
}

PriorBounds prior_bounds(const PriorBoundParams& params,
                         const GramianSet& gramians, int d, int m, int T,
                         const BoundConstants& constants) {
  if (!(params.k_psi2 > 0.0) || !(params.k_vec > 0.0)) {
    throw std::invalid_argument("prior_bounds: K constants must be positive");
  }
  if (!(params.delta > 0.0 && params.delta < 1.0)) {
    throw std::invalid_argument("prior_bounds: delta must be in (0, 1)");
  }
  const double mT = static_cast<double>(m) * static_cast<double>(T);
  const double lambda_gamma =
      linalg::symmetric_eig_range(gramians.gamma_T).first;
  const double lambda_min =
      gramians.sigma_inf.has_value()
          ? linalg::symmetric_eig_range(*gramians.sigma_inf).first
          : lambda_gamma;
  const double dd = static_cast<double>(d);
  const double log_term = std::log(1.0 / params.delta);
  PriorBounds out;
  out.prior_frob = constants.c_prior * params.k_psi2 * params.k_psi2 * dd *
                   (dd + log_term) / (mT * lambda_min);
  out.prior_excess_conversion = constants.c_prior * params.k_psi2 *
                                params.k_psi2 * dd * dd / (mT * lambda_gamma);
  out.prior_op = constants.c_prior * params.k_vec * params.k_vec * dd /
                 (mT * lambda_min);
  return out;
}

double truncated_j_a(const Matrix& a, const StabilityCertificate& cert) {
  if (!cert.valid) {
    throw std::invalid_argument("truncated_j_a: certificate is not valid");
  }
  double sum = 0.0;
  double last_norm = 0.0;
  Matrix power = Matrix::Identity(a.rows(), a.cols());
  for (int k = 0; k <= cert.k_check; ++k) {
    last_norm = linalg::operator_norm(power);
    sum += last_norm;
    if (last_norm < 1e-14) return sum;  // remaining tail below double noise
    power = power * a;
  }
  // ||A^{K+j}|| <= ||A^K|| M rho^j bounds the truncated tail.
  sum += last_norm * cert.m_const * cert.rho / (1.0 - cert.rho);
  return sum;
}

RateReport evaluate_rates(const ProblemInstance& instance,
                          const GramianSet& gramians, int m, int T, double q,
                          const PriorBoundParams& prior_params,
                          const BoundConstants& constants) {
  RateReport report;
  const Matrix& sigma_w = instance.noise.covariance();
  report.gamma_f_target = clt_rate_frobenius(sigma_w, gramians.gamma_T, m, T);
  report.gamma_op_target = clt_rate_operator(sigma_w, gramians.gamma_T, m, T);
  report.thm31_many = thm31_bound(instance, gramians, m, T, q,
                                  Regime::kManyTrajectories, constants);
  report.thm32_many = thm32_bound(instance, gramians, m, T,
                                  Regime::kManyTrajectories, constants);
  if (gramians.strictly_stable) {
    report.thm31_stable =
        thm31_bound(instance, gramians, m, T, q, Regime::kStable, constants);
    report.thm32_stable =
        thm32_bound(instance, gramians, m, T, Regime::kStable, constants);
  }
  PriorBoundParams prior = prior_params;
  if (!prior.j_a.has_value() && gramians.cert.has_value() &&
      gramians.cert->valid) {
    prior.j_a = truncated_j_a(instance.a, *gramians.cert);
  }
  report.prior = prior_bounds(prior, gramians, instance.d, m, T, constants);

  auto collect = [&report](const std::vector<BurninResult>& list) {
    report.burnin.insert(report.burnin.end(), list.begin(), list.end());
  };
  collect(report.thm31_many.burnin);
  collect(report.thm32_many.burnin);
  if (report.thm31_stable) collect(report.thm31_stable->burnin);
  if (report.thm32_stable) collect(report.thm32_stable->burnin);

  report.constants_used = constants.as_map();
  report.constants_used["q"] = q;
  report.constants_used["nu"] = instance.noise.nu();
  report.constants_used["k_psi2"] = prior.k_psi2;
  report.constants_used["k_vec"] = prior.k_vec;
  report.constants_used["delta"] = prior.delta;
  if (prior.j_a) report.constants_used["j_a"] = *prior.j_a;
  if (gramians.kappa) report.constants_used["kappa"] = *gramians.kappa;
  return report;
}

}  // namespace sysid::bounds
