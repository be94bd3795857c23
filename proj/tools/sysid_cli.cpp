// sysid: config-driven laboratory for OLS identification of linear systems.
//
// Subcommands wrap the library one-to-one; a run with the same seed and
// parameters reproduces the library call exactly, byte-identical CSV included.
// Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 invariant
// violation in --self-check mode.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sysid/bounds.hpp"
#include "sysid/diagnostics.hpp"
#include "sysid/estimator.hpp"
#include "sysid/gramians.hpp"
#include "sysid/linalg.hpp"
#include "sysid/montecarlo.hpp"
#include "sysid/presets.hpp"
#include "sysid/rng.hpp"
#include "sysid/table.hpp"
#include "sysid/trajectory.hpp"

namespace {

using nlohmann::json;
using namespace sysid;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitSelfCheck = 3;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix json_to_matrix(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument("config: " + name + " must be a nested array");
  }
  const size_t cols = j.front().size();
  Matrix m(j.size(), cols);
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw std::invalid_argument("config: ragged matrix " + name);
    }
    for (size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

CoordinateLaw parse_law(const std::string& name) {
  if (name == "gaussian") return CoordinateLaw::kGaussian;
  if (name == "rademacher") return CoordinateLaw::kRademacher;
  if (name == "uniform") return CoordinateLaw::kUniform;
  if (name == "spike") return CoordinateLaw::kSpike;
  throw std::invalid_argument("config: unknown coordinate law " + name);
}

struct CommonOptions {
  std::string preset;
  std::string config_path;
  int d = 4;
  double sigma = 1.0;
  int m = 1;
  int T = 100;
  int N = 200;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string json_path;
  int threads = 0;
  json config;  // parsed config file, or null
};

void add_instance_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--preset", opt.preset, "Scenario preset name");
  cmd->add_option("--config", opt.config_path, "JSON config file");
  cmd->add_option("--d", opt.d, "State dimension");
  cmd->add_option("--sigma", opt.sigma, "Preset noise scale");
}

void add_run_flags(CLI::App* cmd, CommonOptions& opt, bool with_n = true) {
  cmd->add_option("--m", opt.m, "Trajectory count");
  cmd->add_option("--T", opt.T, "Trajectory length");
  if (with_n) cmd->add_option("--N", opt.N, "Replicate count");
  cmd->add_option("--seed", opt.seed, "Master seed (64-bit)");
  cmd->add_option("--out", opt.out_path, "CSV output path");
  cmd->add_option("--json", opt.json_path, "JSON summary path (default stdout)");
  cmd->add_option("--threads", opt.threads,
                  "Thread cap (0: SYSID_CLT_THREADS or hardware)");
}

void load_config(CommonOptions& opt) {
  if (opt.config_path.empty()) return;
  std::ifstream file(opt.config_path);
  if (!file) throw std::invalid_argument("cannot open config: " + opt.config_path);
  file >> opt.config;
}

NoiseModel noise_from_config(const json& cfg, Matrix sigma_w) {
  const std::string family = cfg.value("family", "gaussian");
  std::optional<double> nu;
  if (cfg.contains("nu")) nu = cfg["nu"].get<double>();
  if (family == "gaussian") return NoiseModel::gaussian(std::move(sigma_w), nu);
  if (family == "spike") {
    return NoiseModel::spike_isotropic(std::move(sigma_w),
                                       cfg.value("spike_magnitude", 3.0), nu);
  }
  if (family == "uniform-ball") {
    return NoiseModel::uniform_ball(std::move(sigma_w), nu);
  }
  if (family == "product") {
    std::vector<CoordinateLaw> laws;
    if (cfg.contains("coordinate_laws")) {
      for (const auto& l : cfg["coordinate_laws"]) laws.push_back(parse_law(l));
    } else {
      laws.assign(sigma_w.rows(), CoordinateLaw::kGaussian);
    }
    return NoiseModel::product_coordinate(std::move(sigma_w), std::move(laws), nu);
  }
  throw std::invalid_argument("config: unknown noise family " + family);
}

ProblemInstance build_instance(const CommonOptions& opt) {
  const bool explicit_a = opt.config.contains("A");
  if (!opt.preset.empty() && explicit_a) {
    throw std::invalid_argument("give either --preset or an explicit A in --config");
  }
  if (explicit_a) {
    Matrix a = json_to_matrix(opt.config["A"], "A");
    Matrix sigma_w = opt.config.contains("sigma_w")
                         ? json_to_matrix(opt.config["sigma_w"], "sigma_w")
                         : Matrix(opt.sigma * opt.sigma *
                                  Matrix::Identity(a.rows(), a.cols()));
    return {std::move(a), noise_from_config(opt.config, std::move(sigma_w))};
  }
  const std::string name = opt.preset.empty() ? "isotropic-stable" : opt.preset;
  ProblemInstance instance = presets::make(name, opt.d, opt.sigma);
  if (opt.config.contains("family") || opt.config.contains("nu")) {
    instance = ProblemInstance(
        instance.a, noise_from_config(opt.config, instance.noise.covariance()));
  }
  return instance;
}

bounds::BoundConstants constants_from_config(const json& cfg) {
  bounds::BoundConstants c;
  if (!cfg.contains("constants")) return c;
  const json& k = cfg["constants"];
  c.c1 = k.value("c1", c.c1);
  c.c2 = k.value("c2", c.c2);
  c.c_op_lead = k.value("c_op_lead", c.c_op_lead);
  c.c_op_aip = k.value("c_op_aip", c.c_op_aip);
  c.c_op_snm = k.value("c_op_snm", c.c_op_snm);
  c.c_burnin = k.value("c_burnin", c.c_burnin);
  c.c_prior = k.value("c_prior", c.c_prior);
  return c;
}

bounds::PriorBoundParams prior_from_config(const json& cfg) {
  bounds::PriorBoundParams p;
  if (!cfg.contains("prior")) return p;
  const json& k = cfg["prior"];
  p.k_psi2 = k.value("k_psi2", p.k_psi2);
  p.k_vec = k.value("k_vec", p.k_vec);
  p.delta = k.value("delta", p.delta);
  if (k.contains("j_a")) p.j_a = k["j_a"].get<double>();
  return p;
}

std::uint64_t resolve_seed(CommonOptions& opt, json& summary) {
  if (opt.seed.has_value()) {
    summary["seed"] = *opt.seed;
    summary["seed_source"] = "flag";
    return *opt.seed;
  }
  std::random_device device;
  const std::uint64_t seed =
      (static_cast<std::uint64_t>(device()) << 32) ^ device();
  summary["seed"] = seed;
  summary["seed_source"] = "entropy";
  return seed;
}

void emit_summary(const json& summary, const std::string& path) {
  if (path.empty()) {
    std::cout << summary.dump(2) << "\n";
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open for writing: " + path);
  file << summary.dump(2) << "\n";
}

json burnin_to_json(const std::vector<bounds::BurninResult>& list) {
  json out = json::object();
  for (const auto& b : list) {
    out[bounds::to_string(b.kind)] = {{"required", b.required},
                                      {"actual", b.actual},
                                      {"satisfied", b.satisfied}};
  }
  return out;
}

json thm_to_json(const bounds::ThmBound& b) {
  return {{"leading", b.leading},
          {"higher", b.higher},
          {"total", b.leading + b.higher},
          {"dim_warning", b.dim_warning},
          {"burnin", burnin_to_json(b.burnin)}};
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int run_simulate(CommonOptions& opt, const std::string& noise_out) {
  json summary;
  const std::uint64_t seed = resolve_seed(opt, summary);
  const ProblemInstance instance = build_instance(opt);
  const TrajectoryBatch batch =
      simulate_batch(instance, opt.m, opt.T, seed, opt.threads);
  summary["command"] = "simulate";
  summary["m"] = opt.m;
  summary["T"] = opt.T;
  summary["d"] = instance.d;
  summary["recursion_residual"] = recursion_residual(batch, instance);

  if (!opt.out_path.empty()) {
    Table table;
    table.columns = {"trajectory", "t"};
    for (int j = 1; j <= instance.d; ++j) {
      table.columns.push_back("x_" + std::to_string(j));
    }
    for (int i = 0; i < batch.m; ++i) {
      for (int t = 1; t <= batch.T + 1; ++t) {
        std::vector<double> row = {static_cast<double>(i + 1),
                                   static_cast<double>(t)};
        for (int j = 0; j < instance.d; ++j) row.push_back(batch.state(i, t)[j]);
        table.add_row(std::move(row));
      }
    }
    write_csv_file(table, opt.out_path);
    summary["out"] = opt.out_path;
  }
  if (!noise_out.empty()) {
    Table table;
    table.columns = {"trajectory", "t"};
    for (int j = 1; j <= instance.d; ++j) {
      table.columns.push_back("w_" + std::to_string(j));
    }
    for (int i = 0; i < batch.m; ++i) {
      for (int t = 1; t <= batch.T; ++t) {
        std::vector<double> row = {static_cast<double>(i + 1),
                                   static_cast<double>(t)};
        for (int j = 0; j < instance.d; ++j) row.push_back(batch.noise(i, t)[j]);
        table.add_row(std::move(row));
      }
    }
    write_csv_file(table, noise_out);
    summary["noise_out"] = noise_out;
  }
  emit_summary(summary, opt.json_path);
  return kExitOk;
}

int run_fit(CommonOptions& opt, const std::vector<double>& ps) {
  json summary;
  const std::uint64_t seed = resolve_seed(opt, summary);
  const ProblemInstance instance = build_instance(opt);
  const TrajectoryBatch batch =
      simulate_batch(instance, opt.m, opt.T, seed, opt.threads);
  const Matrix a_hat = ols_fit(batch);
  const GramianSet gramians = compute_gramians(instance, opt.T);
  const ErrorReport report = error_report(a_hat, instance, gramians, ps);

  const Matrix x = design_matrix(batch);
  const Matrix y = response_matrix(batch);
  const Matrix gram = x.transpose() * x;
  const Matrix cross = y.transpose() * x;
  const double neq_residual =
      (a_hat * gram - cross).norm() / std::max(cross.norm(), 1e-300);

  summary["command"] = "fit";
  summary["a_hat"] = matrix_to_json(report.a_hat);
  summary["frob_sq"] = report.frob_sq;
  summary["op_sq"] = report.op_sq;
  summary["weighted_sq"] = report.weighted_sq;
  json schatten = json::object();
  for (const auto& [p, value] : report.schatten_sq) {
    schatten[std::isinf(p) ? "inf" : format_double(p)] = value;
  }
  summary["schatten_sq"] = schatten;
  summary["normal_equation_residual"] = neq_residual;
  emit_summary(summary, opt.json_path);
  return kExitOk;
}

int run_rates(CommonOptions& opt, double q) {
  json summary;
  summary["command"] = "rates";
  const ProblemInstance instance = build_instance(opt);
  const GramianSet gramians = compute_gramians(instance, opt.T);
  const bounds::RateReport report =
      bounds::evaluate_rates(instance, gramians, opt.m, opt.T, q,
                             prior_from_config(opt.config),
                             constants_from_config(opt.config));
  summary["gamma_f_target"] = report.gamma_f_target;
  summary["gamma_op_target"] = report.gamma_op_target;
  summary["thm31_many"] = thm_to_json(report.thm31_many);
  summary["thm32_many"] = thm_to_json(report.thm32_many);
  if (report.thm31_stable) summary["thm31_stable"] = thm_to_json(*report.thm31_stable);
  if (report.thm32_stable) summary["thm32_stable"] = thm_to_json(*report.thm32_stable);
  summary["prior_frob"] = report.prior.prior_frob;
  summary["prior_excess_conversion"] = report.prior.prior_excess_conversion;
  summary["prior_op"] = report.prior.prior_op;
  summary["burnin"] = burnin_to_json(report.burnin);
  summary["constants_used"] = report.constants_used;
  summary["strictly_stable"] = gramians.strictly_stable;
  summary["spectral_radius"] = gramians.spectral_radius;
  if (gramians.kappa) summary["kappa"] = *gramians.kappa;
  emit_summary(summary, opt.json_path);
  return kExitOk;
}

int run_decompose(CommonOptions& opt, const std::vector<double>& ps,
                  bool self_check) {
  json summary;
  const std::uint64_t seed = resolve_seed(opt, summary);
  const ProblemInstance instance = build_instance(opt);
  const TrajectoryBatch batch =
      simulate_batch(instance, opt.m, opt.T, seed, opt.threads);
  const GramianSet gramians = compute_gramians(instance, opt.T);
  const auto report = diagnostics::decompose(batch, instance, gramians, ps);

  summary["command"] = "decompose";
  summary["iso_error"] = report.iso_error;
  summary["decomposition_residual"] = report.decomposition_residual;
  auto map_to_json = [](const std::map<double, double>& m) {
    json out = json::object();
    for (const auto& [p, v] : m) out[std::isinf(p) ? "inf" : format_double(p)] = v;
    return out;
  };
  summary["t1_sq"] = map_to_json(report.t1_sq);
  summary["t2_sq"] = map_to_json(report.t2_sq);
  summary["total_sq"] = map_to_json(report.total_sq);
  if (gramians.kappa) summary["kappa"] = *gramians.kappa;

  bool ok = report.decomposition_residual <= 1e-9;
  for (const double q : {0.1, 1.0, 10.0}) {
    for (const auto& [p, total] : report.total_sq) {
      const double rhs = (1.0 + q) * report.t1_sq.at(p) +
                         (1.0 + 1.0 / q) * report.t2_sq.at(p) + 1e-9;
      if (total > rhs) ok = false;
    }
  }
  summary["self_check_ok"] = ok;
  emit_summary(summary, opt.json_path);
  return self_check && !ok ? kExitSelfCheck : kExitOk;
}

int run_identities(CommonOptions& opt, int v_count, bool self_check) {
  json summary;
  const std::uint64_t seed = resolve_seed(opt, summary);
  const ProblemInstance instance = build_instance(opt);
  const TrajectoryBatch batch =
      simulate_batch(instance, opt.m, opt.T, seed, opt.threads);
  const GramianSet gramians = compute_gramians(instance, opt.T);

  const auto qv = diagnostics::quadratic_variation_identities(batch, instance,
                                                              gramians);
  const auto seq = diagnostics::martingale_increments(batch, instance, gramians);
  Matrix sum = Matrix::Zero(instance.d, instance.d);
  for (const Matrix& inc : seq.increments) sum += inc;
  const Matrix target = empirical_cross_moment(batch) *
                        linalg::spd_inverse(gramians.gamma_T);
  const double martingale_residual = linalg::relative_error(sum, target);

  auto vstream = rng::Stream(rng::substream_seed(seed, 0xBEEFULL));
  double quadform_worst = 0.0;
  double trace_worst = 0.0;
  for (int k = 0; k < v_count; ++k) {
    Vector v(instance.d);
    do {
      for (int j = 0; j < instance.d; ++j) v[j] = vstream.normal();
    } while (v.norm() == 0.0);
    v.normalize();
    const auto check =
        diagnostics::block_toeplitz_quadratic_form(batch, instance, gramians, v);
    quadform_worst = std::max(
        quadform_worst, std::abs(check.lhs - check.rhs) /
                            std::max(std::abs(check.lhs), 1e-300));
    trace_worst = std::max(trace_worst, std::abs(check.trace_q - 1.0));
  }

  summary["command"] = "identities";
  summary["residual_col"] = qv.residual_col;
  summary["residual_row"] = qv.residual_row;
  summary["martingale_sum_residual"] = martingale_residual;
  summary["quadform_max_residual"] = quadform_worst;
  summary["trace_q_max_deviation"] = trace_worst;
  const bool ok = qv.residual_col <= 1e-9 && qv.residual_row <= 1e-9 &&
                  martingale_residual <= 1e-9 && quadform_worst <= 1e-9 &&
                  trace_worst <= 1e-9;
  summary["self_check_ok"] = ok;
  emit_summary(summary, opt.json_path);
  return self_check && !ok ? kExitSelfCheck : kExitOk;
}

int run_isometry(CommonOptions& opt, std::vector<int> m_grid,
                 std::vector<int> t_grid, double r) {
  json summary;
  const std::uint64_t seed = resolve_seed(opt, summary);
  const ProblemInstance instance = build_instance(opt);
  if (m_grid.empty()) m_grid = {opt.m};
  if (t_grid.empty()) t_grid = {opt.T};
  const auto rows = diagnostics::isometry_probe(instance, m_grid, t_grid, r,
                                                opt.N, seed, opt.threads);
  Table table;
  table.columns = {"m", "T", "moment", "stderr", "envelope"};
  std::vector<double> log_mt, log_moment;
  for (const auto& row : rows) {
    table.add_row({static_cast<double>(row.m), static_cast<double>(row.T),
                   row.moment, row.stderr_, row.envelope});
    log_mt.push_back(std::log(static_cast<double>(row.m) * row.T));
    log_moment.push_back(std::log(row.moment));
  }
  if (!opt.out_path.empty()) write_csv_file(table, opt.out_path);

  summary["command"] = "isometry";
  summary["r"] = r;
  summary["rows"] = rows.size();
  if (rows.size() >= 2) {
    summary["slope_log_moment_vs_log_mT"] =
        mc::regression_slope(log_mt, log_moment);
  }
  emit_summary(summary, opt.json_path);
  return kExitOk;
}

int run_smallball(CommonOptions& opt, int k, std::vector<double> eps_grid,
                  int v_count, double c, double alpha) {
  json summary;
  const std::uint64_t seed = resolve_seed(opt, summary);
  const ProblemInstance instance = build_instance(opt);
  if (eps_grid.empty()) eps_grid = {0.001, 0.01, 0.05, 0.1, 0.25};
  const auto rows = diagnostics::small_ball_probe(
      instance, k, eps_grid, opt.N, seed, v_count, c, alpha, opt.threads);
  Table table;
  table.columns = {"eps", "prob_max", "prob_mean", "stderr", "envelope"};
  for (const auto& row : rows) {
    table.add_row({row.eps, row.prob_max, row.prob_mean, row.stderr_,
                   row.envelope});
  }
  if (!opt.out_path.empty()) write_csv_file(table, opt.out_path);
  summary["command"] = "smallball";
  summary["k"] = k;
  summary["v_count"] = v_count;
  summary["c"] = c;
  summary["alpha"] = alpha;
  summary["rows"] = rows.size();
  emit_summary(summary, opt.json_path);
  return kExitOk;
}

int run_chevet(CommonOptions& opt, int pairs, int max_dim, double upper_c) {
  json summary;
  const std::uint64_t seed = resolve_seed(opt, summary);
  Table table;
  table.columns = {"pair",      "a_rows",  "a_cols",    "b_rows",
                   "b_cols",    "mc_mean", "stderr",    "lower_env",
                   "upper_env", "ok"};
  int violations = 0;

  auto run_pair = [&](int index, const Matrix& a, const Matrix& b) {
    const auto result = diagnostics::chevet_oracle(
        a, b, opt.N, rng::substream_seed(seed, index), upper_c, opt.threads);
    const bool ok =
        result.mc_mean >= result.lower_env && result.mc_mean <= result.upper_env;
    if (!ok) ++violations;
    table.add_row({static_cast<double>(index), static_cast<double>(a.rows()),
                   static_cast<double>(a.cols()), static_cast<double>(b.rows()),
                   static_cast<double>(b.cols()), result.mc_mean, result.stderr_,
                   result.lower_env, result.upper_env, ok ? 1.0 : 0.0});
  };

  if (opt.config.contains("A") && opt.config.contains("B")) {
    run_pair(0, json_to_matrix(opt.config["A"], "A"),
             json_to_matrix(opt.config["B"], "B"));
  } else {
    auto shape_stream = rng::Stream(rng::substream_seed(seed, 0x5AD0ULL));
    for (int p = 0; p < pairs; ++p) {
      const auto dim = [&]() {
        return 1 + static_cast<int>(shape_stream.next_u64() %
                                    static_cast<std::uint64_t>(max_dim));
      };
      const int am = dim(), an = dim(), bm = an, bn = dim();
      Matrix a(am, an), b(bm, bn);
      for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = shape_stream.normal();
      for (Eigen::Index j = 0; j < b.cols(); ++j)
        for (Eigen::Index i = 0; i < b.rows(); ++i) b(i, j) = shape_stream.normal();
      run_pair(p, a, b);
    }
  }
  if (!opt.out_path.empty()) write_csv_file(table, opt.out_path);
  summary["command"] = "chevet";
  summary["pairs"] = table.rows.size();
  summary["violations"] = violations;
  emit_summary(summary, opt.json_path);
  return violations == 0 ? kExitOk : kExitNumerical;
}

int run_clt_check(CommonOptions& opt, const std::string& regime_name) {
  json summary;
  const std::uint64_t seed = resolve_seed(opt, summary);
  const ProblemInstance instance = build_instance(opt);
  bounds::LimitRegime regime;
  if (regime_name == "fixed-m") {
    regime = bounds::LimitRegime::kFixedTManyTraj;
  } else if (regime_name == "stable-T") {
    regime = bounds::LimitRegime::kStableLongT;
  } else if (regime_name == "joint") {
    regime = bounds::LimitRegime::kJoint;
  } else {
    throw std::invalid_argument("clt-check: regime must be fixed-m|stable-T|joint");
  }
  const auto result = mc::clt_covariance_check(instance, regime, opt.m, opt.T,
                                               opt.N, seed, opt.threads);
  if (!opt.out_path.empty()) {
    Table table;
    table.columns = {"row", "col", "sample", "predicted"};
    for (Eigen::Index i = 0; i < result.sample_cov.rows(); ++i) {
      for (Eigen::Index j = 0; j < result.sample_cov.cols(); ++j) {
        table.add_row({static_cast<double>(i), static_cast<double>(j),
                       result.sample_cov(i, j), result.predicted(i, j)});
      }
    }
    write_csv_file(table, opt.out_path);
  }
  summary["command"] = "clt-check";
  summary["regime"] = regime_name;
  summary["rel_dist"] = result.rel_dist;
  summary["failures"] = result.failures;
  emit_summary(summary, opt.json_path);
  return kExitOk;
}

int run_sweep(CommonOptions& opt, std::vector<int> m_grid, std::vector<int> t_grid,
              const std::string& norm_name) {
  json summary;
  const std::uint64_t seed = resolve_seed(opt, summary);
  const ProblemInstance instance = build_instance(opt);
  if (!m_grid.empty() && !t_grid.empty()) {
    throw std::invalid_argument("sweep: grid along one axis only (--m-grid or --T-grid)");
  }
  if (m_grid.empty() && t_grid.empty()) {
    throw std::invalid_argument("sweep: need --m-grid or --T-grid");
  }
  std::vector<mc::SweepPoint> grid;
  for (const int m : m_grid) grid.push_back({m, opt.T});
  for (const int T : t_grid) grid.push_back({opt.m, T});

  const auto result =
      mc::rate_sweep(instance, grid, mc::NormSpec::parse(norm_name), opt.N, seed,
                     prior_from_config(opt.config), opt.threads);
  Table table;
  table.columns = {"m",           "T",        "measured",     "stderr",
                   "gamma_target", "prior_frob", "prior_excess", "prior_op",
                   "ratio_measured", "ratio_prior", "failures"};
  for (const auto& row : result.rows) {
    table.add_row({static_cast<double>(row.m), static_cast<double>(row.T),
                   row.measured, row.stderr_, row.gamma_target, row.prior_frob,
                   row.prior_excess, row.prior_op, row.ratio_measured,
                   row.ratio_prior, static_cast<double>(row.failures)});
  }
  if (!opt.out_path.empty()) write_csv_file(table, opt.out_path);
  summary["command"] = "sweep";
  summary["norm"] = norm_name;
  summary["slope"] = result.slope;
  summary["rows"] = result.rows.size();
  emit_summary(summary, opt.json_path);
  return kExitOk;
}

int run_gap(CommonOptions& opt, const std::vector<int>& dims) {
  json summary;
  const std::uint64_t seed = resolve_seed(opt, summary);
  mc::GapPreset preset;
  if (opt.preset == "frob-gap") {
    preset = mc::GapPreset::kFrobGap;
  } else if (opt.preset == "op-gap") {
    preset = mc::GapPreset::kOpGap;
  } else {
    throw std::invalid_argument("gap: --preset must be frob-gap or op-gap");
  }
  const auto rows = mc::gap_demonstration(preset, dims, opt.T, opt.m, opt.N,
                                          seed, prior_from_config(opt.config),
                                          opt.threads);
  const bool frob = preset == mc::GapPreset::kFrobGap;
  Table table;
  table.columns = {"d",
                   "measured",
                   "stderr",
                   frob ? "gamma_f" : "gamma_op",
                   frob ? "prior_frob" : "prior_op",
                   "ratio_prior",
                   "ratio_measured"};
  int failures = 0;
  for (const auto& row : rows) {
    table.add_row({static_cast<double>(row.d), row.measured, row.stderr_,
                   row.gamma, row.prior, row.ratio_prior, row.ratio_measured});
    failures += row.failures;
  }
  if (!opt.out_path.empty()) write_csv_file(table, opt.out_path);
  summary["command"] = "gap";
  summary["preset"] = opt.preset;
  summary["failures"] = failures;
  summary["rows"] = rows.size();
  emit_summary(summary, opt.json_path);
  return kExitOk;
}

int run_burkholder(CommonOptions& opt) {
  json summary;
  const std::uint64_t seed = resolve_seed(opt, summary);
  const ProblemInstance instance = build_instance(opt);
  const GramianSet gramians = compute_gramians(instance, opt.T);
  const auto probe = diagnostics::burkholder_probe(instance, gramians, opt.m,
                                                   opt.T, opt.N, seed,
                                                   opt.threads);
  summary["command"] = "burkholder";
  summary["lhs"] = probe.lhs;
  summary["term_col"] = probe.term_col;
  summary["term_row"] = probe.term_row;
  summary["term_schatten"] = probe.term_schatten;
  summary["ratio"] = probe.ratio;
  summary["r"] = probe.r;
  summary["dim_warning"] = probe.dim_warning;
  emit_summary(summary, opt.json_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identification laboratory for linear dynamical systems"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string noise_out, regime_name = "fixed-m", norm_name = "frob";
  std::vector<double> ps = {1.0, 2.0, 4.0};
  std::vector<int> dims, m_grid, t_grid;
  std::vector<double> eps_grid;
  double q = 1.0, r_moment = 2.0, c_small = 1.0, alpha_small = 0.5;
  double chevet_upper = 8.0;
  int v_count = 20, k_window = 1, pairs = 10, max_dim = 32;
  bool self_check = false;

  auto* simulate = app.add_subcommand("simulate", "Simulate a trajectory batch");
  add_instance_flags(simulate, opt);
  add_run_flags(simulate, opt, false);
  simulate->add_option("--noise-out", noise_out, "CSV path for noise rows");

  auto* fit = app.add_subcommand("fit", "Simulate and fit OLS");
  add_instance_flags(fit, opt);
  add_run_flags(fit, opt, false);
  fit->add_option("--p", ps, "Schatten p list")->delimiter(',');

  auto* rates = app.add_subcommand("rates", "Evaluate all closed-form rates");
  add_instance_flags(rates, opt);
  add_run_flags(rates, opt, false);
  rates->add_option("--q", q, "Basic-error-inequality tuning parameter");

  auto* decompose = app.add_subcommand("decompose", "Second-order decomposition");
  add_instance_flags(decompose, opt);
  add_run_flags(decompose, opt, false);
  decompose->add_option("--p", ps, "Schatten p list")->delimiter(',');
  decompose->add_flag("--self-check", self_check, "Exit 3 on identity violation");

  auto* identities = app.add_subcommand("identities", "Pathwise algebra checks");
  add_instance_flags(identities, opt);
  add_run_flags(identities, opt, false);
  identities->add_option("--v-count", v_count, "Random test directions");
  identities->add_flag("--self-check", self_check, "Exit 3 on identity violation");

  auto* isometry = app.add_subcommand("isometry", "Isometry moment probe");
  add_instance_flags(isometry, opt);
  add_run_flags(isometry, opt);
  isometry->add_option("--m-grid", m_grid, "m grid")->delimiter(',');
  isometry->add_option("--T-grid", t_grid, "T grid")->delimiter(',');
  isometry->add_option("--r", r_moment, "Moment order");

  auto* smallball = app.add_subcommand("smallball", "Small-ball probability probe");
  add_instance_flags(smallball, opt);
  add_run_flags(smallball, opt);
  smallball->add_option("--k", k_window, "Window length");
  smallball->add_option("--eps", eps_grid, "Epsilon grid")->delimiter(',');
  smallball->add_option("--v-count", v_count, "Random test directions");
  smallball->add_option("--c", c_small, "Envelope constant c");
  smallball->add_option("--alpha", alpha_small, "Envelope exponent alpha");

  auto* chevet = app.add_subcommand("chevet", "Gaussian Chevet envelope check");
  add_instance_flags(chevet, opt);
  add_run_flags(chevet, opt);
  chevet->add_option("--pairs", pairs, "Random shape pairs");
  chevet->add_option("--max-dim", max_dim, "Max dimension per shape");
  chevet->add_option("--upper-c", chevet_upper, "Upper envelope constant");

  auto* clt = app.add_subcommand("clt-check", "Empirical CLT covariance check");
  add_instance_flags(clt, opt);
  add_run_flags(clt, opt);
  clt->add_option("--regime", regime_name, "fixed-m|stable-T|joint");

  auto* sweep = app.add_subcommand("sweep", "Risk sweep with rate slopes");
  add_instance_flags(sweep, opt);
  add_run_flags(sweep, opt);
  sweep->add_option("--m-grid", m_grid, "m grid")->delimiter(',');
  sweep->add_option("--T-grid", t_grid, "T grid")->delimiter(',');
  sweep->add_option("--norm", norm_name, "frob|op|weighted|schatten:<p>");

  auto* gap = app.add_subcommand("gap", "Dimension-gap headline table");
  add_instance_flags(gap, opt);
  add_run_flags(gap, opt);
  gap->add_option("--dims", dims, "Ascending d list")->delimiter(',')->required();

  auto* burkholder = app.add_subcommand("burkholder", "Matrix martingale probe");
  add_instance_flags(burkholder, opt);
  add_run_flags(burkholder, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    load_config(opt);
    if (simulate->parsed()) return run_simulate(opt, noise_out);
    if (fit->parsed()) return run_fit(opt, ps);
    if (rates->parsed()) return run_rates(opt, q);
    if (decompose->parsed()) return run_decompose(opt, ps, self_check);
    if (identities->parsed()) return run_identities(opt, v_count, self_check);
    if (isometry->parsed()) return run_isometry(opt, m_grid, t_grid, r_moment);
    if (smallball->parsed())
      return run_smallball(opt, k_window, eps_grid, v_count, c_small, alpha_small);
    if (chevet->parsed()) return run_chevet(opt, pairs, max_dim, chevet_upper);
    if (clt->parsed()) return run_clt_check(opt, regime_name);
    if (sweep->parsed()) return run_sweep(opt, m_grid, t_grid, norm_name);
    if (gap->parsed()) return run_gap(opt, dims);
    if (burkholder->parsed()) return run_burkholder(opt);
    std::cerr << "no subcommand\n";
    return kExitUsage;
  } catch (const SingularGramError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "usage error: malformed config: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
