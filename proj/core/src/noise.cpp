#include "sysid/noise.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "sysid/linalg.hpp"

namespace sysid {

namespace {

void validate_covariance(const Matrix& sigma_w) {
  if (sigma_w.rows() != sigma_w.cols() || sigma_w.rows() < 1) {
    throw std::invalid_argument("NoiseModel: covariance must be square");
  }
  if ((sigma_w - sigma_w.transpose()).norm() > 1e-10 * (1.0 + sigma_w.norm())) {
    throw std::invalid_argument("NoiseModel: covariance must be symmetric");
  }
  const auto [lo, hi] = linalg::symmetric_eig_range(sigma_w);
  if (!(lo > 0.0) || lo <= 1e-12 * hi) {
    throw std::invalid_argument("NoiseModel: covariance must be positive definite");
  }
}

double spike_law_nu(double magnitude) {
  return magnitude / std::sqrt(2.0 * std::log1p(magnitude * magnitude));
}

double draw_coordinate(CoordinateLaw law, double spike_magnitude,
                       rng::Stream& stream) {
  switch (law) {
    case CoordinateLaw::kGaussian:
      return stream.normal();
    case CoordinateLaw::kRademacher:
      return stream.uniform01() <= 0.5 ? 1.0 : -1.0;
    case CoordinateLaw::kUniform: {
      const double root3 = std::sqrt(3.0);
      return stream.uniform(-root3, root3);
    }
    case CoordinateLaw::kSpike: {
      const double p = 1.0 / (2.0 * spike_magnitude * spike_magnitude);
      const double u = stream.uniform01();
      if (u <= p) return spike_magnitude;
      if (u <= 2.0 * p) return -spike_magnitude;
      return 0.0;
    }
  }
  throw std::logic_error("unreachable coordinate law");
}

}  // namespace

double coordinate_law_nu(CoordinateLaw law, double spike_magnitude) {
  switch (law) {
    case CoordinateLaw::kGaussian:
    case CoordinateLaw::kRademacher:
    case CoordinateLaw::kUniform:
      return 1.0;
    case CoordinateLaw::kSpike:
      return spike_law_nu(spike_magnitude);
  }
  throw std::logic_error("unreachable coordinate law");
}

NoiseModel::NoiseModel(NoiseFamily family, Matrix sigma_w, double nu)
    : family_(family), sigma_w_(std::move(sigma_w)), nu_(nu) {
  validate_covariance(sigma_w_);
  sqrt_w_ = linalg::spd_sqrt(sigma_w_);
  inv_sqrt_w_ = linalg::spd_inv_sqrt(sigma_w_);
}

NoiseModel NoiseModel::gaussian(Matrix sigma_w, std::optional<double> nu) {
  return NoiseModel(NoiseFamily::kGaussian, std::move(sigma_w), nu.value_or(1.0));
}

NoiseModel NoiseModel::product_coordinate(Matrix sigma_w,
                                          std::vector<CoordinateLaw> laws,
                                          std::optional<double> nu) {
  if (static_cast<Eigen::Index>(laws.size()) != sigma_w.rows()) {
    throw std::invalid_argument(
        "NoiseModel: need one coordinate law per dimension");
  }
  double worst = 0.0;
  for (const CoordinateLaw law : laws) {
    worst = std::max(worst, coordinate_law_nu(law, 3.0));
  }
  NoiseModel model(NoiseFamily::kProductCoordinate, std::move(sigma_w),
                   nu.value_or(worst));
  model.laws_ = std::move(laws);
  return model;
}

NoiseModel NoiseModel::spike_isotropic(Matrix sigma_w, double magnitude,
                                       std::optional<double> nu) {
  if (!(magnitude >= 1.0)) {
    throw std::invalid_argument("NoiseModel: spike magnitude must be >= 1");
  }
  NoiseModel model(NoiseFamily::kSpikeIsotropic, std::move(sigma_w),
                   nu.value_or(spike_law_nu(magnitude)));
  model.spike_magnitude_ = magnitude;
  return model;
}

NoiseModel NoiseModel::uniform_ball(Matrix sigma_w, std::optional<double> nu) {
  return NoiseModel(NoiseFamily::kUniformBall, std::move(sigma_w), nu.value_or(1.0));
}

Vector NoiseModel::sample_whitened(rng::Stream& stream) const {
  const int d = dim();
  Vector w(d);
  switch (family_) {
    case NoiseFamily::kGaussian:
      for (int i = 0; i < d; ++i) w[i] = stream.normal();
      return w;
    case NoiseFamily::kProductCoordinate:
      for (int i = 0; i < d; ++i) {
        w[i] = draw_coordinate(laws_[i], spike_magnitude_, stream);
      }
      return w;
    case NoiseFamily::kSpikeIsotropic:
      for (int i = 0; i < d; ++i) {
        w[i] = draw_coordinate(CoordinateLaw::kSpike, spike_magnitude_, stream);
      }
      return w;
    case NoiseFamily::kUniformBall: {
      // Direction from a normalized Gaussian, radius sqrt(d+2) * U^{1/d}.
      double norm_sq = 0.0;
      do {
        for (int i = 0; i < d; ++i) w[i] = stream.normal();
        norm_sq = w.squaredNorm();
      } while (norm_sq == 0.0);
      const double radius =
          std::sqrt(static_cast<double>(d) + 2.0) *
          std::pow(stream.uniform01(), 1.0 / static_cast<double>(d));
      return w * (radius / std::sqrt(norm_sq));
    }
  }
  throw std::logic_error("unreachable noise family");
}

Vector NoiseModel::sample(rng::Stream& stream) const {
  return sqrt_w_ * sample_whitened(stream);
}

Vector NoiseModel::whiten(const Vector& w) const {
  if (w.size() != sigma_w_.rows()) {
    throw std::invalid_argument("whiten: dimension mismatch");
  }
  return inv_sqrt_w_ * w;
}

ProblemInstance::ProblemInstance(Matrix a_in, NoiseModel noise_in)
    : a(std::move(a_in)), noise(std::move(noise_in)),
      d(static_cast<int>(a.rows())) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("ProblemInstance: A must be square");
  }
  if (noise.dim() != d) {
    throw std::invalid_argument(
        "ProblemInstance: noise covariance dimension does not match A");
  }
}

}  // namespace sysid
