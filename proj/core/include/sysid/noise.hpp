#pragma once

#include <optional>
#include <vector>

#include "sysid/rng.hpp"
#include "sysid/types.hpp"

namespace sysid {

enum class NoiseFamily { kGaussian, kProductCoordinate, kSpikeIsotropic, kUniformBall };

/// One-dimensional unit-variance laws available for the product family.
enum class CoordinateLaw { kGaussian, kRademacher, kUniform, kSpike };

/// A zero-mean noise distribution with covariance Σ_W. Samples are drawn
/// whitened (identity population covariance) and colored by the symmetric
/// square root Σ_W^{1/2}. `nu` is the directional sub-Gaussian proxy of the
/// whitened law; family defaults can be overridden at construction.
class NoiseModel {
 public:
  static NoiseModel gaussian(Matrix sigma_w,
                             std::optional<double> nu = std::nullopt);
  static NoiseModel product_coordinate(Matrix sigma_w,
                                       std::vector<CoordinateLaw> laws,
                                       std::optional<double> nu = std::nullopt);
  /// Whitened coordinates are iid on {-M, 0, +M} with Pr(±M) = 1/(2M²).
  static NoiseModel spike_isotropic(Matrix sigma_w, double magnitude,
                                    std::optional<double> nu = std::nullopt);
  /// Whitened vector uniform on the ball of radius sqrt(d+2) (unit covariance).
  static NoiseModel uniform_ball(Matrix sigma_w,
                                 std::optional<double> nu = std::nullopt);

  NoiseFamily family() const { return family_; }
  int dim() const { return static_cast<int>(sigma_w_.rows()); }
  const Matrix& covariance() const { return sigma_w_; }
  const Matrix& sqrt_covariance() const { return sqrt_w_; }
  const Matrix& inv_sqrt_covariance() const { return inv_sqrt_w_; }
  double nu() const { return nu_; }
  double spike_magnitude() const { return spike_magnitude_; }
  const std::vector<CoordinateLaw>& coordinate_laws() const { return laws_; }

  /// Draw from the whitened law (population covariance I_d).
  Vector sample_whitened(rng::Stream& stream) const;

  /// Draw from the colored law (population covariance Σ_W).
  Vector sample(rng::Stream& stream) const;

  /// Σ_W^{-1/2} w, symmetric square root.
  Vector whiten(const Vector& w) const;

 private:
  NoiseModel(NoiseFamily family, Matrix sigma_w, double nu);

  NoiseFamily family_;
  Matrix sigma_w_, sqrt_w_, inv_sqrt_w_;
  double nu_ = 1.0;
  double spike_magnitude_ = 3.0;
  std::vector<CoordinateLaw> laws_;
};

/// Default directional sub-Gaussian proxy for a 1-d coordinate law.
double coordinate_law_nu(CoordinateLaw law, double spike_magnitude);

/// The problem instance (A, W) of a linear system x_{t+1} = A x_t + w_t.
struct ProblemInstance {
  Matrix a;
  NoiseModel noise;
  int d;

  ProblemInstance(Matrix a_in, NoiseModel noise_in);
};

}  // namespace sysid
