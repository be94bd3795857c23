#include "sysid/presets.hpp"

#include <cmath>
#include <stdexcept>

namespace sysid::presets {

namespace {

void check_d(int d) {
  if (d < 1) throw std::invalid_argument("preset: need d >= 1");
}

}  // namespace

ProblemInstance frob_gap(int d, double sigma) {
  check_d(d);
  Matrix a = Matrix::Zero(d, d);
  for (int i = 1; i <= d; ++i) {
    a(i - 1, i - 1) = std::sqrt(1.0 - 1.0 / (static_cast<double>(i) * i));
  }
  return {a, NoiseModel::gaussian(sigma * sigma * Matrix::Identity(d, d))};
}

ProblemInstance op_gap(int d, double sigma) {
  check_d(d);
  Matrix a = Matrix::Zero(d, d);
  Matrix sigma_w = Matrix::Zero(d, d);
  for (int i = 1; i <= d; ++i) {
    const double i2 = static_cast<double>(i) * i;
    a(i - 1, i - 1) = std::sqrt(1.0 - 1.0 / (i2 * i2));
    sigma_w(i - 1, i - 1) = sigma * sigma / i2;
  }
  return {a, NoiseModel::gaussian(sigma_w)};
}

ProblemInstance random_walk(int d, double sigma) {
  check_d(d);
  return {Matrix::Identity(d, d),
          NoiseModel::gaussian(sigma * sigma * Matrix::Identity(d, d))};
}

ProblemInstance scalar_stable(int d, double sigma) {
  check_d(d);
  return {0.5 * Matrix::Identity(d, d),
          NoiseModel::gaussian(sigma * sigma * Matrix::Identity(d, d))};
}

ProblemInstance isotropic_stable(int d, double sigma) {
  check_d(d);
  Matrix rotation = Matrix::Identity(d, d);
  const double theta = 0.7;
  for (int i = 0; i + 1 < d; i += 2) {
    rotation(i, i) = std::cos(theta);
    rotation(i, i + 1) = -std::sin(theta);
    rotation(i + 1, i) = std::sin(theta);
    rotation(i + 1, i + 1) = std::cos(theta);
  }
  return {0.9 * rotation,
          NoiseModel::gaussian(sigma * sigma * Matrix::Identity(d, d))};
}

ProblemInstance make(const std::string& name, int d, double sigma) {
  if (name == "frob-gap") return frob_gap(d, sigma);
  if (name == "op-gap") return op_gap(d, sigma);
  if (name == "random-walk") return random_walk(d, sigma);
  if (name == "scalar-stable") return scalar_stable(d, sigma);
  if (name == "isotropic-stable") return isotropic_stable(d, sigma);
  throw std::invalid_argument("unknown preset: " + name);
}

const std::vector<std::string>& names() {
  static const std::vector<std::string> kNames = {
      "frob-gap", "op-gap", "random-walk", "scalar-stable", "isotropic-stable"};
  return kNames;
}

}  // namespace sysid::presets
