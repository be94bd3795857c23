#pragma once

#include <string>
#include <vector>

#include "sysid/noise.hpp"

namespace sysid::presets {

/// A = diag(sqrt(1 - 1/i²)), Sigma_W = sigma² I. Spectrum of Sigma_inf is
/// diag(i²); the instance where prior Frobenius bounds overshoot by ~d.
ProblemInstance frob_gap(int d, double sigma = 1.0);

/// A = diag(sqrt(1 - 1/i⁴)), Sigma_W = sigma² diag(i^{-2}); Sigma_inf =
/// diag(i²) with non-isotropic noise.
ProblemInstance op_gap(int d, double sigma = 1.0);

/// A = I, Sigma_W = sigma² I.
ProblemInstance random_walk(int d, double sigma = 1.0);

/// a = 0.5 (0.5 I for d > 1), sigma = 1 by default.
ProblemInstance scalar_stable(int d = 1, double sigma = 1.0);

/// A = 0.9 * block rotation, Sigma_W = sigma² I.
ProblemInstance isotropic_stable(int d, double sigma = 1.0);

/// Lookup by CLI name: frob-gap | op-gap | random-walk | scalar-stable |
/// isotropic-stable. Throws std::invalid_argument for unknown names.
ProblemInstance make(const std::string& name, int d, double sigma = 1.0);

const std::vector<std::string>& names();

}  // namespace sysid::presets
