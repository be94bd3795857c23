#pragma once

#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

namespace sysid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when the empirical Gram matrix XᵀX is numerically singular.
/// This is a reportable outcome at tiny mT, not a bug; callers that run
/// replicated experiments count these instead of regularizing.
class SingularGramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sysid
