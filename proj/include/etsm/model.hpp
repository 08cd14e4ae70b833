#pragma once

#include <cstdint>
#include <vector>

#include "etsm/ellipsoid.hpp"

namespace etsm {

/// Single-output LTI plant x+ = A x + w, y = C x + v with w in E(0, Q) and
/// v in E(0, R).
struct SystemModel {
  Matrix A;
  Eigen::RowVectorXd C;
  Matrix Q;
  double R = 0.0;

  Eigen::Index n() const { return A.rows(); }
  /// Throws std::invalid_argument on inconsistent dimensions, non-PD Q or
  /// R <= 0.
  void validate() const;
};

/// Send-on-delta channel: threshold on (y - y_tau)^2 and the residual
/// uncertainty of a transmitted sample.
struct TriggerConfig {
  double threshold = 0.0;  // Gamma
  double error = 0.0;      // Gamma_e

  void validate() const;
  /// Output-set shape attached to a record with the given flag.
  double uncertainty(bool transmitted) const { return transmitted ? error : threshold; }
};

/// Positive weights summing to one that combine the n window inequalities.
class WeightVector {
 public:
  explicit WeightVector(Vector weights);
  static WeightVector uniform(Eigen::Index n);

  const Vector& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_(i); }

 private:
  Vector values_;
};

/// What the observer receives at step k: the flag and the reference value
/// y_tau (the transmitted sample when gamma is set).
struct MeasurementRecord {
  std::int64_t k = 0;
  bool gamma = false;
  double y_tau = 0.0;
};

/// gamma flags of an n-step window, bit i = flag at offset i.
using PatternMask = std::uint32_t;

}  // namespace etsm
