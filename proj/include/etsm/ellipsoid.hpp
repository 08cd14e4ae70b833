#pragma once

#include <random>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace etsm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Raised when a numerical operation cannot proceed (singular operands,
/// divergence). Carries a human-readable diagnostic.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSymmetryTolerance = 1e-9;
inline constexpr double kPsdTolerance = 1e-9;
inline constexpr double kContainTolerance = 1e-9;
inline constexpr double kDegenerateTrace = 1e-12;
inline constexpr double kRegularization = 1e-12;

/// The set {x : (x - c)' S^-1 (x - c) <= 1} with S symmetric PSD. A zero
/// shape is the singleton {c}.
class Ellipsoid {
 public:
  /// Validates dimensions, symmetry and PSD-ness, then stores (S + S')/2.
  /// Throws std::invalid_argument on violation.
  Ellipsoid(Vector center, Matrix shape);

  static Ellipsoid point(const Vector& center);
  static Ellipsoid ball(Eigen::Index dim, double radius);

  const Vector& center() const { return center_; }
  const Matrix& shape() const { return shape_; }
  Eigen::Index dim() const { return center_.size(); }
  double trace() const { return shape_.trace(); }
  bool degenerate() const { return shape_.trace() <= kDegenerateTrace; }

 private:
  Vector center_;
  Matrix shape_;
};

/// Admissible interval [sqrt(lambda_min), sqrt(lambda_max)] of the outer
/// Minkowski-sum parameter, from det(Q1 - lambda Q2) = 0.
struct SumParameterRange {
  double lower;
  double upper;

  double clamp(double p) const { return p < lower ? lower : (p > upper ? upper : p); }
  bool contains(double p) const { return lower <= p && p <= upper; }
};

struct Containment {
  bool inside;
  double distance;
};

Matrix symmetrized(const Matrix& m);

/// E(A c + b, A S A').
Ellipsoid affine_transform(const Ellipsoid& e, const Matrix& a, const Vector& b);
Ellipsoid linear_transform(const Ellipsoid& e, const Matrix& a);

/// Throws NumericalError when Q2 is not positive definite.
SumParameterRange sum_parameter_range(const Matrix& q1, const Matrix& q2);

/// Trace-minimizing parameter sqrt(Tr Q1 / Tr Q2), clamped into
/// sum_parameter_range when both shapes are nonsingular. Throws
/// NumericalError when either trace is degenerate.
double optimal_sum_parameter(const Matrix& q1, const Matrix& q2);

/// (1 + 1/p) Q1 + (1 + p) Q2 around c1 + c2. Requires p > 0.
Ellipsoid minkowski_sum_outer(const Ellipsoid& e1, const Ellipsoid& e2, double p);

/// Trace-optimal outer sum. A degenerate operand is absorbed exactly.
Ellipsoid minkowski_sum_outer(const Ellipsoid& e1, const Ellipsoid& e2);

/// Left fold of the trace-optimal outer sum.
Ellipsoid minkowski_sum_chain(std::span<const Ellipsoid> ellipsoids);

/// Minimizer of Tr(M Q1 M') + Tr((I - M) Q2 (I - M)'), i.e. Q2 (Q1 + Q2)^-1,
/// obtained as the transpose of the LU solve (Q1 + Q2)^-1 Q2. Throws
/// NumericalError with the reciprocal condition estimate when Q1 + Q2 is
/// singular.
Matrix optimal_fusion_matrix(const Matrix& q1, const Matrix& q2);

/// Outer bound of E1 n E2 as E(M c1, M S1 M') (+) E((I-M) c2, (I-M) S2 (I-M)').
Ellipsoid intersection_outer(const Ellipsoid& e1, const Ellipsoid& e2, const Matrix& m);

/// Generalized distance (x - c)' S^-1 (x - c). Near-singular shapes are
/// regularized by 1e-12 Tr(S)/d I; a zero shape is rejected.
Containment contains(const Ellipsoid& e, const Vector& x);

/// Symmetric PSD square root via eigendecomposition (negative eigenvalues
/// from round-off are clipped).
Matrix psd_sqrt(const Matrix& s);

/// Uniform on the unit ball of dimension d.
Vector sample_unit_ball(Eigen::Index d, Rng& rng);

/// Uniform point of the ellipsoid, c + S^{1/2} u.
Vector sample_point(const Ellipsoid& e, Rng& rng);

}  // namespace etsm
