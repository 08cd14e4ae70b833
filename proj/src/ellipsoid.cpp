#include "etsm/ellipsoid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace etsm {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void require_same_dim(const Ellipsoid& e1, const Ellipsoid& e2, const char* what) {
  if (e1.dim() != e2.dim()) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << e1.dim() << " vs " << e2.dim() << ")";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Ellipsoid::Ellipsoid(Vector center, Matrix shape) : center_(std::move(center)) {
  if (shape.rows() != shape.cols() || shape.rows() != center_.size()) {
    std::ostringstream msg;
    msg << "ellipsoid: center has dimension " << center_.size() << " but shape is " << shape.rows()
        << "x" << shape.cols();
    throw std::invalid_argument(msg.str());
  }
  if (!center_.allFinite() || !shape.allFinite()) {
    throw std::invalid_argument("ellipsoid: non-finite center or shape");
  }
  // Tolerances are absolute for unit-scale shapes and relative beyond that.
  const double scale = std::max(1.0, max_abs(shape));
  const double asym = max_abs(shape - shape.transpose());
  if (asym > kSymmetryTolerance * scale) {
    std::ostringstream msg;
    msg << "ellipsoid: shape is not symmetric (max asymmetry " << asym << ")";
    throw std::invalid_argument(msg.str());
  }
  shape_ = symmetrized(shape);
  if (shape_.size() > 0) {
    const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(shape_, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .minCoeff();
    if (min_eig < -kPsdTolerance * scale) {
      std::ostringstream msg;
      msg << "ellipsoid: shape is not positive semidefinite (min eigenvalue " << min_eig << ")";
      throw std::invalid_argument(msg.str());
    }
  }
}

Ellipsoid Ellipsoid::point(const Vector& center) {
  return Ellipsoid(center, Matrix::Zero(center.size(), center.size()));
}

Ellipsoid Ellipsoid::ball(Eigen::Index dim, double radius) {
  return Ellipsoid(Vector::Zero(dim), radius * radius * Matrix::Identity(dim, dim));
}

Ellipsoid affine_transform(const Ellipsoid& e, const Matrix& a, const Vector& b) {
  if (a.cols() != e.dim() || b.size() != a.rows()) {
    std::ostringstream msg;
    msg << "affine_transform: map is " << a.rows() << "x" << a.cols() << ", offset has "
        << b.size() << " rows, ellipsoid has dimension " << e.dim();
    throw std::invalid_argument(msg.str());
  }
  return Ellipsoid(a * e.center() + b, symmetrized(a * e.shape() * a.transpose()));
}

Ellipsoid linear_transform(const Ellipsoid& e, const Matrix& a) {
  return affine_transform(e, a, Vector::Zero(a.rows()));
}

SumParameterRange sum_parameter_range(const Matrix& q1, const Matrix& q2) {
  if (q1.rows() != q2.rows() || q1.cols() != q2.cols() || q1.rows() != q1.cols()) {
    throw std::invalid_argument("sum_parameter_range: shapes must be square and equal-sized");
  }
  const Matrix s1 = symmetrized(q1);
  const Matrix s2 = symmetrized(q2);
  const auto eig2 = Eigen::SelfAdjointEigenSolver<Matrix>(s2, Eigen::EigenvaluesOnly).eigenvalues();
  if (!(eig2.minCoeff() > kRegularization * std::max(eig2.maxCoeff(), 0.0))) {
    throw NumericalError("sum_parameter_range: second shape is singular");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> gen(s1, s2, Eigen::EigenvaluesOnly);
  if (gen.info() != Eigen::Success) {
    throw NumericalError("sum_parameter_range: generalized eigenproblem failed");
  }
  const double lo = std::max(gen.eigenvalues().minCoeff(), 0.0);
  const double hi = std::max(gen.eigenvalues().maxCoeff(), 0.0);
  return {std::sqrt(lo), std::sqrt(hi)};
}

double optimal_sum_parameter(const Matrix& q1, const Matrix& q2) {
  const double t1 = q1.trace();
  const double t2 = q2.trace();
  if (t1 <= kDegenerateTrace || t2 <= kDegenerateTrace) {
    throw NumericalError("optimal_sum_parameter: degenerate operand (zero trace)");
  }
  const double p = std::sqrt(t1 / t2);
  try {
    const SumParameterRange range = sum_parameter_range(q1, q2);
    if (range.lower > 0.0) return range.clamp(p);
  } catch (const NumericalError&) {
    // Range unavailable for singular shapes; the unconstrained minimizer stands.
  }
  return p;
}

Ellipsoid minkowski_sum_outer(const Ellipsoid& e1, const Ellipsoid& e2, double p) {
  require_same_dim(e1, e2, "minkowski_sum_outer");
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw std::invalid_argument("minkowski_sum_outer: parameter must be positive and finite");
  }
  Matrix shape = (1.0 + 1.0 / p) * e1.shape() + (1.0 + p) * e2.shape();
  return Ellipsoid(e1.center() + e2.center(), symmetrized(shape));
}

Ellipsoid minkowski_sum_outer(const Ellipsoid& e1, const Ellipsoid& e2) {
  require_same_dim(e1, e2, "minkowski_sum_outer");
  if (e1.degenerate()) return Ellipsoid(e1.center() + e2.center(), e2.shape());
  if (e2.degenerate()) return Ellipsoid(e1.center() + e2.center(), e1.shape());
  return minkowski_sum_outer(e1, e2, optimal_sum_parameter(e1.shape(), e2.shape()));
}

Ellipsoid minkowski_sum_chain(std::span<const Ellipsoid> ellipsoids) {
  if (ellipsoids.empty()) throw std::invalid_argument("minkowski_sum_chain: empty list");
  Ellipsoid acc = ellipsoids.front();
  for (const auto& e : ellipsoids.subspan(1)) acc = minkowski_sum_outer(acc, e);
  return acc;
}

Matrix optimal_fusion_matrix(const Matrix& q1, const Matrix& q2) {
  if (q1.rows() != q2.rows() || q1.cols() != q2.cols() || q1.rows() != q1.cols()) {
    throw std::invalid_argument("optimal_fusion_matrix: shapes must be square and equal-sized");
  }
  const Matrix sum = q1 + q2;
  Eigen::PartialPivLU<Matrix> lu(sum);
  // The estimator reports 1 for an exactly zero pivot, so the pivot ratio
  // caps it.
  const Vector pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double rcond = std::min(lu.rcond(), pivots.minCoeff() / pivots.maxCoeff());
  if (!(rcond > 1e-14)) {
    std::ostringstream msg;
    msg << "optimal_fusion_matrix: Q1 + Q2 is singular (reciprocal condition " << rcond << ")";
    throw NumericalError(msg.str());
  }
  // Both shapes are symmetric, so (S^-1 Q2)' = Q2 S^-1.
  return lu.solve(q2).transpose();
}

Ellipsoid intersection_outer(const Ellipsoid& e1, const Ellipsoid& e2, const Matrix& m) {
  require_same_dim(e1, e2, "intersection_outer");
  if (m.rows() != e1.dim() || m.cols() != e1.dim()) {
    throw std::invalid_argument("intersection_outer: gain must be square of the set dimension");
  }
  const Matrix complement = Matrix::Identity(m.rows(), m.cols()) - m;
  return minkowski_sum_outer(linear_transform(e1, m), linear_transform(e2, complement));
}

Containment contains(const Ellipsoid& e, const Vector& x) {
  if (x.size() != e.dim()) throw std::invalid_argument("contains: dimension mismatch");
  if (e.degenerate()) throw NumericalError("contains: shape is singular (zero trace)");
  const auto d = static_cast<double>(e.dim());
  Matrix shape = e.shape();
  const double min_eig =
      Eigen::SelfAdjointEigenSolver<Matrix>(shape, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (min_eig <= kRegularization * shape.trace() / d) {
    shape.diagonal().array() += kRegularization * shape.trace() / d;
  }
  Eigen::LLT<Matrix> llt(shape);
  if (llt.info() != Eigen::Success) throw NumericalError("contains: Cholesky factorization failed");
  const Vector whitened = llt.matrixL().solve(x - e.center());
  const double dist = whitened.squaredNorm();
  return {dist <= 1.0 + kContainTolerance, dist};
}

Matrix psd_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(s));
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

Vector sample_unit_ball(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vector dir(d);
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < d; ++i) dir(i) = normal(rng);
    norm = dir.norm();
  } while (norm == 0.0);
  const double radius = std::pow(uniform(rng), 1.0 / static_cast<double>(d));
  return (radius / norm) * dir;
}

Vector sample_point(const Ellipsoid& e, Rng& rng) {
  if (e.degenerate()) return e.center();
  return e.center() + psd_sqrt(e.shape()) * sample_unit_ball(e.dim(), rng);
}

}  // namespace etsm
