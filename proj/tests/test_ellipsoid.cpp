#include <doctest.h>

#include <cmath>
#include <vector>

#include "etsm/ellipsoid.hpp"
#include "oracles.hpp"

using namespace etsm;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

Ellipsoid scalar(double center, double shape) { return Ellipsoid(vec({center}), mat({{shape}})); }

}  // namespace

TEST_CASE("ellipsoid construction validates and re-symmetrizes") {
  CHECK_THROWS_AS(Ellipsoid(vec({0, 0}), Matrix::Identity(3, 3)), std::invalid_argument);
  CHECK_THROWS_AS(Ellipsoid(vec({0, 0}), mat({{1, 0.5}, {0, 1}})), std::invalid_argument);
  CHECK_THROWS_AS(Ellipsoid(vec({0, 0}), mat({{1, 0}, {0, -1}})), std::invalid_argument);
  const Ellipsoid e(vec({0, 0}), mat({{2, 1 + 1e-12}, {1, 2}}));
  CHECK(e.shape()(0, 1) == e.shape()(1, 0));
}

TEST_CASE("affine_transform") {
  SUBCASE("identity map shifts the center") {
    const auto e = affine_transform(Ellipsoid(vec({0, 0}), Matrix::Identity(2, 2)),
                                    Matrix::Identity(2, 2), vec({1, 2}));
    CHECK(e.center().isApprox(vec({1, 2})));
    CHECK(e.shape().isApprox(Matrix::Identity(2, 2)));
  }
  SUBCASE("example plant matrix") {
    const Matrix a = mat({{0.75, 0.2}, {0.5, 0.3}});
    const auto e = affine_transform(Ellipsoid(vec({0, 0}), 5.0 * Matrix::Identity(2, 2)), a, vec({0, 0}));
    // 5 A A' written out.
    const Matrix expected = 5.0 * mat({{0.75 * 0.75 + 0.04, 0.375 + 0.06}, {0.375 + 0.06, 0.25 + 0.09}});
    CHECK((e.shape() - expected).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(e.center().isZero());
  }
  SUBCASE("reflection keeps the shape") {
    const auto e = affine_transform(scalar(1, 4), mat({{-1}}), vec({0}));
    CHECK(e.center()(0) == -1.0);
    CHECK(e.shape()(0, 0) == 4.0);
  }
  CHECK_THROWS_AS(affine_transform(scalar(0, 1), Matrix::Identity(2, 2), vec({0, 0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(affine_transform(scalar(0, 1), mat({{1}}), vec({0, 0})), std::invalid_argument);
}

TEST_CASE("sum_parameter_range") {
  auto r = sum_parameter_range(4.0 * Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  CHECK(r.lower == doctest::Approx(2.0));
  CHECK(r.upper == doctest::Approx(2.0));
  r = sum_parameter_range(mat({{1, 0}, {0, 9}}), Matrix::Identity(2, 2));
  CHECK(r.lower == doctest::Approx(1.0));
  CHECK(r.upper == doctest::Approx(3.0));
  r = sum_parameter_range(mat({{2, 1}, {1, 2}}), Matrix::Identity(2, 2));
  CHECK(r.lower == doctest::Approx(1.0));
  CHECK(r.upper == doctest::Approx(std::sqrt(3.0)));
  CHECK_THROWS_AS(sum_parameter_range(Matrix::Identity(2, 2), mat({{1, 0}, {0, 0}})), NumericalError);
}

TEST_CASE("optimal_sum_parameter") {
  CHECK(optimal_sum_parameter(mat({{0.6}}), mat({{0.5}})) == doctest::Approx(std::sqrt(0.6 / 0.5)).epsilon(1e-14));
  CHECK(optimal_sum_parameter(mat({{2, 1}, {1, 3}}), mat({{4, 0}, {0, 1}})) == doctest::Approx(1.0));
  CHECK(optimal_sum_parameter(9.0 * Matrix::Identity(2, 2), Matrix::Identity(2, 2)) == doctest::Approx(3.0));
  CHECK_THROWS_AS(optimal_sum_parameter(Matrix::Identity(2, 2), Matrix::Zero(2, 2)), NumericalError);
  CHECK_THROWS_AS(optimal_sum_parameter(Matrix::Zero(2, 2), Matrix::Identity(2, 2)), NumericalError);
}

TEST_CASE("optimal parameter always lies in the admissible range") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 4;
    const Matrix q1 = oracle::random_spd(rng, d);
    const Matrix q2 = oracle::random_spd(rng, d);
    const auto range = sum_parameter_range(q1, q2);
    const double p = std::sqrt(q1.trace() / q2.trace());
    CHECK(p >= range.lower * (1 - 1e-12));
    CHECK(p <= range.upper * (1 + 1e-12));
  }
}

TEST_CASE("minkowski_sum_outer") {
  const double p = std::sqrt(0.6 / 0.5);
  const auto e = minkowski_sum_outer(scalar(0, 0.6), scalar(0, 0.5), p);
  CHECK(e.shape()(0, 0) == doctest::Approx(oracle::scalar_chain({0.6, 0.5})).epsilon(1e-13));
  CHECK(e.shape()(0, 0) == doctest::Approx(2.19545).epsilon(1e-5));

  const Matrix s = mat({{2, 0.3}, {0.3, 1}});
  const auto degenerate = minkowski_sum_outer(Ellipsoid::point(vec({1, 2})), Ellipsoid(vec({3, 4}), s));
  CHECK(degenerate.center().isApprox(vec({4, 6})));
  CHECK(degenerate.shape() == s);

  const auto equal = minkowski_sum_outer(Ellipsoid(vec({1, 0}), Matrix::Identity(2, 2)),
                                         Ellipsoid(vec({0, 1}), Matrix::Identity(2, 2)), 1.0);
  CHECK(equal.center().isApprox(vec({1, 1})));
  CHECK(equal.shape().isApprox(4.0 * Matrix::Identity(2, 2)));

  CHECK_THROWS_AS(minkowski_sum_outer(scalar(0, 1), scalar(0, 1), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(minkowski_sum_outer(scalar(0, 1), scalar(0, 1), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(minkowski_sum_outer(scalar(0, 1), Ellipsoid::ball(2, 1.0)), std::invalid_argument);
}

TEST_CASE("minkowski_sum_chain") {
  const std::vector<Ellipsoid> chain{scalar(0, 0.6), scalar(0, 2.5), scalar(0, 0.5)};
  const auto e = minkowski_sum_chain(chain);
  CHECK(e.shape()(0, 0) == doctest::Approx(oracle::scalar_chain({0.6, 2.5, 0.5})).epsilon(1e-13));

  const std::vector<Ellipsoid> single{Ellipsoid::ball(2, 3.0)};
  CHECK(minkowski_sum_chain(single).shape() == single[0].shape());

  const Matrix s = mat({{1, 0.2}, {0.2, 2}});
  const std::vector<Ellipsoid> absorbed{Ellipsoid(vec({0, 0}), s), Ellipsoid::point(vec({0, 0})),
                                        Ellipsoid::point(vec({0, 0}))};
  CHECK(minkowski_sum_chain(absorbed).shape() == s);

  CHECK_THROWS_AS(minkowski_sum_chain(std::vector<Ellipsoid>{}), std::invalid_argument);
}

TEST_CASE("scalar chain identity holds for random chains") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shape(1e-3, 50.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> shapes;
    std::vector<Ellipsoid> chain;
    for (int i = 0; i < 2 + trial % 6; ++i) {
      shapes.push_back(shape(rng));
      chain.push_back(scalar(0, shapes.back()));
    }
    const double expected = oracle::scalar_chain(shapes);
    CHECK(std::abs(minkowski_sum_chain(chain).shape()(0, 0) - expected) <= 1e-12 * expected);
  }
}

TEST_CASE("optimal_fusion_matrix") {
  CHECK(optimal_fusion_matrix(Matrix::Identity(2, 2), Matrix::Identity(2, 2))
            .isApprox(0.5 * Matrix::Identity(2, 2)));
  CHECK(optimal_fusion_matrix(mat({{1}}), mat({{3}}))(0, 0) == doctest::Approx(0.75));
  const Matrix m = optimal_fusion_matrix(mat({{2, 0}, {0, 8}}), mat({{2, 0}, {0, 2}}));
  CHECK(m.isApprox(mat({{0.5, 0}, {0, 0.2}})));
  CHECK_THROWS_AS(optimal_fusion_matrix(mat({{1, 0}, {0, 0}}), mat({{1, 0}, {0, 0}})), NumericalError);

  // Non-commuting pair: the stationarity condition M (Q1 + Q2) = Q2 must hold.
  const Matrix q1 = mat({{2, 0.9}, {0.9, 1}});
  const Matrix q2 = mat({{1, 0}, {0, 4}});
  const Matrix g = optimal_fusion_matrix(q1, q2);
  CHECK((g * (q1 + q2) - q2).norm() < 1e-12);
}

TEST_CASE("intersection_outer") {
  const Ellipsoid e1(vec({1, 2}), mat({{2, 0.5}, {0.5, 1}}));
  const Ellipsoid e2(vec({-1, 0}), mat({{1, 0}, {0, 3}}));
  const auto keep_first = intersection_outer(e1, e2, Matrix::Identity(2, 2));
  CHECK(keep_first.center().isApprox(e1.center()));
  CHECK(keep_first.shape().isApprox(e1.shape()));
  const auto keep_second = intersection_outer(e1, e2, Matrix::Zero(2, 2));
  CHECK(keep_second.center().isApprox(e2.center()));
  CHECK(keep_second.shape().isApprox(e2.shape()));

  const auto unit = intersection_outer(Ellipsoid::ball(2, 1.0), Ellipsoid::ball(2, 1.0),
                                       optimal_fusion_matrix(Matrix::Identity(2, 2), Matrix::Identity(2, 2)));
  CHECK(unit.shape().isApprox(Matrix::Identity(2, 2)));
  CHECK(unit.center().isZero());
  CHECK_THROWS_AS(intersection_outer(e1, e2, Matrix::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("contains") {
  const Ellipsoid e(vec({1, -1}), mat({{2, 0.1}, {0.1, 1}}));
  CHECK(contains(e, e.center()).distance == 0.0);
  CHECK(contains(e, e.center()).inside);
  const auto boundary = contains(scalar(0, 4), vec({2}));
  CHECK(boundary.distance == doctest::Approx(1.0));
  CHECK(boundary.inside);
  const auto outside = contains(Ellipsoid(vec({0, 0}), mat({{1, 0}, {0, 4}})), vec({1, 2}));
  CHECK(outside.distance == doctest::Approx(2.0));
  CHECK_FALSE(outside.inside);
  CHECK_THROWS_AS(contains(Ellipsoid::point(vec({0, 0})), vec({0, 0})), NumericalError);
  // Rank-deficient shape: regularized, off-support points are far outside.
  const Ellipsoid flat(vec({0, 0}), mat({{1, 0}, {0, 0}}));
  CHECK(contains(flat, vec({0.5, 0})).inside);
  CHECK_FALSE(contains(flat, vec({0, 1e-3})).inside);
}

TEST_CASE("sample_point") {
  Rng rng(3);
  const Ellipsoid point = Ellipsoid::point(vec({4, 5}));
  CHECK(sample_point(point, rng) == point.center());

  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 5;
    const Ellipsoid e(oracle::random_vector(gen, d), oracle::random_spd(gen, d));
    for (int s = 0; s < 20; ++s) CHECK(contains(e, sample_point(e, rng)).inside);
  }

  const Ellipsoid unit = scalar(0, 1);
  double sum = 0.0;
  double max_sq = 0.0;
  constexpr int kSamples = 100000;
  for (int i = 0; i < kSamples; ++i) {
    const double x = sample_point(unit, rng)(0);
    sum += x;
    max_sq = std::max(max_sq, x * x);
  }
  CHECK(std::abs(sum / kSamples) < 0.02);
  CHECK(max_sq > 0.95);
  CHECK(max_sq <= 1.0);
}

TEST_CASE("containment soundness of the outer sum") {
  std::mt19937_64 gen(101);
  Rng rng(102);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 3;
    const Ellipsoid e1(oracle::random_vector(gen, d), oracle::random_spd(gen, d));
    const Ellipsoid e2(oracle::random_vector(gen, d), oracle::random_spd(gen, d, 2.0));
    const auto range = sum_parameter_range(e1.shape(), e2.shape());
    for (double p : {range.lower, range.upper, range.lower + unit(gen) * (range.upper - range.lower)}) {
      const auto sum = minkowski_sum_outer(e1, e2, p);
      for (int s = 0; s < 20; ++s) {
        CHECK(contains(sum, sample_point(e1, rng) + sample_point(e2, rng)).inside);
      }
    }
  }
}

TEST_CASE("affine map preserves generalized distance for invertible maps") {
  std::mt19937_64 gen(7);
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 4;
    const Ellipsoid e(oracle::random_vector(gen, d), oracle::random_spd(gen, d, 1.0, 0.1));
    Matrix a = oracle::random_spd(gen, d, 1.0, 0.5);
    a(0, d - 1) += 0.3;  // not symmetric in general
    const Vector b = oracle::random_vector(gen, d);
    const auto mapped = affine_transform(e, a, b);
    const Vector x = sample_point(e, rng);
    const double before = contains(e, x).distance;
    const double after = contains(mapped, a * x + b).distance;
    CHECK(std::abs(before - after) < 1e-9);
  }
}
