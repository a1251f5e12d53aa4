#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "finsler/error.hpp"
#include "finsler/norms.hpp"
#include "oracles.hpp"

using namespace finsler;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Matrix mat2(double a, double b, double c, double d) {
  Matrix A(2, 2);
  A << a, b, c, d;
  return A;
}

std::vector<NormSpec> sample_norms() {
  Matrix A3(3, 3);
  A3 << 2, 0.3, 0.1, 0.3, 1, -0.2, 0.1, -0.2, 1.5;
  return {NormSpec::euclidean(2),
          NormSpec::euclidean(3),
          NormSpec::quadratic(mat2(4, 0, 0, 1)),
          NormSpec::quadratic(mat2(2, 0.7, 0.7, 1)),
          NormSpec::quadratic(A3),
          NormSpec::randers(Matrix::Identity(2, 2), vec({0.5, 0})),
          NormSpec::randers(mat2(1, 0, 0, 2), vec({0.3, 0.2})),
          NormSpec::randers(A3, vec({0.2, -0.3, 0.4})),
          NormSpec::two_slope(2, 0.5),
          NormSpec::two_slope(1, 3)};
}

Vector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

}  // namespace

TEST_CASE("euclidean norm and its dual") {
  const NormSpec e = NormSpec::euclidean(2);
  CHECK(norm_eval(e, vec({3, 4})) == doctest::Approx(5));
  CHECK(dual_norm_eval(e, Covector{3, 4}) == doctest::Approx(5));
  CHECK(norm_eval(e, vec({0, 0})) == 0);
  CHECK(e.family_name() == "euclidean");
  CHECK(e.is_quadratic());
}

TEST_CASE("quadratic dual and inverse Legendre transform") {
  const NormSpec q = NormSpec::quadratic(mat2(4, 0, 0, 1));
  CHECK(dual_norm_eval(q, Covector{2, 0}) == doctest::Approx(1).epsilon(1e-14));
  const Vector v = legendre_inverse(q, Covector{2, 0});
  CHECK(v(0) == doctest::Approx(0.5));
  CHECK(v(1) == doctest::Approx(0).epsilon(1e-15));
  CHECK(norm_eval(q, vec({1, 0})) == doctest::Approx(2));
}

TEST_CASE("randers values are order dependent") {
  const NormSpec r = NormSpec::randers(Matrix::Identity(2, 2), vec({0.5, 0}));
  CHECK(norm_eval(r, vec({1, 0})) == doctest::Approx(1.5));
  CHECK(norm_eval(r, vec({-1, 0})) == doctest::Approx(0.5));
  CHECK(dual_norm_eval(r, Covector{1, 0}) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(dual_norm_eval(r, Covector{-1, 0}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_FALSE(r.is_quadratic());
}

TEST_CASE("two-slope norm") {
  const NormSpec t = NormSpec::two_slope(2, 0.5);
  CHECK(norm_eval(t, vec({1})) == doctest::Approx(2));
  CHECK(norm_eval(t, vec({-1})) == doctest::Approx(0.5));
  CHECK(dual_norm_eval(t, Covector{1}) == doctest::Approx(0.5));
  CHECK(dual_norm_eval(t, Covector{-1}) == doctest::Approx(2));
  CHECK(legendre(t, vec({1}))(vec({1})) == doctest::Approx(4));
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS((void)NormSpec::randers(Matrix::Identity(2, 2), vec({1.0, 0})), DomainError);
  CHECK_THROWS_AS((void)NormSpec::randers(Matrix::Identity(2, 2), vec({0.8, 0.8})), DomainError);
  CHECK_THROWS_AS((void)NormSpec::quadratic(mat2(1, 0, 0, -1)), DomainError);
  CHECK_THROWS_AS((void)NormSpec::quadratic(mat2(1, 2, 0, 1)), DomainError);
  CHECK_THROWS_AS((void)NormSpec::quadratic(Matrix::Identity(2, 3)), DimensionError);
  CHECK_THROWS_AS((void)NormSpec::randers(Matrix::Identity(2, 2), vec({0.1})), DimensionError);
  CHECK_THROWS_AS((void)NormSpec::two_slope(0, 1), DomainError);
  CHECK_THROWS_AS((void)NormSpec::euclidean(0), DimensionError);
  const NormSpec e = NormSpec::euclidean(2);
  CHECK_THROWS_AS((void)norm_eval(e, vec({1, 2, 3})), DimensionError);
  CHECK_THROWS_AS((void)dual_norm_eval(e, Covector{1}), DimensionError);
  CHECK_THROWS_AS((void)metric_tensor(e, vec({0, 0})), DomainError);
}

TEST_CASE("zero covector and zero vector map to zero") {
  for (const NormSpec& n : sample_norms()) {
    CHECK(legendre(n, Vector::Zero(n.dim())).components.isZero(0.0));
    CHECK(legendre_inverse(n, Covector::zero(n.dim())).isZero(0.0));
    CHECK(dual_norm_eval(n, Covector::zero(n.dim())) == 0);
  }
}

TEST_CASE("closed-form dual norms match the sup oracle") {
  std::mt19937_64 rng(42);
  for (const NormSpec& n : sample_norms()) {
    for (int s = 0; s < 10; ++s) {
      const Covector xi(random_vector(rng, n.dim()));
      const double closed = dual_norm_eval(n, xi);
      const double sup = oracle::dual_norm_sup(n, xi);
      CAPTURE(n.family_name());
      CHECK(closed == doctest::Approx(sup).epsilon(1e-8));
    }
  }
}

TEST_CASE("Legendre round trip and duality identities") {
  std::mt19937_64 rng(7);
  for (const NormSpec& n : sample_norms()) {
    for (int s = 0; s < 20; ++s) {
      const Vector v = random_vector(rng, n.dim());
      const Covector l = legendre(n, v);
      const double F = norm_eval(n, v);
      CAPTURE(n.family_name());
      CHECK(dual_norm_eval(n, l) == doctest::Approx(F).epsilon(1e-12));
      CHECK(l(v) == doctest::Approx(F * F).epsilon(1e-12));
      const Vector back = legendre_inverse(n, l);
      CHECK((back - v).norm() <= 1e-10 * (1 + v.norm()));
    }
  }
}

TEST_CASE("inverse Legendre transform matches finite differences") {
  std::mt19937_64 rng(9);
  for (const NormSpec& n : sample_norms()) {
    for (int s = 0; s < 10; ++s) {
      const Covector xi(random_vector(rng, n.dim()));
      if (n.dim() == 1 && std::abs(xi.components(0)) < 1e-3) continue;
      const Vector exact = legendre_inverse(n, xi);
      const Vector fd = legendre_inverse_fd(n, xi);
      CHECK((exact - fd).norm() <= 1e-6 * (1 + exact.norm()));
    }
  }
}

TEST_CASE("dual_jet agrees with the separate evaluations") {
  std::mt19937_64 rng(10);
  for (const NormSpec& n : sample_norms()) {
    const Covector xi(random_vector(rng, n.dim()));
    const DualJet jet = dual_jet(n, xi);
    const double f = dual_norm_eval(n, xi);
    CHECK(jet.dual_sq == doctest::Approx(f * f).epsilon(1e-13));
    CHECK((jet.gradient - legendre_inverse(n, xi)).norm() <= 1e-14 * (1 + jet.gradient.norm()));
  }
}

TEST_CASE("metric tensor matches the Hessian of F^2/2 and is positive definite") {
  std::mt19937_64 rng(11);
  for (const NormSpec& n : sample_norms()) {
    for (int s = 0; s < 5; ++s) {
      const Vector v = random_vector(rng, n.dim());
      const Matrix g = metric_tensor(n, v);
      const Matrix fd = oracle::metric_tensor_fd(n, v);
      CHECK((g - fd).norm() <= 1e-5 * (1 + g.norm()));
      Eigen::SelfAdjointEigenSolver<Matrix> es(g);
      CHECK(es.eigenvalues().minCoeff() > 0);
      // g_v(v, v) = F(v)^2
      CHECK(v.dot(g * v) == doctest::Approx(std::pow(norm_eval(n, v), 2)).epsilon(1e-10));
    }
  }
}

TEST_CASE("validate_norm passes on every admissible family") {
  for (const NormSpec& n : sample_norms()) {
    const NormValidation r = validate_norm(n, 3, 500);
    CAPTURE(n.family_name());
    CHECK(r.passed);
    CHECK(r.worst_violation == 0);
    CHECK(r.worst_check.empty());
    CHECK(r.samples == 500);
  }
}

TEST_CASE("quadratic families: l(v) = A v and g_v = A") {
  const Matrix A = mat2(2, 0.7, 0.7, 1);
  const NormSpec q = NormSpec::quadratic(A);
  const Vector v = vec({0.3, -1.2});
  CHECK((legendre(q, v).components - A * v).norm() <= 1e-14);
  CHECK((metric_tensor(q, v) - A).norm() <= 1e-14);
  CHECK((metric_tensor(NormSpec::euclidean(3), vec({1, 2, 3})) - Matrix::Identity(3, 3)).norm() <= 1e-15);
  CHECK((legendre(NormSpec::euclidean(2), vec({1, 2})).components - vec({1, 2})).norm() == 0);
  CHECK((legendre_inverse(NormSpec::euclidean(2), Covector{3, 4}) - vec({3, 4})).norm() == 0);
}
