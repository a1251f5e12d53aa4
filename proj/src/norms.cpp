#include "finsler/norms.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "finsler/error.hpp"

namespace finsler {

Covector::Covector(std::initializer_list<double> values) : components(values.size()) {
  Eigen::Index i = 0;
  for (double x : values) components(i++) = x;
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_dim(const NormSpec& norm, Eigen::Index n, const char* what) {
  if (n != norm.dim()) {
    std::ostringstream os;
    os << what << " has dimension " << n << ", norm has dimension " << norm.dim();
    throw DimensionError(os.str());
  }
}

Matrix checked_spd_inverse(const Matrix& A, const char* family) {
  if (A.rows() != A.cols() || A.rows() == 0)
    throw DimensionError(std::string(family) + ": matrix must be square and non-empty");
  if (!A.allFinite()) throw DomainError(std::string(family) + ": matrix must be finite");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + A.cwiseAbs().maxCoeff()))
    throw DomainError(std::string(family) + ": matrix must be symmetric");
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success)
    throw DomainError(std::string(family) + ": matrix must be positive definite");
  Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 1e-12 * es.eigenvalues().maxCoeff())
    throw DomainError(std::string(family) + ": matrix is numerically singular");
  return llt.solve(Matrix::Identity(A.rows(), A.cols()));
}

double quad_form(const Matrix& A, const Vector& v) { return std::max(0.0, v.dot(A * v)); }

}  // namespace

NormSpec NormSpec::euclidean(int dim) {
  if (dim < 1) throw DimensionError("euclidean: dimension must be positive");
  return NormSpec(dim, norms::Euclidean{});
}

NormSpec NormSpec::quadratic(const Matrix& A) {
  Matrix A_inv = checked_spd_inverse(A, "quadratic");
  return NormSpec(static_cast<int>(A.rows()), norms::Quadratic{A, std::move(A_inv)});
}

NormSpec NormSpec::randers(const Matrix& A, const Vector& b) {
  Matrix A_inv = checked_spd_inverse(A, "randers");
  if (b.size() != A.rows()) throw DimensionError("randers: b must match the size of A");
  if (!b.allFinite()) throw DomainError("randers: b must be finite");
  Vector w = A_inv * b;
  const double b_sq = b.dot(w);
  if (!(b_sq < 1.0)) {
    std::ostringstream os;
    os << "randers: |b|_{A^-1} = " << std::sqrt(b_sq) << " must be < 1";
    throw DomainError(os.str());
  }
  return NormSpec(static_cast<int>(A.rows()),
                  norms::Randers{A, std::move(A_inv), b, std::move(w), b_sq});
}

NormSpec NormSpec::two_slope(double a_plus, double a_minus) {
  if (!(a_plus > 0) || !(a_minus > 0) || !std::isfinite(a_plus) || !std::isfinite(a_minus))
    throw DomainError("two_slope: slopes must be positive and finite");
  return NormSpec(1, norms::TwoSlope{a_plus, a_minus});
}

std::string NormSpec::family_name() const {
  return std::visit(Overloaded{[](const norms::Euclidean&) { return "euclidean"; },
                               [](const norms::Quadratic&) { return "quadratic"; },
                               [](const norms::Randers&) { return "randers"; },
                               [](const norms::TwoSlope&) { return "two_slope"; }},
                    family_);
}

bool NormSpec::is_quadratic() const {
  return std::holds_alternative<norms::Euclidean>(family_) ||
         std::holds_alternative<norms::Quadratic>(family_);
}

double norm_eval(const NormSpec& norm, const Vector& v) {
  require_dim(norm, v.size(), "vector");
  return std::visit(
      Overloaded{[&](const norms::Euclidean&) { return v.norm(); },
                 [&](const norms::Quadratic& q) { return std::sqrt(quad_form(q.A, v)); },
                 [&](const norms::Randers& r) { return std::sqrt(quad_form(r.A, v)) + r.b.dot(v); },
                 [&](const norms::TwoSlope& t) {
                   return v(0) >= 0 ? t.a_plus * v(0) : -t.a_minus * v(0);
                 }},
      norm.family());
}

namespace {

// Closed-form dual of a Randers norm. With w = A^{-1} b, s^2 = |b|^2_{A^-1},
// q = xi^T A^{-1} xi and c = xi.w:
//   F*(xi) = (sqrt((1 - s^2) q + c^2) - c) / (1 - s^2).
struct RandersDual {
  double value;
  double root;  // sqrt((1 - s^2) q + c^2)
  double c;
};

RandersDual randers_dual(const norms::Randers& r, const Vector& xi) {
  const double one_minus = 1.0 - r.b_sq;
  const double q = quad_form(r.A_inv, xi);
  const double c = xi.dot(r.w);
  const double root = std::sqrt(std::max(0.0, one_minus * q + c * c));
  return {(root - c) / one_minus, root, c};
}

}  // namespace

double dual_norm_eval(const NormSpec& norm, const Covector& xi) {
  require_dim(norm, xi.dim(), "covector");
  const Vector& x = xi.components;
  return std::visit(
      Overloaded{[&](const norms::Euclidean&) { return x.norm(); },
                 [&](const norms::Quadratic& q) { return std::sqrt(quad_form(q.A_inv, x)); },
                 [&](const norms::Randers& r) { return randers_dual(r, x).value; },
                 [&](const norms::TwoSlope& t) {
                   return x(0) >= 0 ? x(0) / t.a_plus : -x(0) / t.a_minus;
                 }},
      norm.family());
}

Covector legendre(const NormSpec& norm, const Vector& v) {
  require_dim(norm, v.size(), "vector");
  if (v.isZero(0.0)) return Covector::zero(norm.dim());
  return std::visit(
      Overloaded{[&](const norms::Euclidean&) { return Covector(v); },
                 [&](const norms::Quadratic& q) { return Covector(q.A * v); },
                 [&](const norms::Randers& r) {
                   const double alpha = std::sqrt(quad_form(r.A, v));
                   const double F = alpha + r.b.dot(v);
                   return Covector(F * (r.A * v / alpha + r.b));
                 },
                 [&](const norms::TwoSlope& t) {
                   const double a = v(0) > 0 ? t.a_plus : t.a_minus;
                   return Covector{a * a * v(0)};
                 }},
      norm.family());
}

DualJet dual_jet(const NormSpec& norm, const Covector& xi) {
  require_dim(norm, xi.dim(), "covector");
  const Vector& x = xi.components;
  return std::visit(
      Overloaded{[&](const norms::Euclidean&) { return DualJet{x.squaredNorm(), x}; },
                 [&](const norms::Quadratic& q) {
                   Vector g = q.A_inv * x;
                   return DualJet{std::max(0.0, x.dot(g)), std::move(g)};
                 },
                 [&](const norms::Randers& r) {
                   const auto d = randers_dual(r, x);
                   if (d.root == 0.0) return DualJet{0.0, Vector::Zero(x.size())};
                   const double one_minus = 1.0 - r.b_sq;
                   // grad F* = ((1 - s^2) A^{-1} xi + c w) / root - w, over (1 - s^2).
                   Vector grad = ((one_minus * (r.A_inv * x) + d.c * r.w) / d.root - r.w) / one_minus;
                   return DualJet{d.value * d.value, d.value * grad};
                 },
                 [&](const norms::TwoSlope& t) {
                   const double a = x(0) >= 0 ? t.a_plus : t.a_minus;
                   Vector g(1);
                   g(0) = x(0) / (a * a);
                   return DualJet{x(0) * x(0) / (a * a), std::move(g)};
                 }},
      norm.family());
}

Vector legendre_inverse(const NormSpec& norm, const Covector& xi) {
  return dual_jet(norm, xi).gradient;
}

Vector legendre_inverse_fd(const NormSpec& norm, const Covector& xi) {
  require_dim(norm, xi.dim(), "covector");
  if (xi.components.isZero(0.0)) return Vector::Zero(norm.dim());
  const double h = 1e-6 * std::max(1.0, xi.components.norm());
  Vector grad(norm.dim());
  for (int i = 0; i < norm.dim(); ++i) {
    Covector plus = xi, minus = xi;
    plus.components(i) += h;
    minus.components(i) -= h;
    const double fp = dual_norm_eval(norm, plus);
    const double fm = dual_norm_eval(norm, minus);
    grad(i) = (0.5 * fp * fp - 0.5 * fm * fm) / (2 * h);
  }
  return grad;
}

Matrix metric_tensor(const NormSpec& norm, const Vector& v) {
  require_dim(norm, v.size(), "vector");
  if (v.isZero(0.0)) throw DomainError("metric_tensor: F is not smooth at v = 0");
  return std::visit(
      Overloaded{[&](const norms::Euclidean&) -> Matrix { return Matrix::Identity(v.size(), v.size()); },
                 [&](const norms::Quadratic& q) -> Matrix { return q.A; },
                 [&](const norms::Randers& r) -> Matrix {
                   const Vector Av = r.A * v;
                   const double alpha = std::sqrt(quad_form(r.A, v));
                   const double F = alpha + r.b.dot(v);
                   const Vector dF = Av / alpha + r.b;
                   const Matrix d2F = (r.A - Av * Av.transpose() / (alpha * alpha)) / alpha;
                   return dF * dF.transpose() + F * d2F;
                 },
                 [&](const norms::TwoSlope& t) -> Matrix {
                   const double a = v(0) > 0 ? t.a_plus : t.a_minus;
                   return Matrix::Constant(1, 1, a * a);
                 }},
      norm.family());
}

NormValidation validate_norm(const NormSpec& norm, std::uint64_t seed, int samples) {
  constexpr double kHomogeneityTol = 1e-12;
  constexpr double kFenchelTol = 1e-10;

  NormValidation report;
  report.samples = samples;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> scale(0.0, 10.0);
  const int n = norm.dim();

  auto record = [&](double excess, const std::string& check) {
    if (excess > report.worst_violation) {
      report.worst_violation = excess;
      report.worst_check = check;
      report.passed = false;
    }
  };

  for (int s = 0; s < samples; ++s) {
    Vector v(n);
    Vector e(n);
    for (int i = 0; i < n; ++i) {
      v(i) = gauss(rng);
      e(i) = gauss(rng);
    }
    if (v.isZero(0.0)) continue;
    const Covector xi(e);
    const double t = scale(rng);

    const double Fv = norm_eval(norm, v);
    const double Ftv = norm_eval(norm, Vector(t * v));
    record(std::abs(Ftv - t * Fv) / (1.0 + Ftv) - kHomogeneityTol, "homogeneity");

    if (!(Fv > 0)) record(1.0 - std::max(Fv, 0.0), "positivity");

    const Matrix g = metric_tensor(norm, v);
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (!(min_eig > 0)) record(-min_eig + 1e-300, "metric positive definiteness");

    const double pairing = xi(v);
    const double bound = Fv * dual_norm_eval(norm, xi);
    record((pairing - bound * (1 + kFenchelTol)) / (1.0 + std::abs(bound)), "fenchel");
  }
  return report;
}

}  // namespace finsler
