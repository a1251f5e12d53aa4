#pragma once

// Minkowski norms on R^n: evaluation, dual norm, Legendre transform and the
// fundamental tensor g_v = Hess(F^2 / 2).

#include <cstdint>
#include <string>
#include <variant>

#include <Eigen/Core>

namespace finsler {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Element of the dual space. Kept distinct from Vector so that tangent and
/// cotangent quantities cannot be mixed up silently.
struct Covector {
  Eigen::VectorXd components;

  Covector() = default;
  explicit Covector(Eigen::VectorXd c) : components(std::move(c)) {}
  Covector(std::initializer_list<double> values);

  [[nodiscard]] Eigen::Index dim() const { return components.size(); }
  [[nodiscard]] double operator()(const Vector& v) const { return components.dot(v); }
  [[nodiscard]] static Covector zero(Eigen::Index dim) {
    return Covector(Eigen::VectorXd::Zero(dim));
  }
};

namespace norms {

struct Euclidean {};

struct Quadratic {
  Matrix A;
  Matrix A_inv;
};

/// F(v) = sqrt(v^T A v) + b.v with |b|_{A^{-1}} < 1.
struct Randers {
  Matrix A;
  Matrix A_inv;
  Vector b;
  Vector w;          // A^{-1} b
  double b_sq = 0;   // |b|^2_{A^{-1}}
};

/// One-dimensional norm made of two linear pieces:
/// F(v) = a_plus * v for v >= 0 and a_minus * (-v) for v < 0.
struct TwoSlope {
  double a_plus = 1;
  double a_minus = 1;
};

using Family = std::variant<Euclidean, Quadratic, Randers, TwoSlope>;

}  // namespace norms

/// Parametric Minkowski norm. Construction validates the parameters, so every
/// NormSpec value is an admissible (positive, homogeneous, strongly convex)
/// norm. Non-reversible families are never symmetrized.
class NormSpec {
 public:
  NormSpec() : NormSpec(1, norms::Euclidean{}) {}
  static NormSpec euclidean(int dim);
  static NormSpec quadratic(const Matrix& A);
  static NormSpec randers(const Matrix& A, const Vector& b);
  static NormSpec two_slope(double a_plus, double a_minus);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const norms::Family& family() const { return family_; }
  [[nodiscard]] std::string family_name() const;
  [[nodiscard]] bool is_quadratic() const;  // euclidean or quadratic

 private:
  NormSpec(int dim, norms::Family family) : dim_(dim), family_(std::move(family)) {}

  int dim_;
  norms::Family family_;
};

/// F(v). F(0) = 0.
[[nodiscard]] double norm_eval(const NormSpec& norm, const Vector& v);

/// F*(xi) = sup_{F(v) <= 1} xi(v), from the closed form of each family.
[[nodiscard]] double dual_norm_eval(const NormSpec& norm, const Covector& xi);

/// l(v) = g_v(v, .), the gradient of F^2/2 at v; l(0) = 0.
[[nodiscard]] Covector legendre(const NormSpec& norm, const Vector& v);

/// l^{-1}(xi), the gradient of F*^2/2 at xi; l^{-1}(0) = 0.
[[nodiscard]] Vector legendre_inverse(const NormSpec& norm, const Covector& xi);

/// l^{-1} by central differences of F*^2/2 with step 1e-6 * max(1, |xi|).
/// Used where no closed form is trusted and as a cross-check of the closed
/// forms.
[[nodiscard]] Vector legendre_inverse_fd(const NormSpec& norm, const Covector& xi);

/// F*^2(xi) together with l^{-1}(xi) = grad(F*^2/2); the hot path of the
/// Rayleigh-quotient solver.
struct DualJet {
  double dual_sq = 0;
  Vector gradient;
};
[[nodiscard]] DualJet dual_jet(const NormSpec& norm, const Covector& xi);

/// g_v = Hess(F^2/2)(v). Throws DomainError for v = 0.
[[nodiscard]] Matrix metric_tensor(const NormSpec& norm, const Vector& v);

struct NormValidation {
  bool passed = true;
  double worst_violation = 0;  // largest amount by which a check exceeded its tolerance
  std::string worst_check;     // empty when passed
  int samples = 0;
};

/// Samples directions and checks homogeneity, positivity, positive
/// definiteness of g_v and the Fenchel inequality xi(v) <= F(v) F*(xi).
/// Violations are reported, never thrown.
[[nodiscard]] NormValidation validate_norm(const NormSpec& norm, std::uint64_t seed = 7,
                                           int samples = 200);

}  // namespace finsler
