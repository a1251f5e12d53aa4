#pragma once

// One-dimensional model operators L_{K,N} v = v'' - T(t) v' and their first
// Neumann eigenvalues, computed by shooting.

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace finsler::model1d {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Drift chart of the model operator.
///   tan      K > 0, N finite   T =  sqrt(K(N-1)) tan(s t),   s = sqrt(K/(N-1)), |t| < pi/(2s)
///   tanh     K < 0, N finite   T = -sqrt(-K(N-1)) tanh(s t), s = sqrt(-K/(N-1))
///   coth     K < 0, N finite   T = -sqrt(-K(N-1)) coth(s t), t != 0
///   power    K = 0, N finite   T = -(N-1)/t,                 t != 0
///   flat     K = 0, N finite   T = 0
///   linear   N infinite        T = K t
///   constant K = 0, N infinite T = c
enum class Chart { tan, tanh, coth, power, flat, linear, constant };

[[nodiscard]] std::string chart_name(Chart chart);
[[nodiscard]] Chart parse_chart(const std::string& name);

struct ModelProblem {
  double K = 0;
  double N = kInfinity;
  Chart chart = Chart::linear;
  double drift = 0;  // c of the constant chart

  /// Validates chart compatibility with the sign of K and finiteness of N.
  static ModelProblem make(double K, double N, Chart chart, double drift = 0.0);
  /// The chart used for the symmetric interval (-d/2, d/2).
  static ModelProblem centered(double K, double N);

  [[nodiscard]] bool finite_N() const { return N < kInfinity; }
  /// s of the trigonometric/hyperbolic charts; 0 otherwise.
  [[nodiscard]] double frequency() const;
  /// Half-width pi/(2s) of the tan chart; infinity for the other charts.
  [[nodiscard]] double half_width() const;
  /// True when T has a pole at t (tan chart ends, coth/power origin).
  [[nodiscard]] bool is_singular_point(double t) const;
  /// Whether [a, b] lies in the closure of one connected piece of the chart domain.
  [[nodiscard]] bool admits_interval(double a, double b) const;
};

/// T(t). Throws DomainError outside the open chart domain.
[[nodiscard]] double coeff_T(const ModelProblem& problem, double t);

/// Density of the invariant measure mu_{K,N}, exp(-int T), normalized to 1 at
/// t = 0 where that point is regular (|t|^{N-1} style for power/coth).
[[nodiscard]] double invariant_density(const ModelProblem& problem, double t);

struct Sample {
  double t;
  double v;
  double dv;
};

/// A solution of L v = -lambda v on [a, b] with v(a) = -1, v'(a) = 0.
class ModelSolution {
 public:
  ModelSolution() = default;
  ModelSolution(ModelProblem problem, double a, double b, double lambda,
                std::vector<Sample> samples);

  [[nodiscard]] const ModelProblem& problem() const { return problem_; }
  [[nodiscard]] std::pair<double, double> interval() const { return {a_, b_}; }
  [[nodiscard]] double lambda() const { return lambda_; }
  [[nodiscard]] const std::vector<Sample>& samples() const { return samples_; }
  [[nodiscard]] double min_value() const { return samples_.front().v; }
  [[nodiscard]] double max_value() const { return samples_.back().v; }

  /// v'(v^{-1}(value)) for value in [min_value, max_value]. Interpolates
  /// phi(u) = v'(v^{-1}(u))^2 / 2, which is smooth in u with phi'(u) = v''.
  [[nodiscard]] double slope_at_value(double value) const;
  /// v^{-1}(value).
  [[nodiscard]] double inverse(double value) const;

 private:
  ModelProblem problem_;
  double a_ = 0;
  double b_ = 0;
  double lambda_ = 0;
  std::vector<Sample> samples_;
  std::vector<double> curvature_;  // v'' at the samples
};

struct Trajectory {
  std::vector<Sample> samples;  // uniform in t, endpoints included
  double terminal_slope = 0;    // v'(b), or the regularity residual at a singular b
  bool slope_changed_sign = false;
};

struct ShootOptions {
  int samples = 201;
};

/// Integrates v'' = T v' - lambda v from v(a) = -1, v'(a) = 0 to b. A singular
/// left endpoint starts at a + eps from v = -1 + lambda (t-a)^2 / (2N); at a
/// singular right endpoint the integration stops at b - eps and the terminal
/// slope is replaced by the residual v' - lambda eps v / N of the regular branch.
[[nodiscard]] Trajectory shoot(const ModelProblem& problem, double lambda, double a, double b,
                               const ShootOptions& options = {});

/// First nonzero Neumann eigenvalue of L on (a, b) by bisection on lambda.
[[nodiscard]] double lambda1_interval(const ModelProblem& problem, double a, double b);

/// Myers bound pi sqrt((N-1)/K) for K > 0 and finite N; infinity otherwise.
[[nodiscard]] double max_diameter(double K, double N);

/// lambda_1(K, N, d): eigenvalue of the centered model on (-d/2, d/2).
[[nodiscard]] double lambda1_model(double K, double N, double d);

/// Solution shot from the chart end (a = -pi/(2s) for K > 0, a = 0 for
/// K <= 0) to the first critical point b; max_value() is m_{K,N}.
/// Requires finite N and lambda > max(KN/(N-1), 0).
[[nodiscard]] ModelSolution model_solution(double K, double N, double lambda);

/// An interval with first Neumann eigenvalue lambda whose eigenfunction has
/// min -1 and max k. k in [m, 1/m] for finite N, k > 0 for infinite N.
[[nodiscard]] ModelSolution fit_model_solution(double K, double N, double lambda, double k);

}  // namespace finsler::model1d
