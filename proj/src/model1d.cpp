#include "finsler/model1d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "finsler/error.hpp"

namespace finsler::model1d {

namespace odeint = boost::numeric::odeint;
using std::numbers::pi;

namespace {

constexpr double kAbsTol = 1e-10;
constexpr double kRelTol = 1e-10;
constexpr double kBisectionRelWidth = 1e-10;
constexpr double kSingularOffset = 1e-6;

using State = std::array<double, 2>;  // (v, v')

bool is_finite_state(const State& x) { return std::isfinite(x[0]) && std::isfinite(x[1]); }

// T without the domain check; callers stay inside the chart.
double drift(const ModelProblem& p, double t) {
  switch (p.chart) {
    case Chart::tan:
      return std::sqrt(p.K * (p.N - 1)) * std::tan(p.frequency() * t);
    case Chart::tanh:
      return -std::sqrt(-p.K * (p.N - 1)) * std::tanh(p.frequency() * t);
    case Chart::coth:
      return -std::sqrt(-p.K * (p.N - 1)) / std::tanh(p.frequency() * t);
    case Chart::power:
      return -(p.N - 1) / t;
    case Chart::flat:
      return 0.0;
    case Chart::linear:
      return p.K * t;
    case Chart::constant:
      return p.drift;
  }
  return 0.0;
}

struct Rhs {
  const ModelProblem* problem;
  double lambda;
  void operator()(const State& x, State& dxdt, double t) const {
    dxdt[0] = x[1];
    dxdt[1] = drift(*problem, t) * x[1] - lambda * x[0];
  }
};

// Adaptive Dormand-Prince integration from t0 to t1 that lands exactly on
// every checkpoint. on_step(t_prev, x_prev, t, x) may return false to stop.
template <class OnStep, class OnCheckpoint>
State integrate(const Rhs& rhs, State x, double t0, double t1, double dt0,
                const std::vector<double>& checkpoints, OnStep&& on_step,
                OnCheckpoint&& on_checkpoint) {
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(kAbsTol, kRelTol);
  const double span = t1 - t0;
  const double max_dt = span / 20.0;
  const double snap = 1e-14 * std::max(1.0, std::abs(t1));
  double t = t0;
  double dt = std::min(dt0, max_dt);
  auto next_cp = std::upper_bound(checkpoints.begin(), checkpoints.end(), t0 + snap);
  int rejected_in_row = 0;
  while (t1 - t > snap) {
    double target = t1;
    if (next_cp != checkpoints.end() && *next_cp < t1) target = *next_cp;
    const bool hits_target = t + dt >= target - snap;
    double trial = hits_target ? target - t : dt;
    const State prev = x;
    const double t_prev = t;
    double step = trial;
    const auto result = stepper.try_step(rhs, x, t, step);
    if (result == odeint::fail) {
      dt = step;
      if (++rejected_in_row > 200 || dt < 1e-15 * std::max(1.0, std::abs(t)))
        throw SolverError("shoot: step-size underflow");
      continue;
    }
    rejected_in_row = 0;
    if (!is_finite_state(x)) throw SolverError("shoot: non-finite state");
    if (hits_target) {
      t = target;  // try_step advanced by exactly target - t_prev
      if (next_cp != checkpoints.end() && target == *next_cp) {
        on_checkpoint(t, x);
        ++next_cp;
      }
      // keep the controller's suggestion unless the clipped step was tiny
      dt = std::min(std::max(step, dt), max_dt);
    } else {
      dt = std::min(step, max_dt);
    }
    if (!on_step(t_prev, prev, t, x)) break;
  }
  return x;
}

struct StartState {
  double t;
  State x;
};

double singular_offset(const ModelProblem& p, double length) {
  double scale = length;
  if (p.chart == Chart::tan || p.chart == Chart::coth) scale = std::min(scale, 1.0 / p.frequency());
  return kSingularOffset * scale;
}

StartState start_state(const ModelProblem& p, double lambda, double a, double eps) {
  if (p.is_singular_point(a)) {
    // v''(a) = lambda / N at a pole of T, so v = -1 + lambda (t - a)^2 / (2N).
    return {a + eps, {-1.0 + lambda * eps * eps / (2 * p.N), lambda * eps / p.N}};
  }
  return {a, {-1.0, 0.0}};
}

void require_positive_lambda(double lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive and finite");
}

// Shoot from a (v = -1, v' = 0) and stop at the first zero of v' after a,
// located by Illinois regula falsi on re-integrated states. Returns nullopt
// when v' stays positive up to t_limit.
struct Critical {
  double b;
  double value;
};

std::optional<Critical> first_critical(const ModelProblem& p, double lambda, double a,
                                       double t_limit) {
  const double eps = singular_offset(p, t_limit - a);
  const StartState start = start_state(p, lambda, a, eps);
  const Rhs rhs{&p, lambda};
  double end = t_limit;
  if (p.is_singular_point(t_limit)) end = t_limit - eps;

  std::optional<std::pair<double, State>> bracket_left;
  double bracket_right_t = 0;
  State bracket_right{};
  const std::vector<double> none;
  integrate(
      rhs, start.x, start.t, end, std::min(eps, (end - start.t) * 1e-3), none,
      [&](double tp, const State& xp, double t, const State& x) {
        if (x[1] <= 0) {
          bracket_left = {tp, xp};
          bracket_right_t = t;
          bracket_right = x;
          return false;
        }
        return true;
      },
      [](double, const State&) {});
  if (!bracket_left) return std::nullopt;

  const auto [t_lo0, x_lo] = *bracket_left;
  auto state_at = [&](double tau) {
    if (tau <= t_lo0) return x_lo;
    return integrate(rhs, x_lo, t_lo0, tau, (tau - t_lo0) * 0.1, none,
                     [](double, const State&, double, const State&) { return true; },
                     [](double, const State&) {});
  };
  double lo = t_lo0, hi = bracket_right_t;
  double f_lo = x_lo[1], f_hi = bracket_right[1];
  State x_best = bracket_right;
  double t_best = hi;
  int side = 0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
    double tau = (f_hi == f_lo) ? 0.5 * (lo + hi) : hi - f_hi * (hi - lo) / (f_hi - f_lo);
    if (!(tau > lo && tau < hi)) tau = 0.5 * (lo + hi);
    const State x = state_at(tau);
    t_best = tau;
    x_best = x;
    if (x[1] == 0) break;
    if (x[1] > 0) {
      lo = tau;
      f_lo = x[1];
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = tau;
      f_hi = x[1];
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
  }
  return Critical{t_best, x_best[0]};
}

// Practical right end for charts without one.
double open_right_limit(const ModelProblem& p, double lambda, double a) {
  if (p.chart == Chart::tan) return p.half_width();
  if ((p.chart == Chart::coth || p.chart == Chart::power) && a < 0) return 0.0;
  return a + 60.0 * pi / std::sqrt(lambda);
}

ModelSolution build_solution(const ModelProblem& p, double lambda, double a, double b) {
  Trajectory traj = shoot(p, lambda, a, b, ShootOptions{2001});
  return ModelSolution(p, a, b, lambda, std::move(traj.samples));
}

}  // namespace

std::string chart_name(Chart chart) {
  switch (chart) {
    case Chart::tan: return "tan";
    case Chart::tanh: return "tanh";
    case Chart::coth: return "coth";
    case Chart::power: return "power";
    case Chart::flat: return "flat";
    case Chart::linear: return "linear";
    case Chart::constant: return "constant";
  }
  return "?";
}

Chart parse_chart(const std::string& name) {
  for (Chart c : {Chart::tan, Chart::tanh, Chart::coth, Chart::power, Chart::flat, Chart::linear,
                  Chart::constant})
    if (chart_name(c) == name) return c;
  throw DomainError("unknown chart '" + name + "'");
}

ModelProblem ModelProblem::make(double K, double N, Chart chart, double drift_c) {
  if (!std::isfinite(K)) throw DomainError("K must be finite");
  if (!(N > 1)) throw DomainError("N must lie in (1, inf]");
  const bool finite = N < kInfinity;
  auto fail = [&](const char* why) {
    std::ostringstream os;
    os << "chart " << chart_name(chart) << " incompatible with K=" << K << ", N=" << N << ": " << why;
    throw DomainError(os.str());
  };
  switch (chart) {
    case Chart::tan:
      if (!(K > 0) || !finite) fail("needs K > 0 and finite N");
      break;
    case Chart::tanh:
    case Chart::coth:
      if (!(K < 0) || !finite) fail("needs K < 0 and finite N");
      break;
    case Chart::power:
    case Chart::flat:
      if (K != 0 || !finite) fail("needs K = 0 and finite N");
      break;
    case Chart::linear:
      if (finite) fail("needs N = inf");
      break;
    case Chart::constant:
      if (K != 0 || finite) fail("needs K = 0 and N = inf");
      if (!std::isfinite(drift_c)) fail("drift must be finite");
      break;
  }
  return ModelProblem{K, N, chart, chart == Chart::constant ? drift_c : 0.0};
}

ModelProblem ModelProblem::centered(double K, double N) {
  if (!(N > 1)) throw DomainError("N must lie in (1, inf]");
  if (N == kInfinity) return K == 0 ? make(K, N, Chart::constant, 0.0) : make(K, N, Chart::linear);
  if (K > 0) return make(K, N, Chart::tan);
  if (K < 0) return make(K, N, Chart::tanh);
  return make(K, N, Chart::flat);
}

double ModelProblem::frequency() const {
  switch (chart) {
    case Chart::tan: return std::sqrt(K / (N - 1));
    case Chart::tanh:
    case Chart::coth: return std::sqrt(-K / (N - 1));
    default: return 0.0;
  }
}

double ModelProblem::half_width() const {
  return chart == Chart::tan ? pi / (2 * frequency()) : kInfinity;
}

bool ModelProblem::is_singular_point(double t) const {
  switch (chart) {
    case Chart::tan: {
      const double h = half_width();
      return std::abs(std::abs(t) - h) <= 1e-12 * h;
    }
    case Chart::coth: return std::abs(t) <= 1e-12 / frequency();
    case Chart::power: return std::abs(t) <= 1e-300;
    default: return false;
  }
}

bool ModelProblem::admits_interval(double a, double b) const {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) return false;
  switch (chart) {
    case Chart::tan: {
      const double h = half_width() * (1 + 1e-12);
      return a >= -h && b <= h;
    }
    case Chart::coth:
    case Chart::power: return a >= 0 || b <= 0 || is_singular_point(a) || is_singular_point(b);
    default: return true;
  }
}

double coeff_T(const ModelProblem& problem, double t) {
  if (!std::isfinite(t)) throw DomainError("coeff_T: t must be finite");
  switch (problem.chart) {
    case Chart::tan:
      if (!(std::abs(t) < problem.half_width())) {
        std::ostringstream os;
        os << "coeff_T: t=" << t << " outside the tan chart (|t| < " << problem.half_width() << ")";
        throw DomainError(os.str());
      }
      break;
    case Chart::coth:
    case Chart::power:
      if (t == 0) throw DomainError("coeff_T: t = 0 is a pole of the chart");
      break;
    default: break;
  }
  return drift(problem, t);
}

double invariant_density(const ModelProblem& p, double t) {
  (void)coeff_T(p, t);  // domain check
  const double s = p.frequency();
  switch (p.chart) {
    case Chart::tan: return std::pow(std::cos(s * t), p.N - 1);
    case Chart::tanh: return std::pow(std::cosh(s * t), p.N - 1);
    case Chart::coth: return std::pow(std::abs(std::sinh(s * t)), p.N - 1);
    case Chart::power: return std::pow(std::abs(t), p.N - 1);
    case Chart::flat: return 1.0;
    case Chart::linear: return std::exp(-0.5 * p.K * t * t);
    case Chart::constant: return std::exp(-p.drift * t);
  }
  return 1.0;
}

ModelSolution::ModelSolution(ModelProblem problem, double a, double b, double lambda,
                             std::vector<Sample> samples)
    : problem_(problem), a_(a), b_(b), lambda_(lambda), samples_(std::move(samples)) {
  if (samples_.size() < 2) throw SolverError("ModelSolution needs at least two samples");
  curvature_.reserve(samples_.size());
  for (const Sample& s : samples_) {
    if (problem_.is_singular_point(s.t) || (problem_.finite_N() && s.dv == 0 &&
                                            problem_.is_singular_point(s.t)))
      curvature_.push_back(-lambda_ * s.v / problem_.N);
    else
      curvature_.push_back(drift(problem_, s.t) * s.dv - lambda_ * s.v);
  }
}

namespace {

std::size_t locate(const std::vector<Sample>& s, double value) {
  auto it = std::upper_bound(s.begin(), s.end(), value,
                             [](double x, const Sample& smp) { return x < smp.v; });
  std::size_t j = it == s.begin() ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
  return std::min(j, s.size() - 2);
}

}  // namespace

double ModelSolution::slope_at_value(double value) const {
  value = std::clamp(value, min_value(), max_value());
  const std::size_t j = locate(samples_, value);
  const Sample& s0 = samples_[j];
  const Sample& s1 = samples_[j + 1];
  const double du = s1.v - s0.v;
  if (du <= 0) return std::max(s0.dv, 0.0);
  const double x = (value - s0.v) / du;
  const double p0 = 0.5 * s0.dv * s0.dv, p1 = 0.5 * s1.dv * s1.dv;
  const double m0 = curvature_[j] * du, m1 = curvature_[j + 1] * du;
  const double x2 = x * x, x3 = x2 * x;
  const double phi = (2 * x3 - 3 * x2 + 1) * p0 + (x3 - 2 * x2 + x) * m0 + (-2 * x3 + 3 * x2) * p1 +
                     (x3 - x2) * m1;
  return std::sqrt(2.0 * std::max(phi, 0.0));
}

double ModelSolution::inverse(double value) const {
  value = std::clamp(value, min_value(), max_value());
  const std::size_t j = locate(samples_, value);
  const Sample& s0 = samples_[j];
  const Sample& s1 = samples_[j + 1];
  const double h = s1.t - s0.t;
  auto hermite = [&](double x) {
    const double x2 = x * x, x3 = x2 * x;
    return (2 * x3 - 3 * x2 + 1) * s0.v + (x3 - 2 * x2 + x) * h * s0.dv + (-2 * x3 + 3 * x2) * s1.v +
           (x3 - x2) * h * s1.dv;
  };
  double lo = 0, hi = 1;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (hermite(mid) < value ? lo : hi) = mid;
  }
  return s0.t + 0.5 * (lo + hi) * h;
}

Trajectory shoot(const ModelProblem& problem, double lambda, double a, double b,
                 const ShootOptions& options) {
  require_positive_lambda(lambda);
  if (!problem.admits_interval(a, b)) {
    std::ostringstream os;
    os << "shoot: interval [" << a << ", " << b << "] not inside the " << chart_name(problem.chart)
       << " chart";
    throw DomainError(os.str());
  }
  const double eps = singular_offset(problem, b - a);
  const StartState start = start_state(problem, lambda, a, eps);
  const bool singular_end = problem.is_singular_point(b);
  const double end = singular_end ? b - eps : b;

  Trajectory traj;
  std::vector<double> checkpoints;
  const int n = std::max(options.samples, 2);
  traj.samples.reserve(static_cast<std::size_t>(n));
  traj.samples.push_back({a, -1.0, 0.0});
  for (int k = 1; k + 1 < n; ++k) {
    const double t = a + (b - a) * k / (n - 1);
    if (t > start.t && t < end) checkpoints.push_back(t);
  }
  const Rhs rhs{&problem, lambda};
  const State last = integrate(
      rhs, start.x, start.t, end, std::min(eps, (end - start.t) * 1e-3), checkpoints,
      [&](double, const State&, double t, const State& x) {
        if (x[1] <= 0 && t < end) traj.slope_changed_sign = true;
        return true;
      },
      [&](double t, const State& x) { traj.samples.push_back({t, x[0], x[1]}); });
  traj.samples.push_back({end, last[0], last[1]});
  traj.terminal_slope = singular_end ? last[1] - lambda * eps * last[0] / problem.N : last[1];
  return traj;
}

namespace {

// True when lambda lies below the first Neumann eigenvalue of (a, b): v' stays
// positive on (a, b] (Sturm oscillation makes this monotone in lambda).
bool below_first_eigenvalue(const ModelProblem& p, double lambda, double a, double b) {
  const double eps = singular_offset(p, b - a);
  const StartState start = start_state(p, lambda, a, eps);
  const bool singular_end = p.is_singular_point(b);
  const double end = singular_end ? b - eps : b;
  bool crossed = false;
  const Rhs rhs{&p, lambda};
  const std::vector<double> none;
  const State last = integrate(
      rhs, start.x, start.t, end, std::min(eps, (end - start.t) * 1e-3), none,
      [&](double, const State&, double t, const State& x) {
        if (x[1] <= 0 && t < end) {
          crossed = true;
          return false;
        }
        return true;
      },
      [](double, const State&) {});
  if (crossed) return false;
  const double terminal = singular_end ? last[1] - lambda * eps * last[0] / p.N : last[1];
  return terminal > 0;
}

}  // namespace

double lambda1_interval(const ModelProblem& problem, double a, double b) {
  if (!problem.admits_interval(a, b)) {
    std::ostringstream os;
    os << "lambda1_interval: [" << a << ", " << b << "] not inside the "
       << chart_name(problem.chart) << " chart";
    throw DomainError(os.str());
  }
  double lo = 1e-6;
  double hi = 4 * pi * pi / ((b - a) * (b - a));
  for (int i = 0; i < 30 && !below_first_eigenvalue(problem, lo, a, b); ++i) {
    hi = lo;
    lo *= 0.1;
  }
  if (!below_first_eigenvalue(problem, lo, a, b))
    throw SolverError("lambda1_interval: no lower bracket found");
  int grow = 0;
  while (below_first_eigenvalue(problem, hi, a, b)) {
    lo = hi;
    hi *= 2;
    if (++grow > 200) throw SolverError("lambda1_interval: no upper bracket found");
  }
  while (hi - lo > kBisectionRelWidth * hi) {
    const double mid = 0.5 * (lo + hi);
    (below_first_eigenvalue(problem, mid, a, b) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double max_diameter(double K, double N) {
  if (K > 0 && N < kInfinity) return pi * std::sqrt((N - 1) / K);
  return kInfinity;
}

double lambda1_model(double K, double N, double d) {
  if (!(d > 0) || !std::isfinite(d)) throw DomainError("lambda1_model: d must be positive");
  const double dmax = max_diameter(K, N);
  if (d > dmax * (1 + 1e-12)) {
    std::ostringstream os;
    os << "lambda1_model: d=" << d << " exceeds the Myers bound " << dmax;
    throw DomainError(os.str());
  }
  if (d >= dmax * (1 - 1e-12)) return N * K / (N - 1);
  const ModelProblem p = ModelProblem::centered(K, N);
  return lambda1_interval(p, -0.5 * d, 0.5 * d);
}

ModelSolution model_solution(double K, double N, double lambda) {
  if (!(N < kInfinity)) throw DomainError("model_solution: N must be finite");
  require_positive_lambda(lambda);
  const double threshold = std::max(K * N / (N - 1), 0.0);
  if (!(lambda > threshold)) {
    std::ostringstream os;
    os << "model_solution: lambda=" << lambda << " must exceed max(KN/(N-1), 0)=" << threshold;
    throw DomainError(os.str());
  }
  const ModelProblem p = ModelProblem::make(K, N, K > 0 ? Chart::tan : K < 0 ? Chart::coth : Chart::power);
  const double a = K > 0 ? -p.half_width() : 0.0;
  const double limit = open_right_limit(p, lambda, a);
  const auto crit = first_critical(p, lambda, a, limit);
  if (!crit) throw SolverError("model_solution: v' has no zero before the chart boundary");
  return build_solution(p, lambda, a, crit->b);
}

namespace {

// One-parameter family of intervals (or drifts) used to reach a prescribed
// maximum; p in [0, 1].
struct Family {
  ModelProblem problem;
  std::function<std::pair<ModelProblem, double>(double)> at;  // p -> (problem, left end)
};

struct Probe {
  double k = std::numeric_limits<double>::quiet_NaN();
  double a = 0;
  double b = 0;
  ModelProblem problem;
};

Probe probe(const std::pair<ModelProblem, double>& pa, double lambda) {
  const auto& [p, a] = pa;
  Probe out;
  out.problem = p;
  out.a = a;
  double limit = open_right_limit(p, lambda, a);
  if (limit <= a) return out;
  try {
    if (auto crit = first_critical(p, lambda, a, limit)) {
      out.k = crit->value;
      out.b = crit->b;
    }
  } catch (const SolverError&) {
    // blow-up before a critical point: no member of the family here
  }
  return out;
}

// Scan then bisect on p. A member without a critical point counts as k = +inf:
// along the families used here the maximum blows up where the critical point
// escapes to the chart end.
std::optional<Probe> search_family(const Family& fam, double lambda, double k) {
  constexpr int kScan = 128;
  constexpr double kHit = 1e-11;
  auto key = [](const Probe& p) {
    return std::isfinite(p.k) ? p.k : std::numeric_limits<double>::infinity();
  };
  std::vector<double> ps(kScan + 1);
  std::vector<Probe> probes(kScan + 1);
  for (int i = 0; i <= kScan; ++i) {
    ps[i] = static_cast<double>(i) / kScan;
    probes[i] = probe(fam.at(ps[i]), lambda);
    if (std::isfinite(probes[i].k) && std::abs(probes[i].k - k) <= kHit) return probes[i];
  }
  std::optional<Probe> best;
  for (int i = 0; i < kScan; ++i) {
    double k0 = key(probes[i]);
    const double k1 = key(probes[i + 1]);
    if (std::isinf(k0) && std::isinf(k1)) continue;
    if (!((k0 - k) * (k1 - k) <= 0) && !(std::isinf(k0) != std::isinf(k1) && (k0 > k) != (k1 > k)))
      continue;
    double lo = ps[i], hi = ps[i + 1];
    std::optional<Probe> local;
    if (std::isfinite(k0)) local = probes[i];
    if (std::isfinite(k1) && (!local || std::abs(k1 - k) < std::abs(local->k - k))) local = probes[i + 1];
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Probe pm = probe(fam.at(mid), lambda);
      const double km = key(pm);
      if (std::isfinite(km) && (!local || std::abs(km - k) < std::abs(local->k - k))) local = pm;
      if (local && std::abs(local->k - k) <= kHit) break;
      if ((km > k) == (k0 > k)) {
        lo = mid;
        k0 = km;
      } else {
        hi = mid;
      }
    }
    if (local && (!best || std::abs(local->k - k) < std::abs(best->k - k))) best = local;
    if (best && std::abs(best->k - k) <= 1e-9) return best;
  }
  return best;
}

ModelSolution mirror(const ModelSolution& sol) {
  // v~(t) = -k v(-t) on (-b, -a) solves the same model when T is odd.
  const double k = sol.max_value();
  std::vector<Sample> out;
  out.reserve(sol.samples().size());
  for (auto it = sol.samples().rbegin(); it != sol.samples().rend(); ++it)
    out.push_back({-it->t, -k * it->v, k * it->dv});
  const double scale = -1.0 / out.front().v;
  for (Sample& s : out) {
    s.v *= scale;
    s.dv *= scale;
  }
  const auto [a, b] = sol.interval();
  return ModelSolution(sol.problem(), -b, -a, sol.lambda(), std::move(out));
}

}  // namespace

ModelSolution fit_model_solution(double K, double N, double lambda, double k) {
  require_positive_lambda(lambda);
  if (!(k > 0) || !std::isfinite(k)) throw DomainError("fit_model_solution: k must be positive");
  const bool finite = N < kInfinity;
  const double threshold = finite ? std::max(K * N / (N - 1), 0.0) : std::max(K, 0.0);
  if (!(lambda > threshold)) throw DomainError("fit_model_solution: lambda must exceed K N / (N - 1)");

  const double root = std::sqrt(lambda);
  const double ell = pi / root;
  std::vector<Family> families;

  if (finite) {
    const ModelSolution extreme = model_solution(K, N, lambda);
    const double m = extreme.max_value();
    if (k < m * (1 - 1e-9) || k > (1 + 1e-9) / m) {
      std::ostringstream os;
      os << "fit_model_solution: k=" << k << " outside [m, 1/m] = [" << m << ", " << 1 / m << "]";
      throw DomainError(os.str());
    }
    if (std::abs(k - m) <= 1e-11) return extreme;
    if (k > 1) return mirror(fit_model_solution(K, N, lambda, 1.0 / k));
    if (K == 0 && std::abs(k - 1) <= 1e-9) {
      const ModelProblem flat = ModelProblem::make(0, N, Chart::flat);
      return build_solution(flat, lambda, -0.5 * ell, 0.5 * ell);
    }
    if (K > 0) {
      const ModelProblem p = ModelProblem::make(K, N, Chart::tan);
      const double h = p.half_width();
      families.push_back({p, [p, h](double s) { return std::make_pair(p, -h + s * h); }});
    } else if (K == 0) {
      const ModelProblem p = ModelProblem::make(0, N, Chart::power);
      families.push_back({p, [p, ell](double s) {
                            return std::make_pair(p, s == 0 ? 0.0 : ell * std::pow(10.0, -4 + 10 * s));
                          }});
    } else {
      const ModelProblem pc = ModelProblem::make(K, N, Chart::coth);
      const ModelProblem pt = ModelProblem::make(K, N, Chart::tanh);
      const double far = 60.0 / pc.frequency() + 4 * ell;
      families.push_back({pc, [pc, far](double s) {
                            return std::make_pair(pc, s == 0 ? 0.0 : far * std::pow(10.0, -8 * (1 - s)));
                          }});
      families.push_back({pt, [pt, far](double s) { return std::make_pair(pt, -far + 2 * far * s); }});
    }
  } else if (K == 0) {
    if (std::abs(k - 1) <= 1e-12) {
      const ModelProblem flat = ModelProblem::make(0, N, Chart::constant, 0.0);
      return build_solution(flat, lambda, -0.5 * ell, 0.5 * ell);
    }
    const double cmax = 2 * root * (1 - 1e-9);
    families.push_back({ModelProblem::make(0, N, Chart::constant, 0.0), [N, cmax](double s) {
                          return std::make_pair(ModelProblem::make(0, N, Chart::constant, -cmax + 2 * cmax * s),
                                                0.0);
                        }});
  } else {
    const ModelProblem p = ModelProblem::make(K, N, Chart::linear);
    const double far = 4 * root / std::abs(K) + 4 * ell;
    families.push_back({p, [p, far](double s) { return std::make_pair(p, -far + 2 * far * s); }});
  }

  for (const Family& fam : families) {
    if (auto hit = search_family(fam, lambda, k)) {
      if (std::abs(hit->k - k) > 1e-8) continue;
      return build_solution(hit->problem, lambda, hit->a, hit->b);
    }
  }
  std::ostringstream os;
  os << "fit_model_solution: no interval with max " << k << " found";
  throw DomainError(os.str());
}

}  // namespace finsler::model1d
