#include "finsler/eigensolver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "finsler/error.hpp"

namespace finsler {

namespace {

constexpr int kMaxFastDim = 3;

// F*^2 and l^{-1} on raw arrays for small dimensions; falls back to dual_jet.
class DualEvaluator {
 public:
  explicit DualEvaluator(const NormSpec& norm) : norm_(norm), n_(norm.dim()) {
    if (n_ > kMaxFastDim) return;
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, norms::Euclidean>) {
            kind_ = Kind::euclidean;
          } else if constexpr (std::is_same_v<T, norms::Quadratic>) {
            kind_ = Kind::quadratic;
            load(f.A_inv);
          } else if constexpr (std::is_same_v<T, norms::Randers>) {
            kind_ = Kind::randers;
            load(f.A_inv);
            for (int i = 0; i < n_; ++i) w_[i] = f.w(i);
            one_minus_ = 1.0 - f.b_sq;
          } else {
            kind_ = Kind::two_slope;
            a_plus_ = f.a_plus;
            a_minus_ = f.a_minus;
          }
        },
        norm.family());
  }

  // Returns F*^2(xi) and writes l^{-1}(xi) into grad.
  double operator()(const double* xi, double* grad) const {
    switch (kind_) {
      case Kind::euclidean: {
        double s = 0;
        for (int i = 0; i < n_; ++i) {
          grad[i] = xi[i];
          s += xi[i] * xi[i];
        }
        return s;
      }
      case Kind::quadratic: {
        double s = 0;
        for (int i = 0; i < n_; ++i) {
          double g = 0;
          for (int j = 0; j < n_; ++j) g += a_inv_[i * n_ + j] * xi[j];
          grad[i] = g;
          s += g * xi[i];
        }
        return std::max(s, 0.0);
      }
      case Kind::randers: {
        double ax[kMaxFastDim];
        double q = 0, c = 0;
        for (int i = 0; i < n_; ++i) {
          double g = 0;
          for (int j = 0; j < n_; ++j) g += a_inv_[i * n_ + j] * xi[j];
          ax[i] = g;
          q += g * xi[i];
          c += w_[i] * xi[i];
        }
        const double root = std::sqrt(std::max(0.0, one_minus_ * std::max(q, 0.0) + c * c));
        if (root == 0.0) {
          std::fill(grad, grad + n_, 0.0);
          return 0.0;
        }
        const double value = (root - c) / one_minus_;
        for (int i = 0; i < n_; ++i)
          grad[i] = value * ((one_minus_ * ax[i] + c * w_[i]) / root - w_[i]) / one_minus_;
        return value * value;
      }
      case Kind::two_slope: {
        const double a = xi[0] >= 0 ? a_plus_ : a_minus_;
        grad[0] = xi[0] / (a * a);
        return xi[0] * xi[0] / (a * a);
      }
      case Kind::generic: {
        const DualJet jet = dual_jet(norm_, Covector(Eigen::Map<const Vector>(xi, n_)));
        for (int i = 0; i < n_; ++i) grad[i] = jet.gradient(i);
        return jet.dual_sq;
      }
    }
    return 0.0;
  }

 private:
  enum class Kind { euclidean, quadratic, randers, two_slope, generic };
  void load(const Matrix& A_inv) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) a_inv_[i * n_ + j] = A_inv(i, j);
  }

  const NormSpec& norm_;
  int n_;
  Kind kind_ = Kind::generic;
  std::array<double, kMaxFastDim * kMaxFastDim> a_inv_{};
  std::array<double, kMaxFastDim> w_{};
  double one_minus_ = 1;
  double a_plus_ = 1, a_minus_ = 1;
};

void require_sizes(const DiscreteDomain& domain, const NormSpec& norm, const Vector& u) {
  if (norm.dim() != domain.dim) throw DimensionError("norm dimension differs from the domain's");
  if (u.size() != domain.size()) throw DimensionError("node vector size differs from the node count");
}

Vector masses(const DiscreteDomain& domain) {
  return Eigen::Map<const Vector>(domain.node_measure.data(), domain.size());
}

double energy_value(const DiscreteDomain& domain, const DualEvaluator& dual, const Vector& u,
                    Vector* gradient) {
  const int n = domain.dim;
  double xi[16];
  double g[16];
  if (n > 16) throw DimensionError("dimension above 16 is not supported");
  double total = 0;
  if (gradient) gradient->setZero(domain.size());
  for (const Simplex& s : domain.simplices) {
    for (int k = 0; k < n; ++k) {
      const int a = s.axes[k];
      xi[a] = (u(s.vertices[k + 1]) - u(s.vertices[k])) / domain.spacing(a);
    }
    const double c = s.volume * s.weight;
    total += c * dual(xi, g);
    if (gradient) {
      for (int k = 0; k < n; ++k) {
        const int a = s.axes[k];
        const double f = 2 * c * g[a] / domain.spacing(a);
        (*gradient)(s.vertices[k + 1]) += f;
        (*gradient)(s.vertices[k]) -= f;
      }
    }
  }
  return total;
}

double m_dot(const Vector& m, const Vector& a, const Vector& b) { return (m.array() * a.array() * b.array()).sum(); }

void remove_mean(const Vector& m, double m_total, Vector& v) { v.array() -= m.dot(v) / m_total; }

}  // namespace

Covector discrete_gradient(const DiscreteDomain& domain, const Vector& u, int node) {
  return local_jet(domain, u, node).gradient;
}

LocalJet local_jet(const DiscreteDomain& domain, const Vector& u, int node) {
  if (u.size() != domain.size()) throw DimensionError("node vector size differs from the node count");
  if (node < 0 || node >= domain.size()) throw DimensionError("node index out of range");
  // u(j) - u(i) ~ xi.d + d^T H d / 2 over the stencil; unknowns xi and the upper triangle of H
  const int n = domain.dim;
  const int unknowns = n + n * (n + 1) / 2;
  const auto& entries = domain.stencil[node];
  Matrix design(static_cast<Eigen::Index>(entries.size()), unknowns);
  Vector rhs(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t r = 0; r < entries.size(); ++r) {
    const Vector& d = domain.offsets[entries[r].offset];
    const auto row = static_cast<Eigen::Index>(r);
    for (int a = 0; a < n; ++a) design(row, a) = d(a);
    int col = n;
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) design(row, col++) = (a == b ? 0.5 : 1.0) * d(a) * d(b);
    rhs(row) = u(entries[r].neighbor) - u(node);
  }
  // column scaling keeps the gradient and Hessian blocks comparably conditioned
  const double h = domain.max_spacing();
  for (int c = n; c < unknowns; ++c) design.col(c) /= h;
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  LocalJet jet;
  if (qr.rank() < unknowns) {
    // too few neighbours for the quadratic term: plain linear fit
    Eigen::ColPivHouseholderQR<Matrix> linear(design.leftCols(n));
    if (linear.rank() < n) throw SolverError("discrete_gradient: rank-deficient stencil");
    jet.gradient = Covector(linear.solve(rhs));
    jet.hessian = Matrix::Zero(n, n);
    return jet;
  }
  Vector coef = qr.solve(rhs);
  for (int c = n; c < unknowns; ++c) coef(c) /= h;
  jet.gradient = Covector(coef.head(n));
  jet.hessian = Matrix::Zero(n, n);
  int col = n;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      jet.hessian(a, b) = coef(col);
      jet.hessian(b, a) = coef(col);
      ++col;
    }
  return jet;
}

Covector simplex_gradient(const DiscreteDomain& domain, const Simplex& simplex, const Vector& u) {
  Vector xi(domain.dim);
  for (int k = 0; k < domain.dim; ++k) {
    const int a = simplex.axes[k];
    xi(a) = (u(simplex.vertices[k + 1]) - u(simplex.vertices[k])) / domain.spacing(a);
  }
  return Covector(std::move(xi));
}

double weighted_mean(const DiscreteDomain& domain, const Vector& u) {
  const Vector m = masses(domain);
  return m.dot(u) / m.sum();
}

Energy dirichlet_energy(const DiscreteDomain& domain, const NormSpec& norm, const Vector& u,
                        bool with_gradient) {
  require_sizes(domain, norm, u);
  const DualEvaluator dual(norm);
  Energy e;
  e.value = energy_value(domain, dual, u, with_gradient ? &e.gradient : nullptr);
  return e;
}

double rayleigh_quotient(const DiscreteDomain& domain, const NormSpec& norm, const Vector& u) {
  require_sizes(domain, norm, u);
  const Vector m = masses(domain);
  const Vector centered = u.array() - m.dot(u) / m.sum();
  const double denom = m_dot(m, centered, centered);
  if (!(denom > 1e-300 * std::max(1.0, u.squaredNorm())))
    throw DomainError("rayleigh_quotient: u is constant");
  return dirichlet_energy(domain, norm, u, false).value / denom;
}

double weak_residual(const DiscreteDomain& domain, const NormSpec& norm, const Vector& u,
                     double lambda) {
  const Energy e = dirichlet_energy(domain, norm, u, true);
  const Vector m = masses(domain);
  const Vector mass_term = lambda * (m.array() * u.array()).matrix();
  const double scale = mass_term.cwiseAbs().maxCoeff();
  if (!(scale > 0)) return 0.0;
  return (0.5 * e.gradient - mass_term).cwiseAbs().maxCoeff() / scale;
}

EigenResult minimize_rayleigh(const DiscreteDomain& domain, const NormSpec& norm, std::uint64_t seed,
                              const MinimizeOptions& options) {
  Vector start(domain.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < domain.size(); ++i) start(i) = domain.nodes[i](0) + 1e-3 * gauss(rng);
  EigenResult r = minimize_rayleigh_from(domain, norm, std::move(start), options);
  r.seed = seed;
  return r;
}

EigenResult minimize_rayleigh_from(const DiscreteDomain& domain, const NormSpec& norm, Vector u,
                                   const MinimizeOptions& options) {
  require_sizes(domain, norm, u);
  if (domain.size() < 3) throw DomainError("minimize_rayleigh: need at least 3 nodes");
  const DualEvaluator dual(norm);
  const Vector m = masses(domain);
  const double m_total = m.sum();

  auto normalize = [&](Vector& v) {
    remove_mean(m, m_total, v);
    const double nrm = std::sqrt(m_dot(m, v, v));
    if (!(nrm > 0)) throw DomainError("minimize_rayleigh: starting vector is constant");
    v /= nrm;
  };
  normalize(u);

  Vector grad_e;
  double R = energy_value(domain, dual, u, &grad_e);
  // Riemannian gradient in the L2(m) metric
  auto riemannian = [&](const Vector& ge, const Vector& x, double rq) {
    Vector g = (ge.array() / m.array()).matrix() - 2 * rq * x;
    remove_mean(m, m_total, g);
    g -= m_dot(m, g, x) * x;
    return g;
  };
  Vector g = riemannian(grad_e, u, R);
  Vector d = -g;
  double g_sq = m_dot(m, g, g);

  std::vector<double> history{R};
  EigenResult result;
  int it = 0;
  Vector trial, trial_grad;
  for (; it < options.max_iterations; ++it) {
    double slope = m_dot(m, g, d);
    if (!(slope < 0)) {
      d = -g;
      slope = -g_sq;
    }
    if (!(slope < 0)) {
      result.converged = true;
      break;
    }
    // trial step from the 2x2 Rayleigh-Ritz problem on span{u, d}
    const double dd = m_dot(m, d, d);
    const double e_d = energy_value(domain, dual, d, nullptr);
    const double b = 0.5 * grad_e.dot(d) / std::sqrt(dd);
    const double c = e_d / dd;
    const double mid = 0.5 * (R + c);
    const double half_gap = std::sqrt(0.25 * (R - c) * (R - c) + b * b);
    const double mu = mid - half_gap;
    double alpha = 0;
    if (std::abs(b) > 0) alpha = ((mu - R) / b) / std::sqrt(dd);
    if (!(alpha > 0) || !std::isfinite(alpha)) alpha = 1e-3 / std::sqrt(dd);

    bool accepted = false;
    double R_new = R;
    for (int halving = 0; halving < 60; ++halving) {
      trial = u + alpha * d;
      normalize(trial);
      R_new = energy_value(domain, dual, trial, &trial_grad);
      if (R_new <= R + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (d.isApprox(-g)) {
        result.converged = true;  // no decrease left at working precision
        break;
      }
      d = -g;
      continue;
    }
    u.swap(trial);
    grad_e.swap(trial_grad);
    R = R_new;
    const Vector g_new = riemannian(grad_e, u, R);
    const double g_new_sq = m_dot(m, g_new, g_new);
    // transport the old direction and gradient by projection onto the new tangent space
    Vector d_t = d - m_dot(m, d, u) * u;
    Vector g_t = g - m_dot(m, g, u) * u;
    const double beta = std::max(0.0, (g_new_sq - m_dot(m, g_new, g_t)) / g_sq);
    d = -g_new + beta * d_t;
    g = g_new;
    g_sq = g_new_sq;

    history.push_back(R);
    const int k = static_cast<int>(history.size()) - 1;
    if (k >= options.stall_window &&
        history[k - options.stall_window] - R < options.stall_tolerance * R) {
      result.converged = true;
      ++it;
      break;
    }
    if (g_sq <= 1e-30 * R * R) {
      result.converged = true;
      ++it;
      break;
    }
  }
  result.lambda = R;
  result.history = std::move(history);
  result.iterations = it;
  result.residual = weak_residual(domain, norm, u, R);
  result.u = std::move(u);
  return result;
}

std::vector<double> dense_oracle(const DiscreteDomain& domain, const NormSpec& norm, int count) {
  if (!norm.is_quadratic())
    throw DomainError("dense_oracle: only euclidean and quadratic norms have a linear Laplacian");
  if (norm.dim() != domain.dim) throw DimensionError("norm dimension differs from the domain's");
  const int size = domain.size();
  if (size > 5000) throw DomainError("dense_oracle: more than 5000 nodes");
  const int n = domain.dim;
  Matrix A_inv = Matrix::Identity(n, n);
  if (const auto* q = std::get_if<norms::Quadratic>(&norm.family())) A_inv = q->A_inv;

  Matrix S = Matrix::Zero(size, size);
  Matrix G(n, n + 1);
  for (const Simplex& s : domain.simplices) {
    G.setZero();
    for (int k = 0; k < n; ++k) {
      const int a = s.axes[k];
      G(a, k + 1) += 1.0 / domain.spacing(a);
      G(a, k) -= 1.0 / domain.spacing(a);
    }
    const Matrix local = s.volume * s.weight * G.transpose() * A_inv * G;
    for (int p = 0; p <= n; ++p)
      for (int q = 0; q <= n; ++q) S(s.vertices[p], s.vertices[q]) += local(p, q);
  }
  const Vector inv_sqrt_m = masses(domain).array().rsqrt();
  const Matrix B = inv_sqrt_m.asDiagonal() * S * inv_sqrt_m.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(B, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("dense_oracle: eigensolver failed");
  const int k = std::min(count, size);
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + k);
  return out;
}

}  // namespace finsler
