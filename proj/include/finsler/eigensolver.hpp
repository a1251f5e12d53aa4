#pragma once

// First nonzero Neumann eigenvalue of the discrete Finsler-Laplacian by
// minimizing the Rayleigh quotient of P1 (Kuhn simplex) functions.

#include <cstdint>
#include <vector>

#include "finsler/domain.hpp"
#include "finsler/norms.hpp"

namespace finsler {

struct EigenResult {
  double lambda = 0;
  Vector u;              // weighted mean 0, unit L2(m) norm
  double residual = 0;   // normalized weak-form defect
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  std::vector<double> history;  // R after each accepted step, starting value first
};

/// Least-squares linear form xi with xi(disp(i->j)) + (Hessian term) ~
/// u(j) - u(i) over the stencil of node i. The quadratic term keeps the
/// one-sided fits at boundary nodes second order. Exact for affine u.
[[nodiscard]] Covector discrete_gradient(const DiscreteDomain& domain, const Vector& u, int node);

struct LocalJet {
  Covector gradient;
  Matrix hessian;
};
/// Gradient and Hessian of the local quadratic fit used by discrete_gradient.
[[nodiscard]] LocalJet local_jet(const DiscreteDomain& domain, const Vector& u, int node);

/// Gradient of u on a simplex (exact for the P1 interpolant).
[[nodiscard]] Covector simplex_gradient(const DiscreteDomain& domain, const Simplex& simplex,
                                        const Vector& u);

/// sum_i m_i u_i / sum_i m_i.
[[nodiscard]] double weighted_mean(const DiscreteDomain& domain, const Vector& u);

/// E(u) = sum_T |T| exp(-Psi(centroid)) F*^2(Du|_T) and, optionally, dE/du.
struct Energy {
  double value = 0;
  Vector gradient;
};
[[nodiscard]] Energy dirichlet_energy(const DiscreteDomain& domain, const NormSpec& norm,
                                      const Vector& u, bool with_gradient = true);

/// R(u) = E(u) / sum_i m_i (u_i - mean)^2. Throws DomainError for constant u.
[[nodiscard]] double rayleigh_quotient(const DiscreteDomain& domain, const NormSpec& norm,
                                       const Vector& u);

/// max_i |dE/du_i / 2 - lambda m_i u_i|, relative to max_i lambda m_i |u_i|.
[[nodiscard]] double weak_residual(const DiscreteDomain& domain, const NormSpec& norm,
                                   const Vector& u, double lambda);

struct MinimizeOptions {
  int max_iterations = 50000;
  double stall_tolerance = 1e-12;  // relative decrease of R over `stall_window` steps
  int stall_window = 10;
};

/// Nonlinear conjugate gradients on the mean-zero L2(m) sphere with Armijo
/// backtracking. Starts from x_1 - mean plus seeded 1e-3 noise.
[[nodiscard]] EigenResult minimize_rayleigh(const DiscreteDomain& domain, const NormSpec& norm,
                                            std::uint64_t seed, const MinimizeOptions& options = {});

/// Same, from a given starting vector.
[[nodiscard]] EigenResult minimize_rayleigh_from(const DiscreteDomain& domain, const NormSpec& norm,
                                                 Vector start, const MinimizeOptions& options = {});

/// Lowest `count` eigenvalues of the stiffness/mass pencil for quadratic
/// norms (the first is the constant mode). At most 5000 nodes.
[[nodiscard]] std::vector<double> dense_oracle(const DiscreteDomain& domain, const NormSpec& norm,
                                               int count = 5);

}  // namespace finsler
