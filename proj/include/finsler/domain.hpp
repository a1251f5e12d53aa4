#pragma once

// Lattice discretizations of convex flat domains carrying a Minkowski norm
// and a smooth weight m = exp(-Psi) dx.

#include <optional>
#include <string>
#include <vector>

#include "finsler/norms.hpp"

namespace finsler {

enum class Shape { interval, box, ball };

[[nodiscard]] std::string shape_name(Shape shape);
[[nodiscard]] Shape parse_shape(const std::string& name);

/// Psi of the weight: 0 (lebesgue) or kappa |x|^2 / 2 (gaussian).
struct Weight {
  enum class Type { lebesgue, gaussian };
  Type type = Type::lebesgue;
  double kappa = 0;

  static Weight lebesgue() { return {}; }
  static Weight gaussian(double kappa) { return {Type::gaussian, kappa}; }
  [[nodiscard]] double psi(const Vector& x) const;
  [[nodiscard]] double density(const Vector& x) const;
  [[nodiscard]] std::string name() const;
};

/// Ric_N >= K for the pair (norm, weight).
struct CurvatureCertificate {
  enum class Provenance { minkowski_lebesgue, gaussian_weight, user };
  double K = 0;
  double N = 0;  // may be +infinity
  Provenance provenance = Provenance::user;

  [[nodiscard]] std::string provenance_name() const;
};

struct DomainSpec {
  Shape shape = Shape::box;
  std::vector<double> lengths;  // interval/box edge lengths
  double radius = 0;            // ball
  bool centered = false;        // box/interval on [-L/2, L/2] instead of [0, L]
  NormSpec norm;
  Weight weight;
  double resolution = 10;       // cells per unit length
  std::optional<CurvatureCertificate> certificate;

  [[nodiscard]] int dim() const;
  /// Throws DomainError / DimensionError for inconsistent specs.
  void validate() const;
};

struct StencilEntry {
  int neighbor;
  int offset;  // index into DiscreteDomain::offsets
};

/// Kuhn simplex of a lattice cube: vertices[k+1] = vertices[k] + h e_{axes[k]}.
struct Simplex {
  std::vector<int> vertices;
  std::vector<int> axes;
  double volume = 0;
  double weight = 0;  // exp(-Psi) at the centroid
};

struct DiscreteDomain {
  DomainSpec spec;
  int dim = 0;
  Vector spacing;                               // lattice step per axis
  std::vector<Vector> nodes;
  std::vector<double> node_measure;
  std::vector<Vector> offsets;                  // stencil displacements, max-norm <= 2 steps
  std::vector<std::vector<StencilEntry>> stencil;
  std::vector<bool> boundary;
  std::vector<Simplex> simplices;

  [[nodiscard]] int size() const { return static_cast<int>(nodes.size()); }
  [[nodiscard]] double total_measure() const;
  [[nodiscard]] double max_spacing() const { return spacing.maxCoeff(); }
  [[nodiscard]] Vector displacement(const StencilEntry& e) const { return offsets[e.offset]; }
  /// Nearest node to a point (by Euclidean distance).
  [[nodiscard]] int nearest_node(const Vector& x) const;
};

/// Throws DomainError when the shape contains no lattice cell at the
/// requested resolution.
[[nodiscard]] DiscreteDomain build_domain(const DomainSpec& spec);

/// d(source, x) for every node x (Dijkstra on the stencil graph with edge
/// weight F(displacement)).
[[nodiscard]] std::vector<double> distances_from(const DiscreteDomain& domain, const NormSpec& norm,
                                                 int source);
/// d(x, target) for every node x.
[[nodiscard]] std::vector<double> distances_to(const DiscreteDomain& domain, const NormSpec& norm,
                                               int target);

/// Graph distance d(x, y). Throws SolverError when y is unreachable.
[[nodiscard]] double asymmetric_distance(const DiscreteDomain& domain, const NormSpec& norm, int x,
                                         int y);

/// max over ordered node pairs of the graph distance; sources are split over
/// `threads` workers (0: hardware concurrency).
[[nodiscard]] double diameter(const DiscreteDomain& domain, const NormSpec& norm, int threads = 0);

/// Exact diameter of the continuum shape: max F(y - x) over ordered vertex
/// pairs for boxes, 2R max_{|w|=1} F(w) for balls.
[[nodiscard]] double analytic_diameter(const DomainSpec& spec);

/// Certificate for supported (norm, weight) pairs, or the user certificate.
[[nodiscard]] CurvatureCertificate curvature_certificate(const DomainSpec& spec);

}  // namespace finsler
