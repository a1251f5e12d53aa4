#include "finsler/domain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>
#include <thread>

#include "finsler/error.hpp"

namespace finsler {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Row-major multi-index over a lattice with `extent[a]` points per axis.
struct Lattice {
  std::vector<int> extent;
  std::vector<long> stride;
  long total = 1;

  explicit Lattice(std::vector<int> ext) : extent(std::move(ext)), stride(extent.size()) {
    for (std::size_t a = extent.size(); a-- > 0;) {
      stride[a] = total;
      total *= extent[a];
    }
  }
  [[nodiscard]] bool inside(const std::vector<int>& idx) const {
    for (std::size_t a = 0; a < idx.size(); ++a)
      if (idx[a] < 0 || idx[a] >= extent[a]) return false;
    return true;
  }
  [[nodiscard]] long flat(const std::vector<int>& idx) const {
    long f = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) f += stride[a] * idx[a];
    return f;
  }
  [[nodiscard]] std::vector<int> unflat(long f) const {
    std::vector<int> idx(extent.size());
    for (std::size_t a = 0; a < extent.size(); ++a) {
      idx[a] = static_cast<int>(f / stride[a]);
      f %= stride[a];
    }
    return idx;
  }
};

// All integer offsets with max-norm in [1, r].
std::vector<std::vector<int>> offsets_up_to(int dim, int r) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(dim, -r);
  while (true) {
    if (std::any_of(cur.begin(), cur.end(), [](int c) { return c != 0; })) out.push_back(cur);
    int a = dim - 1;
    while (a >= 0 && cur[a] == r) cur[a--] = -r;
    if (a < 0) break;
    ++cur[a];
  }
  return out;
}

double factorial(int n) {
  double f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

std::vector<double> dijkstra(const DiscreteDomain& domain, const std::vector<double>& edge_weight,
                             int source) {
  if (source < 0 || source >= domain.size()) throw DimensionError("node index out of range");
  std::vector<double> dist(domain.nodes.size(), kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0;
  queue.push({0.0, source});
  while (!queue.empty()) {
    const auto [d, i] = queue.top();
    queue.pop();
    if (d > dist[i]) continue;
    for (const StencilEntry& e : domain.stencil[i]) {
      const double nd = d + edge_weight[e.offset];
      if (nd < dist[e.neighbor]) {
        dist[e.neighbor] = nd;
        queue.push({nd, e.neighbor});
      }
    }
  }
  return dist;
}

std::vector<double> offset_weights(const DiscreteDomain& domain, const NormSpec& norm, double sign) {
  if (norm.dim() != domain.dim) throw DimensionError("norm dimension differs from the domain's");
  std::vector<double> w(domain.offsets.size());
  for (std::size_t o = 0; o < w.size(); ++o) w[o] = norm_eval(norm, Vector(sign * domain.offsets[o]));
  return w;
}

// max over the Euclidean unit sphere of F.
double sphere_max(const NormSpec& norm) {
  const int n = norm.dim();
  if (n == 1) return std::max(norm_eval(norm, Vector::Ones(1)), norm_eval(norm, -Vector::Ones(1)));
  auto F = [&](const Vector& w) { return norm_eval(norm, w.normalized()); };
  Vector best;
  double best_val = -kInf;
  if (n == 2) {
    constexpr int kAngles = 7200;
    for (int k = 0; k < kAngles; ++k) {
      const double th = 2 * std::numbers::pi * k / kAngles;
      Vector w(2);
      w << std::cos(th), std::sin(th);
      if (const double f = F(w); f > best_val) {
        best_val = f;
        best = w;
      }
    }
  } else {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    for (int k = 0; k < 20000; ++k) {
      Vector w(n);
      for (int i = 0; i < n; ++i) w(i) = gauss(rng);
      if (w.isZero(0.0)) continue;
      if (const double f = F(w); f > best_val) {
        best_val = f;
        best = w.normalized();
      }
    }
  }
  // pattern-search polish
  for (double step = 0.05; step > 1e-13; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int i = 0; i < n; ++i)
        for (double s : {step, -step}) {
          Vector w = best;
          w(i) += s;
          w.normalize();
          if (const double f = F(w); f > best_val) {
            best_val = f;
            best = w;
            improved = true;
          }
        }
    }
  }
  return best_val;
}

}  // namespace

std::string shape_name(Shape shape) {
  switch (shape) {
    case Shape::interval: return "interval";
    case Shape::box: return "box";
    case Shape::ball: return "ball";
  }
  return "?";
}

Shape parse_shape(const std::string& name) {
  for (Shape s : {Shape::interval, Shape::box, Shape::ball})
    if (shape_name(s) == name) return s;
  throw DomainError("unknown shape '" + name + "'");
}

double Weight::psi(const Vector& x) const {
  return type == Type::gaussian ? 0.5 * kappa * x.squaredNorm() : 0.0;
}

double Weight::density(const Vector& x) const { return std::exp(-psi(x)); }

std::string Weight::name() const { return type == Type::gaussian ? "gaussian" : "lebesgue"; }

std::string CurvatureCertificate::provenance_name() const {
  switch (provenance) {
    case Provenance::minkowski_lebesgue: return "minkowski_lebesgue";
    case Provenance::gaussian_weight: return "gaussian_weight";
    case Provenance::user: return "user";
  }
  return "?";
}

int DomainSpec::dim() const {
  return shape == Shape::ball ? norm.dim() : static_cast<int>(lengths.size());
}

void DomainSpec::validate() const {
  if (!(resolution >= 4) || !std::isfinite(resolution))
    throw DomainError("resolution must be at least 4 cells per unit length");
  if (shape == Shape::ball) {
    if (!(radius > 0) || !std::isfinite(radius)) throw DomainError("ball radius must be positive");
  } else {
    if (lengths.empty()) throw DimensionError("box needs at least one edge length");
    if (shape == Shape::interval && lengths.size() != 1)
      throw DimensionError("interval takes exactly one length");
    for (double L : lengths)
      if (!(L > 0) || !std::isfinite(L)) throw DomainError("edge lengths must be positive");
  }
  if (norm.dim() != dim()) {
    std::ostringstream os;
    os << "norm dimension " << norm.dim() << " differs from domain dimension " << dim();
    throw DimensionError(os.str());
  }
  if (weight.type == Weight::Type::gaussian && !std::isfinite(weight.kappa))
    throw DomainError("gaussian kappa must be finite");
}

double DiscreteDomain::total_measure() const {
  return std::accumulate(node_measure.begin(), node_measure.end(), 0.0);
}

int DiscreteDomain::nearest_node(const Vector& x) const {
  int best = -1;
  double best_d = kInf;
  for (int i = 0; i < size(); ++i)
    if (const double d = (nodes[i] - x).squaredNorm(); d < best_d) {
      best_d = d;
      best = i;
    }
  return best;
}

DiscreteDomain build_domain(const DomainSpec& spec) {
  spec.validate();
  const int n = spec.dim();
  DiscreteDomain dom;
  dom.spec = spec;
  dom.dim = n;
  dom.spacing.resize(n);

  std::vector<int> cells(n);
  Vector origin(n);
  if (spec.shape == Shape::ball) {
    const int c = static_cast<int>(std::lround(spec.radius * spec.resolution));
    if (c < 1) throw DomainError("ball is empty at this resolution");
    for (int a = 0; a < n; ++a) {
      cells[a] = 2 * c;
      dom.spacing(a) = spec.radius / c;
      origin(a) = -spec.radius;
    }
  } else {
    for (int a = 0; a < n; ++a) {
      const double L = spec.lengths[a];
      cells[a] = static_cast<int>(std::lround(L * spec.resolution));
      if (cells[a] < 1) throw DomainError("domain is empty at this resolution");
      dom.spacing(a) = L / cells[a];
      origin(a) = spec.centered ? -0.5 * L : 0.0;
    }
  }
  std::vector<int> extent(n);
  for (int a = 0; a < n; ++a) extent[a] = cells[a] + 1;
  const Lattice lat(extent);

  auto point = [&](const std::vector<int>& idx) {
    Vector x(n);
    for (int a = 0; a < n; ++a) x(a) = origin(a) + idx[a] * dom.spacing(a);
    return x;
  };

  // candidate nodes
  std::vector<char> present(static_cast<std::size_t>(lat.total), 1);
  if (spec.shape == Shape::ball) {
    const double r2 = spec.radius * spec.radius * (1 + 1e-12);
    for (long f = 0; f < lat.total; ++f) present[f] = point(lat.unflat(f)).squaredNorm() <= r2;
  }

  // Kuhn simplices of every lattice cube with all vertices present
  std::vector<int> perm(n);
  std::vector<std::pair<std::vector<long>, std::vector<int>>> raw;
  std::vector<int> cube_extent(cells.begin(), cells.end());
  const Lattice cubes(cube_extent);
  for (long c = 0; c < cubes.total; ++c) {
    const std::vector<int> base = cubes.unflat(c);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<long> verts;
      verts.reserve(n + 1);
      std::vector<int> idx = base;
      verts.push_back(lat.flat(idx));
      bool ok = present[verts.back()];
      for (int k = 0; k < n && ok; ++k) {
        ++idx[perm[k]];
        verts.push_back(lat.flat(idx));
        ok = present[verts.back()];
      }
      if (ok) raw.emplace_back(std::move(verts), perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  if (raw.empty()) throw DomainError("domain contains no lattice cell at this resolution");

  // keep nodes that belong to a simplex
  std::vector<char> used(static_cast<std::size_t>(lat.total), 0);
  for (const auto& s : raw)
    for (long v : s.first) used[v] = 1;
  std::vector<int> id(static_cast<std::size_t>(lat.total), -1);
  for (long f = 0; f < lat.total; ++f)
    if (used[f]) {
      id[f] = static_cast<int>(dom.nodes.size());
      dom.nodes.push_back(point(lat.unflat(f)));
    }
  const int count = dom.size();

  const double cell_volume = dom.spacing.prod();
  const double simplex_volume = cell_volume / factorial(n);
  dom.simplices.reserve(raw.size());
  for (const auto& [verts, axes] : raw) {
    Simplex s;
    s.axes = axes;
    Vector centroid = Vector::Zero(n);
    for (long v : verts) {
      s.vertices.push_back(id[v]);
      centroid += dom.nodes[id[v]];
    }
    centroid /= (n + 1);
    s.volume = simplex_volume;
    s.weight = spec.weight.density(centroid);
    dom.simplices.push_back(std::move(s));
  }

  // node measure
  dom.node_measure.assign(count, 0.0);
  if (spec.shape == Shape::ball) {
    for (const Simplex& s : dom.simplices)
      for (int v : s.vertices) dom.node_measure[v] += s.volume / (n + 1);
  } else {
    for (long f = 0; f < lat.total; ++f) {
      if (id[f] < 0) continue;
      const std::vector<int> idx = lat.unflat(f);
      double vol = cell_volume;
      for (int a = 0; a < n; ++a)
        if (idx[a] == 0 || idx[a] == cells[a]) vol *= 0.5;
      dom.node_measure[id[f]] = vol;
    }
  }
  for (int i = 0; i < count; ++i) dom.node_measure[i] *= spec.weight.density(dom.nodes[i]);

  // radius-2 stencil and boundary flags
  const auto offs = offsets_up_to(n, 2);
  for (const auto& o : offs) {
    Vector d(n);
    for (int a = 0; a < n; ++a) d(a) = o[a] * dom.spacing(a);
    dom.offsets.push_back(std::move(d));
  }
  dom.stencil.resize(count);
  dom.boundary.assign(count, false);
  for (long f = 0; f < lat.total; ++f) {
    if (id[f] < 0) continue;
    const int i = id[f];
    const std::vector<int> idx = lat.unflat(f);
    std::vector<int> nb(n);
    for (std::size_t o = 0; o < offs.size(); ++o) {
      for (int a = 0; a < n; ++a) nb[a] = idx[a] + offs[o][a];
      if (!lat.inside(nb)) continue;
      const int j = id[lat.flat(nb)];
      if (j >= 0) dom.stencil[i].push_back({j, static_cast<int>(o)});
    }
    for (int a = 0; a < n && !dom.boundary[i]; ++a)
      for (int s : {-1, 1}) {
        nb = idx;
        nb[a] += s;
        if (!lat.inside(nb) || id[lat.flat(nb)] < 0) dom.boundary[i] = true;
      }
  }
  return dom;
}

std::vector<double> distances_from(const DiscreteDomain& domain, const NormSpec& norm, int source) {
  return dijkstra(domain, offset_weights(domain, norm, 1.0), source);
}

std::vector<double> distances_to(const DiscreteDomain& domain, const NormSpec& norm, int target) {
  // a path x -> target reversed is a path target -> x over negated displacements
  return dijkstra(domain, offset_weights(domain, norm, -1.0), target);
}

double asymmetric_distance(const DiscreteDomain& domain, const NormSpec& norm, int x, int y) {
  if (y < 0 || y >= domain.size()) throw DimensionError("node index out of range");
  const double d = distances_from(domain, norm, x)[y];
  if (!std::isfinite(d)) throw SolverError("nodes are not connected");
  return d;
}

double diameter(const DiscreteDomain& domain, const NormSpec& norm, int threads) {
  const std::vector<double> w = offset_weights(domain, norm, 1.0);
  const int count = domain.size();
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, count);
  std::vector<double> partial(threads, 0.0);
  std::vector<char> disconnected(threads, 0);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (int s = t; s < count; s += threads) {
        for (double d : dijkstra(domain, w, s)) {
          if (!std::isfinite(d)) disconnected[t] = 1;
          else partial[t] = std::max(partial[t], d);
        }
      }
    });
  for (auto& th : pool) th.join();
  if (std::any_of(disconnected.begin(), disconnected.end(), [](char c) { return c != 0; }))
    throw SolverError("diameter: domain graph is disconnected");
  return *std::max_element(partial.begin(), partial.end());
}

double analytic_diameter(const DomainSpec& spec) {
  spec.validate();
  const int n = spec.dim();
  if (spec.shape == Shape::ball) return 2 * spec.radius * sphere_max(spec.norm);
  double best = 0;
  const int corners = 1 << n;
  for (int p = 0; p < corners; ++p)
    for (int q = 0; q < corners; ++q) {
      Vector d(n);
      for (int a = 0; a < n; ++a) d(a) = spec.lengths[a] * (((q >> a) & 1) - ((p >> a) & 1));
      best = std::max(best, norm_eval(spec.norm, d));
    }
  return best;
}

CurvatureCertificate curvature_certificate(const DomainSpec& spec) {
  if (spec.certificate) {
    CurvatureCertificate c = *spec.certificate;
    c.provenance = CurvatureCertificate::Provenance::user;
    return c;
  }
  const int n = spec.dim();
  CurvatureCertificate c;
  if (spec.weight.type == Weight::Type::lebesgue) {
    c.K = 0;
    // the model operator needs N > 1; in one dimension Ric_N >= 0 holds for every N
    c.N = n == 1 ? kInf : n;
    c.provenance = CurvatureCertificate::Provenance::minkowski_lebesgue;
  } else {
    if (!std::holds_alternative<norms::Euclidean>(spec.norm.family()))
      throw DomainError("no built-in curvature certificate for a " + spec.norm.family_name() +
                        " norm with a gaussian weight; supply a certificate {K, N} in the case");
    c.K = spec.weight.kappa;
    c.N = kInf;
    c.provenance = CurvatureCertificate::Provenance::gaussian_weight;
  }
  if (c.N < n) throw DomainError("certificate N below the dimension");
  return c;
}

}  // namespace finsler
