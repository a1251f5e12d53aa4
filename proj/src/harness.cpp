#include "finsler/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "finsler/error.hpp"

namespace finsler {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kShrink = 1e-6;
constexpr double kMaximaTolerance = 1e-3;
constexpr double kModelFloorTolerance = 1e-8;
constexpr int kGraphDiameterMaxNodes = 4000;

// max_{|e| = 1} F*(e): converts Euclidean gradient errors into F* errors.
double dual_lipschitz(const NormSpec& norm) {
  const int n = norm.dim();
  double best = 0;
  auto probe = [&](Vector e) {
    e.normalize();
    best = std::max(best, dual_norm_eval(norm, Covector(std::move(e))));
  };
  if (n == 1) {
    probe(Vector::Ones(1));
    probe(-Vector::Ones(1));
  } else if (n == 2) {
    for (int k = 0; k < 720; ++k) {
      const double th = 2 * std::numbers::pi * k / 720;
      Vector e(2);
      e << std::cos(th), std::sin(th);
      probe(e);
    }
  } else {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    for (int k = 0; k < 4000; ++k) {
      Vector e(n);
      for (int i = 0; i < n; ++i) e(i) = gauss(rng);
      if (!e.isZero(0.0)) probe(e);
    }
  }
  return 1.01 * best;
}

bool above_model_threshold(const CurvatureCertificate& c, double lambda) {
  const bool finite = std::isfinite(c.N);
  const double threshold = finite ? std::max(c.K * c.N / (c.N - 1), 0.0) : std::max(c.K, 0.0);
  return lambda > threshold;
}

struct GradientDetail {
  ComparisonReport report;
  Vector w;
  std::vector<double> lhs;  // F*(Du) / scale, NaN where not evaluated
  std::vector<double> rhs;  // v'(v^{-1}(w)), NaN when no model solution
};

GradientDetail gradient_detail(const CaseRun& run) {
  GradientDetail out;
  ComparisonReport& rep = out.report;
  const DiscreteDomain& dom = run.domain;
  const NormSpec& norm = dom.spec.norm;
  const CurvatureCertificate& cert = run.bound.certificate;
  const double lambda = run.eigen.lambda;
  const int count = dom.size();

  const Normalized nz = normalize_eigenfunction(run.eigen.u);
  out.w = nz.w * (1 - kShrink);
  rep.flipped = nz.flipped;
  rep.shrink = kShrink;
  rep.observed = out.w.maxCoeff();
  out.lhs.assign(count, kNaN);
  out.rhs.assign(count, kNaN);

  double hess = 0;
  for (int i = 0; i < count; ++i) {
    const LocalJet jet = local_jet(dom, run.eigen.u, i);
    out.lhs[i] = dual_norm_eval(norm, jet.gradient) * (1 - kShrink) / nz.scale;
    if (!dom.boundary[i]) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(jet.hessian, Eigen::EigenvaluesOnly);
      hess = std::max(hess, es.eigenvalues().cwiseAbs().maxCoeff() / nz.scale);
    }
  }
  rep.tolerance = 5.0 * hess * dom.max_spacing() * dual_lipschitz(norm);

  if (!above_model_threshold(cert, lambda)) {
    rep.note = "lambda outside the range where a model solution exists";
    return out;
  }
  model1d::ModelSolution v;
  try {
    v = model1d::fit_model_solution(cert.K, cert.N, lambda, rep.observed);
  } catch (const std::exception& e) {
    rep.note = std::string("no model solution: ") + e.what();
    return out;
  }
  int tested = 0, ok = 0;
  double worst = -std::numeric_limits<double>::infinity();
  double gap = 0;
  for (int i = 0; i < count; ++i) {
    out.rhs[i] = v.slope_at_value(out.w(i));
    if (dom.boundary[i]) continue;
    const double diff = out.lhs[i] - out.rhs[i];
    ++tested;
    if (diff <= rep.tolerance) ++ok;
    worst = std::max(worst, diff);
    gap = std::max(gap, std::abs(diff));
  }
  rep.nodes_tested = tested;
  if (tested == 0) {
    rep.note = "no interior nodes";
    return out;
  }
  rep.fraction = static_cast<double>(ok) / tested;
  rep.worst_violation = worst;
  rep.max_equality_gap = gap;
  rep.status = rep.fraction >= 0.99 ? CheckStatus::pass : CheckStatus::fail;
  return out;
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "";
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

std::vector<std::string> eigenfunction_csv(const CaseRun& run, const GradientDetail& g) {
  const DiscreteDomain& dom = run.domain;
  std::vector<std::string> lines;
  std::ostringstream head;
  for (int a = 0; a < dom.dim; ++a) head << "x" << a + 1 << ",";
  head << "u,w,measure,boundary,gradient,model_slope";
  lines.push_back(head.str());
  for (int i = 0; i < dom.size(); ++i) {
    std::ostringstream os;
    for (int a = 0; a < dom.dim; ++a) os << csv_number(dom.nodes[i](a)) << ",";
    os << csv_number(run.eigen.u(i)) << "," << csv_number(g.w(i)) << ","
       << csv_number(dom.node_measure[i]) << "," << (dom.boundary[i] ? 1 : 0) << ","
       << csv_number(g.lhs[i]) << "," << csv_number(g.rhs[i]);
    lines.push_back(os.str());
  }
  return lines;
}

std::string file_safe(const std::string& id) {
  std::string s = id;
  for (char& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  return s;
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::holds_within_tol: return "holds_within_tol";
    case Verdict::violated: return "violated";
  }
  return "?";
}

std::string status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

CaseRun verify_bound(const CaseConfig& config) {
  CaseRun run;
  run.config = config;
  BoundReport& rep = run.bound;
  rep.id = config.id;

  std::vector<double> res = config.resolutions;
  std::sort(res.begin(), res.end());
  res.erase(std::unique(res.begin(), res.end()), res.end());
  if (res.empty()) throw DomainError("case " + config.id + ": no resolutions");
  if (res.size() == 1) {
    if (res.front() / 2 >= 4) res.insert(res.begin(), res.front() / 2);
    else res.push_back(res.front() * 2);
  }

  rep.certificate = curvature_certificate(config.domain);
  for (double r : res) {
    DomainSpec spec = config.domain;
    spec.resolution = r;
    run.domain = build_domain(spec);
    run.eigen = minimize_rayleigh(run.domain, spec.norm, config.seed);
    rep.runs.push_back({r, run.domain.size(), run.eigen.lambda, run.eigen.residual,
                        run.eigen.iterations, run.eigen.converged});
  }
  rep.lambda_numeric = run.eigen.lambda;
  const double previous = rep.runs[rep.runs.size() - 2].lambda;
  rep.discretization_tolerance = std::max(2 * std::abs(rep.lambda_numeric - previous), 1e-8);

  rep.diameter_used = analytic_diameter(config.domain);
  rep.diameter_source = "analytic";
  rep.graph_diameter = kNaN;
  rep.geometric_error = kNaN;
  {
    DomainSpec coarse = config.domain;
    coarse.resolution = res.front();
    const DiscreteDomain dom = build_domain(coarse);
    if (dom.size() <= kGraphDiameterMaxNodes) {
      rep.graph_diameter = diameter(dom, coarse.norm);
      rep.geometric_error = std::abs(rep.graph_diameter - rep.diameter_used) / rep.diameter_used;
    }
  }
  rep.bound = model1d::lambda1_model(rep.certificate.K, rep.certificate.N, rep.diameter_used);
  rep.margin = rep.lambda_numeric - rep.bound;
  if (rep.margin >= 0) rep.verdict = Verdict::holds;
  else if (rep.margin >= -rep.discretization_tolerance) rep.verdict = Verdict::holds_within_tol;
  else rep.verdict = Verdict::violated;
  return run;
}

Normalized normalize_eigenfunction(const Vector& u) {
  Normalized out;
  const double lo = u.minCoeff(), hi = u.maxCoeff();
  if (!(hi > lo)) throw DomainError("normalize_eigenfunction: u is constant");
  out.flipped = hi > -lo;
  const Vector s = out.flipped ? Vector(-u) : u;
  out.scale = -s.minCoeff();
  if (!(out.scale > 0)) throw DomainError("normalize_eigenfunction: u does not change sign");
  out.w = s / out.scale;
  return out;
}

ComparisonReport check_gradient_comparison(const CaseRun& run) { return gradient_detail(run).report; }

ComparisonReport check_maxima(const CaseRun& run) {
  ComparisonReport rep;
  const CurvatureCertificate& cert = run.bound.certificate;
  const double lambda = run.eigen.lambda;
  const Normalized nz = normalize_eigenfunction(run.eigen.u);
  rep.flipped = nz.flipped;
  rep.observed = nz.w.maxCoeff();
  rep.tolerance = kMaximaTolerance;
  if (!std::isfinite(cert.N)) {
    rep.note = "hypothesis needs finite N";
    return rep;
  }
  if (!(lambda > std::max(cert.K * cert.N / (cert.N - 1), 0.0))) {
    rep.note = "hypothesis lambda > max(KN/(N-1), 0) fails";
    return rep;
  }
  rep.reference = model1d::model_solution(cert.K, cert.N, lambda).max_value();
  rep.nodes_tested = run.domain.size();
  rep.worst_violation = rep.reference - rep.observed;
  rep.fraction = rep.observed >= rep.reference - kMaximaTolerance ? 1.0 : 0.0;
  rep.status = rep.fraction == 1.0 ? CheckStatus::pass : CheckStatus::fail;
  return rep;
}

LichnerowiczReport lichnerowicz_check(const CurvatureCertificate& c, double lambda_numeric,
                                      double tolerance, double diameter_value) {
  LichnerowiczReport rep;
  if (!(c.K > 0)) return rep;
  rep.applicable = true;
  rep.threshold = std::isfinite(c.N) ? c.N * c.K / (c.N - 1) : c.K;
  rep.holds = lambda_numeric >= rep.threshold - tolerance;
  const double d = std::min(diameter_value, model1d::max_diameter(c.K, c.N));
  rep.model_holds = model1d::lambda1_model(c.K, c.N, d) >= rep.threshold - kModelFloorTolerance;
  return rep;
}

CaseReport run_case(const CaseConfig& config) {
  CaseReport rep;
  rep.id = config.id;
  try {
    const CaseRun run = verify_bound(config);
    rep.bound = run.bound;
    const GradientDetail g = gradient_detail(run);
    rep.gradient = g.report;
    rep.maxima = check_maxima(run);
    rep.lichnerowicz = lichnerowicz_check(run.bound.certificate, run.bound.lambda_numeric,
                                          run.bound.discretization_tolerance, run.bound.diameter_used);
    rep.csv_lines = eigenfunction_csv(run, g);
  } catch (const std::exception& e) {
    rep.errored = true;
    rep.error = "case " + config.id + ": " + e.what();
  }
  return rep;
}

bool SuiteReport::any_violated() const {
  return std::any_of(cases.begin(), cases.end(), [](const CaseReport& c) {
    return !c.errored && c.bound.verdict == Verdict::violated;
  });
}

SuiteReport run_suite(const Json& suite, int jobs) {
  std::vector<Json> entries;
  if (suite.is_object() && suite.contains("cases")) {
    for (const Json& c : suite.at("cases")) entries.push_back(c);
  } else if (suite.is_object() && suite.contains("id")) {
    entries.push_back(suite);
  } else if (suite.is_array()) {
    for (const Json& c : suite) entries.push_back(c);
  }
  SuiteReport out;
  out.cases.resize(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      const Json& e = entries[i];
      std::string id = "case-" + std::to_string(i);
      if (e.is_object() && e.contains("id") && e.at("id").is_string()) id = e.at("id").get<std::string>();
      try {
        out.cases[i] = run_case(parse_case(e));
      } catch (const std::exception& ex) {
        out.cases[i].id = id;
        out.cases[i].errored = true;
        out.cases[i].error = "case " + id + ": " + ex.what();
      }
    }
  };
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(entries.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  std::stable_sort(out.cases.begin(), out.cases.end(),
                   [](const CaseReport& a, const CaseReport& b) { return a.id < b.id; });
  return out;
}

Json to_json(const CaseReport& r) {
  Json j;
  j["id"] = r.id;
  if (r.errored) {
    j["status"] = "errored";
    j["error"] = r.error;
    return j;
  }
  j["status"] = "ok";
  const BoundReport& b = r.bound;
  Json runs = Json::array();
  for (const ResolutionRun& run : b.runs)
    runs.push_back({{"resolution", run.resolution},
                    {"nodes", run.nodes},
                    {"lambda", run.lambda},
                    {"residual", run.residual},
                    {"iterations", run.iterations},
                    {"converged", run.converged}});
  j["bound"] = {{"lambda_numeric", b.lambda_numeric},
                {"runs", runs},
                {"diameter_used", b.diameter_used},
                {"diameter_source", b.diameter_source},
                {"graph_diameter", b.graph_diameter},
                {"geometric_error", b.geometric_error},
                {"certificate",
                 {{"K", b.certificate.K},
                  {"N", extended_real_json(b.certificate.N)},
                  {"provenance", b.certificate.provenance_name()}}},
                {"bound", b.bound},
                {"margin", b.margin},
                {"discretization_tolerance", b.discretization_tolerance},
                {"verdict", verdict_name(b.verdict)}};
  auto comparison = [](const ComparisonReport& c) {
    return Json{{"status", status_name(c.status)},
                {"fraction", c.fraction},
                {"worst_violation", c.worst_violation},
                {"tolerance", c.tolerance},
                {"nodes_tested", c.nodes_tested},
                {"max_equality_gap", c.max_equality_gap},
                {"observed", c.observed},
                {"reference", c.reference},
                {"flipped", c.flipped},
                {"shrink", c.shrink},
                {"note", c.note}};
  };
  j["gradient_comparison"] = comparison(r.gradient);
  j["maxima_comparison"] = comparison(r.maxima);
  j["lichnerowicz"] = {{"applicable", r.lichnerowicz.applicable},
                       {"threshold", r.lichnerowicz.threshold},
                       {"holds", r.lichnerowicz.holds},
                       {"model_holds", r.lichnerowicz.model_holds}};
  return j;
}

Json to_json(const SuiteReport& r) {
  Json cases = Json::array();
  for (const CaseReport& c : r.cases) cases.push_back(to_json(c));
  return Json{{"cases", cases}, {"any_violated", r.any_violated()}};
}

void write_reports(const SuiteReport& report, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  {
    std::ofstream f(out / "summary.json");
    if (!f) throw std::runtime_error("cannot write " + (out / "summary.json").string());
    f << to_json(report).dump(2) << "\n";
  }
  for (const CaseReport& c : report.cases) {
    if (c.csv_lines.empty()) continue;
    std::ofstream f(out / ("case-" + file_safe(c.id) + ".csv"));
    if (!f) throw std::runtime_error("cannot write case csv for " + c.id);
    for (const std::string& line : c.csv_lines) f << line << "\n";
  }
}

}  // namespace finsler
