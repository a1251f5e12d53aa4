#pragma once

// End-to-end checks of the spectral gap lower bound and the two comparison
// statements on configured cases, plus report emission.

#include <filesystem>
#include <string>
#include <vector>

#include "finsler/config.hpp"
#include "finsler/domain.hpp"
#include "finsler/eigensolver.hpp"
#include "finsler/model1d.hpp"

namespace finsler {

enum class Verdict { holds, holds_within_tol, violated };
[[nodiscard]] std::string verdict_name(Verdict v);

struct ResolutionRun {
  double resolution = 0;
  int nodes = 0;
  double lambda = 0;
  double residual = 0;
  int iterations = 0;
  bool converged = false;
};

struct BoundReport {
  std::string id;
  double lambda_numeric = 0;
  std::vector<ResolutionRun> runs;  // ascending resolution; the last one is used
  double diameter_used = 0;
  std::string diameter_source;      // "analytic" or "graph"
  double graph_diameter = 0;        // coarsest grid; NaN when skipped
  double geometric_error = 0;       // |graph - analytic| / analytic; NaN when skipped
  CurvatureCertificate certificate;
  double bound = 0;
  double margin = 0;
  double discretization_tolerance = 0;
  Verdict verdict = Verdict::violated;
};

enum class CheckStatus { pass, fail, inconclusive };
[[nodiscard]] std::string status_name(CheckStatus s);

struct ComparisonReport {
  CheckStatus status = CheckStatus::inconclusive;
  double fraction = 0;          // nodes satisfying the inequality within tolerance
  double worst_violation = 0;   // largest lhs - rhs (<= 0 when every node satisfies it exactly)
  double tolerance = 0;
  int nodes_tested = 0;
  double max_equality_gap = 0;  // max |lhs - rhs|, gradient check only
  double observed = 0;          // max u (maxima), k (gradient)
  double reference = 0;         // m_{K,N} (maxima)
  bool flipped = false;
  double shrink = 0;
  std::string note;
};

struct LichnerowiczReport {
  bool applicable = false;  // K > 0
  double threshold = 0;     // NK/(N-1), or K for N = inf
  bool holds = false;       // lambda_numeric >= threshold - tol
  bool model_holds = false; // lambda_1(K, N, d) >= threshold - 1e-8
};

/// Everything computed for one case.
struct CaseRun {
  CaseConfig config;
  DiscreteDomain domain;  // finest grid
  EigenResult eigen;      // finest grid
  BoundReport bound;
};

/// Eigenvalues at each resolution (a half-resolution run is added when only
/// one is configured), diameter, certificate and the model bound.
[[nodiscard]] CaseRun verify_bound(const CaseConfig& config);

/// Affine normalization of u: min -1, max k <= 1. A flip (u -> -u) is
/// recorded; gradients of the flipped function are measured with the
/// reversed norm, so F*(Du) / scale is compared in both cases.
struct Normalized {
  Vector w;
  double scale = 1;
  bool flipped = false;
};
[[nodiscard]] Normalized normalize_eigenfunction(const Vector& u);

[[nodiscard]] ComparisonReport check_gradient_comparison(const CaseRun& run);
[[nodiscard]] ComparisonReport check_maxima(const CaseRun& run);
[[nodiscard]] LichnerowiczReport lichnerowicz_check(const CurvatureCertificate& certificate,
                                                    double lambda_numeric, double tolerance,
                                                    double diameter);

struct CaseReport {
  std::string id;
  bool errored = false;
  std::string error;
  BoundReport bound;
  ComparisonReport gradient;
  ComparisonReport maxima;
  LichnerowiczReport lichnerowicz;
  std::vector<std::string> csv_lines;  // eigenfunction dump
};

[[nodiscard]] CaseReport run_case(const CaseConfig& config);

struct SuiteReport {
  std::vector<CaseReport> cases;  // ordered by id
  [[nodiscard]] bool any_violated() const;
};

/// Runs every case of a suite document; malformed cases are reported as errored.
[[nodiscard]] SuiteReport run_suite(const Json& suite, int jobs = 1);

[[nodiscard]] Json to_json(const CaseReport& report);
[[nodiscard]] Json to_json(const SuiteReport& report);

/// Writes summary.json and case-<id>.csv into `out` (created if missing).
void write_reports(const SuiteReport& report, const std::filesystem::path& out);

}  // namespace finsler
