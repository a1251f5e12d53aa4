#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "finsler/config.hpp"
#include "finsler/domain.hpp"
#include "finsler/eigensolver.hpp"
#include "finsler/harness.hpp"
#include "finsler/model1d.hpp"

using namespace finsler;

namespace {

double parse_N(const std::string& s) {
  if (s == "inf" || s == "infinity") return model1d::kInfinity;
  return std::stod(s);
}

CaseConfig first_case(const std::string& path) {
  const auto cases = parse_suite(load_json(path));
  if (cases.empty()) throw std::runtime_error(path + ": no case");
  return cases.front();
}

DomainSpec finest(const CaseConfig& c) {
  DomainSpec spec = c.domain;
  spec.resolution = *std::max_element(c.resolutions.begin(), c.resolutions.end());
  return spec;
}

void print_suite(const SuiteReport& report) {
  for (const CaseReport& c : report.cases) {
    if (c.errored) {
      std::printf("%-24s errored  %s\n", c.id.c_str(), c.error.c_str());
      continue;
    }
    const BoundReport& b = c.bound;
    std::printf("%-24s lambda=%.8g bound=%.8g margin=%.3e tol=%.3e %s  gradient=%s maxima=%s\n",
                c.id.c_str(), b.lambda_numeric, b.bound, b.margin, b.discretization_tolerance,
                verdict_name(b.verdict).c_str(), status_name(c.gradient.status).c_str(),
                status_name(c.maxima.status).c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral gap bounds for Finsler measure spaces"};
  app.require_subcommand(1);

  double K = 0, d = 1;
  std::string N_text = "inf";
  auto* model_eig = app.add_subcommand("model-eig", "first Neumann eigenvalue of the 1-D model");
  model_eig->add_option("--K", K, "curvature lower bound")->required();
  model_eig->add_option("--N", N_text, "dimension bound (number or inf)")->required();
  model_eig->add_option("--d", d, "diameter")->required();

  std::string config_path, out_path;
  auto* model_table = app.add_subcommand("model-table", "lambda_1(K, N, d) over a grid");
  model_table->add_option("--config", config_path, "JSON with arrays K, N, d")->required()->check(CLI::ExistingFile);
  model_table->add_option("--out", out_path, "CSV output (stdout when omitted)");

  std::string spec_path;
  auto* geom = app.add_subcommand("geom", "node count, measure and diameters of a case domain");
  geom->add_option("--spec", spec_path, "case file")->required()->check(CLI::ExistingFile);

  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string dump_path;
  auto* solve = app.add_subcommand("solve", "first eigenvalue of a case at its finest resolution");
  solve->add_option("--spec", spec_path, "case file")->required()->check(CLI::ExistingFile);
  solve->add_option("--seed", seed, "initialization seed")->each([&](const std::string&) { seed_given = true; });
  solve->add_option("--dump-u", dump_path, "write node coordinates and u as CSV");

  auto* verify = app.add_subcommand("verify", "bound and comparison checks for one case");
  verify->add_option("--spec", spec_path, "case file")->required()->check(CLI::ExistingFile);
  verify->add_option("--out", out_path, "report directory")->required();

  int jobs = 1;
  auto* suite = app.add_subcommand("suite", "run every case of a suite");
  suite->add_option("--config", config_path, "suite file")->required()->check(CLI::ExistingFile);
  suite->add_option("--out", out_path, "report directory")->required();
  suite->add_option("--jobs", jobs, "cases run in parallel")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*model_eig) {
      std::printf("%.12g\n", model1d::lambda1_model(K, parse_N(N_text), d));
      return 0;
    }
    if (*model_table) {
      const ModelTableConfig t = parse_model_table(load_json(config_path));
      std::ofstream file;
      if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::runtime_error("cannot write " + out_path);
      }
      std::ostream& os = out_path.empty() ? std::cout : file;
      os << "K,N,d,lambda1,note\n";
      for (double k : t.K)
        for (double n : t.N)
          for (double dd : t.d) {
            os << k << "," << (std::isinf(n) ? std::string("inf") : std::to_string(n)) << "," << dd << ",";
            try {
              char buf[64];
              std::snprintf(buf, sizeof buf, "%.12g", model1d::lambda1_model(k, n, dd));
              os << buf << ",\n";
            } catch (const std::exception& e) {
              os << "," << '"' << e.what() << '"' << "\n";
            }
          }
      return 0;
    }
    if (*geom) {
      const CaseConfig c = first_case(spec_path);
      const DomainSpec spec = finest(c);
      const DiscreteDomain dom = build_domain(spec);
      std::printf("nodes             %d\n", dom.size());
      std::printf("simplices         %zu\n", dom.simplices.size());
      std::printf("total measure     %.10g\n", dom.total_measure());
      std::printf("analytic diameter %.10g\n", analytic_diameter(spec));
      std::printf("graph diameter    %.10g\n", diameter(dom, spec.norm));
      return 0;
    }
    if (*solve) {
      const CaseConfig c = first_case(spec_path);
      const DomainSpec spec = finest(c);
      const DiscreteDomain dom = build_domain(spec);
      const EigenResult r = minimize_rayleigh(dom, spec.norm, seed_given ? seed : c.seed);
      std::printf("lambda     %.12g\nresidual   %.3e\niterations %d\nconverged  %s\n", r.lambda,
                  r.residual, r.iterations, r.converged ? "yes" : "no");
      if (!dump_path.empty()) {
        std::ofstream f(dump_path);
        if (!f) throw std::runtime_error("cannot write " + dump_path);
        for (int a = 0; a < dom.dim; ++a) f << "x" << a + 1 << ",";
        f << "u\n";
        f.precision(12);
        for (int i = 0; i < dom.size(); ++i) {
          for (int a = 0; a < dom.dim; ++a) f << dom.nodes[i](a) << ",";
          f << r.u(i) << "\n";
        }
      }
      return r.converged ? 0 : 2;
    }
    const Json doc = load_json(*verify ? spec_path : config_path);
    const SuiteReport report = run_suite(doc, *suite ? jobs : 1);
    write_reports(report, out_path);
    print_suite(report);
    return report.any_violated() ? 1 : 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
