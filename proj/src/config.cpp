#include "finsler/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "finsler/error.hpp"

namespace finsler {

namespace {

Matrix parse_matrix(const Json& j, int dim) {
  std::vector<double> flat;
  if (!j.is_array()) throw DomainError("matrix must be an array");
  if (!j.empty() && j.front().is_array()) {
    for (const Json& row : j)
      for (const Json& x : row) flat.push_back(x.get<double>());
  } else {
    for (const Json& x : j) flat.push_back(x.get<double>());
  }
  if (dim <= 0) dim = static_cast<int>(std::lround(std::sqrt(static_cast<double>(flat.size()))));
  if (static_cast<std::size_t>(dim) * dim != flat.size())
    throw DimensionError("matrix A must have dim*dim entries");
  Matrix A(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) A(r, c) = flat[static_cast<std::size_t>(r * dim + c)];
  return A;
}

Vector parse_vector(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

double parse_extended_real(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity" || s == "Infinity") return std::numeric_limits<double>::infinity();
  }
  throw DomainError("expected a number or \"inf\", got " + j.dump());
}

Json extended_real_json(double x) {
  if (std::isinf(x) && x > 0) return "inf";
  return x;
}

NormSpec parse_norm(const Json& j) {
  const std::string family = j.at("family").get<std::string>();
  const int dim = j.value("dim", 0);
  const Json params = j.value("params", Json::object());
  if (family == "euclidean") return NormSpec::euclidean(dim > 0 ? dim : 1);
  if (family == "quadratic") return NormSpec::quadratic(parse_matrix(params.at("A"), dim));
  if (family == "randers") {
    const Vector b = parse_vector(params.at("b"));
    Matrix A = params.contains("A") ? parse_matrix(params.at("A"), static_cast<int>(b.size()))
                                    : Matrix::Identity(b.size(), b.size());
    if (dim > 0 && dim != A.rows()) throw DimensionError("randers: dim differs from the size of A");
    return NormSpec::randers(A, b);
  }
  if (family == "two_slope") {
    if (dim > 1) throw DimensionError("two_slope norms are one-dimensional");
    return NormSpec::two_slope(params.at("a_plus").get<double>(), params.at("a_minus").get<double>());
  }
  throw DomainError("unknown norm family '" + family + "'");
}

Json to_json(const NormSpec& norm) {
  Json j;
  j["family"] = norm.family_name();
  j["dim"] = norm.dim();
  auto matrix = [](const Matrix& A) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
      Json row = Json::array();
      for (Eigen::Index c = 0; c < A.cols(); ++c) row.push_back(A(r, c));
      rows.push_back(row);
    }
    return rows;
  };
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, norms::Quadratic>) {
          j["params"]["A"] = matrix(f.A);
        } else if constexpr (std::is_same_v<T, norms::Randers>) {
          j["params"]["A"] = matrix(f.A);
          j["params"]["b"] = std::vector<double>(f.b.data(), f.b.data() + f.b.size());
        } else if constexpr (std::is_same_v<T, norms::TwoSlope>) {
          j["params"]["a_plus"] = f.a_plus;
          j["params"]["a_minus"] = f.a_minus;
        }
      },
      norm.family());
  return j;
}

CurvatureCertificate parse_certificate(const Json& j) {
  CurvatureCertificate c;
  c.K = j.at("K").get<double>();
  c.N = parse_extended_real(j.at("N"));
  c.provenance = CurvatureCertificate::Provenance::user;
  if (!std::isfinite(c.K)) throw DomainError("certificate K must be finite");
  if (!(c.N > 1)) throw DomainError("certificate N must exceed 1");
  return c;
}

CaseConfig parse_case(const Json& j) {
  CaseConfig c;
  c.id = j.at("id").get<std::string>();
  if (c.id.empty()) throw DomainError("case id must not be empty");
  const Json& dom = j.at("domain");
  DomainSpec& spec = c.domain;
  spec.shape = parse_shape(dom.at("shape").get<std::string>());
  if (spec.shape == Shape::ball) {
    spec.radius = dom.at("radius").get<double>();
  } else if (dom.contains("lengths")) {
    spec.lengths = dom.at("lengths").get<std::vector<double>>();
  } else {
    spec.lengths = {dom.at("length").get<double>()};
  }
  spec.centered = dom.value("centered", false);
  spec.norm = parse_norm(j.at("norm"));
  if (j.contains("weight")) {
    const Json& w = j.at("weight");
    const std::string type = w.at("type").get<std::string>();
    if (type == "lebesgue") spec.weight = Weight::lebesgue();
    else if (type == "gaussian") spec.weight = Weight::gaussian(w.at("kappa").get<double>());
    else throw DomainError("unknown weight type '" + type + "'");
  }
  if (j.contains("certificate") && !j.at("certificate").is_null())
    spec.certificate = parse_certificate(j.at("certificate"));
  if (j.contains("resolutions")) c.resolutions = j.at("resolutions").get<std::vector<double>>();
  else c.resolutions = {j.at("resolution").get<double>()};
  if (c.resolutions.empty()) throw DomainError("case needs at least one resolution");
  spec.resolution = c.resolutions.back();
  c.seed = j.value("seed", std::uint64_t{1});
  for (double r : c.resolutions) {
    spec.resolution = r;
    spec.validate();
  }
  return c;
}

std::vector<CaseConfig> parse_suite(const Json& j) {
  std::vector<CaseConfig> out;
  if (j.contains("cases")) {
    for (const Json& c : j.at("cases")) out.push_back(parse_case(c));
  } else {
    out.push_back(parse_case(j));
  }
  return out;
}

ModelTableConfig parse_model_table(const Json& j) {
  ModelTableConfig t;
  for (const Json& x : j.at("K")) t.K.push_back(x.get<double>());
  for (const Json& x : j.at("N")) t.N.push_back(parse_extended_real(x));
  for (const Json& x : j.at("d")) t.d.push_back(x.get<double>());
  return t;
}

}  // namespace finsler
