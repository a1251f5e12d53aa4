#pragma once

// JSON case and suite configuration.
//
// A case:
//   {"id": "box-euclid",
//    "domain": {"shape": "box", "lengths": [1, 1], "centered": false},   // or "radius" for a ball
//    "norm": {"family": "quadratic", "dim": 2, "params": {"A": [[1, 0], [0, 4]]}},
//    "weight": {"type": "gaussian", "kappa": 1},
//    "certificate": {"K": 0, "N": "inf"},                                  // optional
//    "resolutions": [20, 40], "seed": 1}
// A suite is {"cases": [case, ...]}.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "finsler/domain.hpp"
#include "finsler/norms.hpp"

namespace finsler {

using Json = nlohmann::json;

struct CaseConfig {
  std::string id;
  DomainSpec domain;  // resolution is taken from `resolutions`
  std::vector<double> resolutions;
  std::uint64_t seed = 1;
};

struct ModelTableConfig {
  std::vector<double> K;
  std::vector<double> N;
  std::vector<double> d;
};

/// Reads and parses a JSON file. Throws std::runtime_error with the path on failure.
[[nodiscard]] Json load_json(const std::filesystem::path& path);

[[nodiscard]] NormSpec parse_norm(const Json& j);
[[nodiscard]] Json to_json(const NormSpec& norm);
[[nodiscard]] CurvatureCertificate parse_certificate(const Json& j);
[[nodiscard]] CaseConfig parse_case(const Json& j);
/// Accepts {"cases": [...]} or a single case object.
[[nodiscard]] std::vector<CaseConfig> parse_suite(const Json& j);
[[nodiscard]] ModelTableConfig parse_model_table(const Json& j);

/// Real number or the strings "inf" / "infinity".
[[nodiscard]] double parse_extended_real(const Json& j);
/// Numbers as-is, +infinity as "inf".
[[nodiscard]] Json extended_real_json(double x);

}  // namespace finsler
