#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quiverml/io.hpp"

namespace qml {

struct CheckResult {
  std::string name;
  bool passed = false;
  double deviation = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

nlohmann::json to_json(const CheckResult& r);

/// Runs the invariant suites on the configured quiver and algorithm:
/// equivariance, recursion_vs_pathsum, gradient_fd, grassmann_roundtrip,
/// hyperbolic_sigma, reineke_dimension. Tolerances are multiplied by
/// `tolerance_scale`.
std::vector<CheckResult> run_checks(const RunConfig& cfg, std::uint64_t seed,
                                    double tolerance_scale = 1.0);

CheckResult check_equivariance(const RunConfig& cfg, std::uint64_t seed, double tol);
CheckResult check_recursion_vs_pathsum(const RunConfig& cfg, std::uint64_t seed, double tol);
CheckResult check_gradient_fd(const RunConfig& cfg, std::uint64_t seed, double tol);
CheckResult check_grassmann_roundtrip(const RunConfig& cfg, std::uint64_t seed, double tol);
CheckResult check_hyperbolic_sigma(std::uint64_t seed, double tol);
CheckResult check_reineke_dimension(const RunConfig& cfg, std::uint64_t seed);

}  // namespace qml
