#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quiverml/linalg.hpp"
#include "quiverml/quiver.hpp"
#include "quiverml/representation.hpp"

namespace qml {

enum class Preset { Compact, Euclidean, Hyperbolic };

/// Coefficients of the quadratic form
///   eps eps* + alpha b b* + sum_{gamma nontrivial} alpha_gamma (w_gamma e)(w_gamma e)*.
/// Paths missing from `path_coeffs` use `path_default`.
struct MetricSignature {
  double alpha = 1.0;
  double path_default = 1.0;
  std::map<std::string, double> path_coeffs;  ///< keyed by to_string(Path)

  static MetricSignature compact() { return uniform(1.0); }
  static MetricSignature euclidean() { return uniform(0.0); }
  static MetricSignature hyperbolic() { return uniform(-1.0); }
  static MetricSignature uniform(double s);
  static MetricSignature of(Preset p);

  /// True when every coefficient equals alpha.
  bool is_uniform() const;
  /// The common coefficient when uniform.
  std::optional<double> uniform_value() const;
  std::optional<Preset> preset() const;
  double coeff(const Path& p) const;
  std::string name() const;
};

std::string to_string(Preset p);
Preset preset_from_string(const std::string& s);

/// Throws ConfigError if some key of `path_coeffs` is not a nontrivial path.
void validate_signature(const MetricSignature& sig, const Quiver& q);

/// Evaluated metric at every vertex (indexed by vertex position).
struct MetricState {
  MetricSignature signature;
  std::vector<CMatrix> compact;  ///< rho_i rho_i*
  std::vector<CMatrix> form;     ///< the signature's quadratic form F_i
  std::vector<CMatrix> H;        ///< F_i^{-1}, Hermitian-symmetrized
};

/// rho_i: concatenation of w_gamma e^{t(gamma)} over paths into vertex `id`.
CMatrix rho(const FramedRep& p, int id);

/// The un-inverted quadratic form at vertex `id` assembled from paths.
CMatrix quadratic_form_pathsum(const FramedRep& p, int id, const MetricSignature& sig);

/// Inverse of the path-sum form. Throws SingularForm.
CMatrix metric_pathsum(const FramedRep& p, int id, const MetricSignature& sig);

/// All vertices by the topological recursion
///   C_i = e e* + sum_a w_a C_t w_a*,  F_i = eps eps* + s (b b* + sum_a w_a C_t w_a*)
/// for a uniform signature s. Throws SingularForm, or ConfigError for a
/// non-uniform signature.
MetricState metric_recursive(const FramedRep& p, const MetricSignature& sig);

/// Recursion for uniform signatures, path sums otherwise.
MetricState evaluate_metric(const FramedRep& p, const MetricSignature& sig);

struct DomainReport {
  bool ok = true;
  std::vector<double> min_eigenvalue;  ///< of F_i, per vertex position
  int failing_vertex = -1;             ///< first vertex id failing, or -1
};

/// Every F_i positive-definite (so H_i exists and is positive-definite).
DomainReport in_domain(const FramedRep& p, const MetricSignature& sig);

/// Directional derivative of every H_i along v.
std::vector<CMatrix> metric_tangent(const FramedRep& p, const MetricState& m,
                                    const RepDirection& v);

/// Pull back a cotangent on the H_i (one matrix per vertex) to (w, e).
RepDirection metric_vjp(const FramedRep& p, const MetricState& m,
                        const std::vector<CMatrix>& grad_H);

struct TensorOptions {
  double step = 1e-4;
  bool richardson = false;
  double min_eigenvalue = 1e-10;
};

/// Scale kappa so that kappa * sum_i log det F_i is the Kahler potential.
/// Returns 0 for the Euclidean signature (flat fallback).
double potential_scale(const MetricSignature& sig);

/// kappa * sum_i log det F_i at a chart point. Throws OutOfDomain.
double kahler_potential(std::shared_ptr<const Quiver> q, const CVector& z,
                        const MetricSignature& sig);

/// Hermitian matrix M with M_kl = d^2 Phi / dzbar_k dz_l on chart coordinates,
/// so that v* M v is the metric. Euclidean returns Id. Real-mode points get
/// Re(M). Throws OutOfDomain, NonPositive.
CMatrix moduli_metric_tensor(const FramedRep& p_chart, const MetricSignature& sig,
                             const TensorOptions& opts = {});

}  // namespace qml
