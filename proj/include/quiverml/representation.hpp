#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "quiverml/linalg.hpp"
#include "quiverml/quiver.hpp"

namespace qml {

enum class ScalarMode { Complex, Real };

/// A point (w, e) of R_{n,d}: one d_h x d_t matrix per arrow and one
/// d_i x n_i framing matrix per vertex. Columns 0..d_i-1 of the framing form
/// the basis part, the rest the bias part.
class FramedRep {
 public:
  FramedRep(std::shared_ptr<const Quiver> quiver, std::vector<CMatrix> arrows,
            std::vector<CMatrix> framing, ScalarMode mode = ScalarMode::Complex);

  /// Point with every matrix zero.
  static FramedRep zeros(std::shared_ptr<const Quiver> quiver,
                         ScalarMode mode = ScalarMode::Complex);
  /// Basis parts Id, bias parts and arrows zero (requires n >= d).
  static FramedRep anchor(std::shared_ptr<const Quiver> quiver,
                          ScalarMode mode = ScalarMode::Complex);

  const Quiver& quiver() const { return *quiver_; }
  const std::shared_ptr<const Quiver>& quiver_ptr() const { return quiver_; }
  ScalarMode mode() const { return mode_; }

  /// Arrow matrix / framing matrix by position index.
  const CMatrix& w(std::size_t arrow_index) const { return arrows_[arrow_index]; }
  const CMatrix& e(std::size_t vertex_index) const { return framing_[vertex_index]; }
  CMatrix& w(std::size_t arrow_index) { return arrows_[arrow_index]; }
  CMatrix& e(std::size_t vertex_index) { return framing_[vertex_index]; }
  const std::vector<CMatrix>& arrow_matrices() const { return arrows_; }
  const std::vector<CMatrix>& framing_matrices() const { return framing_; }

  /// epsilon_i (d_i x d_i); requires n_i >= d_i.
  CMatrix basis(std::size_t vertex_index) const;
  /// b_i (d_i x (n_i - d_i)); requires n_i >= d_i.
  CMatrix bias(std::size_t vertex_index) const;

  /// w_gamma = w_{a_r} ... w_{a_1} for a path in traversal order.
  CMatrix path_matrix(const Path& p) const;

  /// Throws ShapeError if any matrix has the wrong shape, or (real mode) if
  /// some imaginary part is nonzero.
  void validate() const;

  /// Project onto the real locus when in real mode (no-op otherwise).
  void enforce_mode();

  double max_abs_diff(const FramedRep& other) const;
  bool identical(const FramedRep& other) const;

 private:
  std::shared_ptr<const Quiver> quiver_;
  std::vector<CMatrix> arrows_;
  std::vector<CMatrix> framing_;
  ScalarMode mode_;
};

/// Element of GL(d) = prod_i GL(d_i), indexed by vertex position.
struct GaugeElement {
  std::vector<CMatrix> g;

  static GaugeElement identity(const Quiver& q);
  /// Product (this * other)_i = this_i * other_i.
  GaugeElement operator*(const GaugeElement& other) const;
  GaugeElement inverse() const;
};

/// Random well-conditioned gauge element (Id + scale * Gaussian, rejected
/// until every block is invertible).
GaugeElement random_gauge(const Quiver& q, std::uint64_t seed, double scale = 0.5,
                          ScalarMode mode = ScalarMode::Complex);

/// w_a -> g_h w_a g_t^{-1}, e^(i) -> g_i e^(i). Throws SingularGauge.
FramedRep act(const GaugeElement& g, const FramedRep& p);

/// Framing stability: the smallest subrepresentation containing Im e is
/// everything.
bool is_stable(const FramedRep& p);

/// Move to the chart epsilon_i = Id. Throws SingularBasisPart.
FramedRep gauge_fix(const FramedRep& p);

/// The gauge element g with g_i = epsilon_i^{-1}.
GaugeElement gauge_fixing_element(const FramedRep& p);

bool is_gauge_fixed(const FramedRep& p, double tol = 0.0);

enum class SampleDomain { Stable, Euclidean, Hyperbolic };

struct SampleOptions {
  double scale = 0.5;            ///< std deviation of random entries
  int max_attempts = 200;        ///< rejection budget
  bool fixed_basis = true;       ///< epsilon = Id exactly (else perturbed)
  ScalarMode mode = ScalarMode::Complex;
};

/// Deterministic random point in the requested domain. Hyperbolic samples
/// shrink the entries until every hyperbolic form is positive-definite.
/// Throws DomainSamplingFailed.
FramedRep random_rep(std::shared_ptr<const Quiver> q, std::uint64_t seed,
                     SampleDomain domain, const SampleOptions& opts = {});

/// Matrix of the complex-linear map xi -> (xi_h w_a - w_a xi_t, xi_i e^(i))
/// from prod gl(d_i) to R_{n,d}; full column rank at points with free action.
CMatrix linearized_action(const FramedRep& p);

/// Tangent or cotangent vector at a point of R_{n,d}, shaped like FramedRep.
/// Gradients use the convention G = dL/dRe + i dL/dIm entrywise.
struct RepDirection {
  std::vector<CMatrix> w;
  std::vector<CMatrix> e;

  static RepDirection zeros_like(const FramedRep& p);
  RepDirection& operator+=(const RepDirection& o);
  RepDirection operator*(double c) const;
  /// Real inner product sum Re tr(a* b).
  double dot(const RepDirection& o) const;
};

/// p + t * v (entrywise).
FramedRep displace(const FramedRep& p, const RepDirection& v, double t = 1.0);

// ---------------------------------------------------------------------------
// Gauge-fixed chart coordinates: all bias entries b_i (vertex order,
// column-major) followed by all arrow entries w_a (arrow order,
// column-major).

std::size_t chart_dimension(const Quiver& q);
CVector to_chart(const FramedRep& p);
FramedRep from_chart(std::shared_ptr<const Quiver> q, const CVector& z,
                     ScalarMode mode = ScalarMode::Complex);

/// Chart components (bias blocks, then arrows) of a direction; the basis
/// parts are dropped.
CVector direction_to_chart(const Quiver& q, const RepDirection& v);
/// Direction with zero basis parts from chart components.
RepDirection chart_to_direction(const Quiver& q, const CVector& z);

/// Interleaved real view: x[2k] = Re z_k, x[2k+1] = Im z_k.
RVector chart_to_real(const CVector& z);
CVector real_to_chart(const RVector& x);

/// Real optimization parameters of a gauge-fixed point: the interleaved chart
/// vector in complex mode, the real parts of the chart vector in real mode.
RVector to_params(const FramedRep& p);
FramedRep from_params(std::shared_ptr<const Quiver> q, const RVector& x, ScalarMode mode);
/// Parameter-space view of a chart cotangent G = dL/dRe + i dL/dIm.
RVector chart_gradient_to_params(const CVector& g, ScalarMode mode);
/// Chart tangent of a parameter-space vector.
CVector params_to_chart(const RVector& x, ScalarMode mode);

}  // namespace qml
