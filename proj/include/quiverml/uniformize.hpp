#pragma once

#include <memory>
#include <vector>

#include "quiverml/linalg.hpp"
#include "quiverml/representation.hpp"

namespace qml {

/// Lower-triangular g with positive real diagonal and g g* = a (Cholesky).
/// Throws NotPositiveDefinite.
CMatrix gram_factor(const CMatrix& a);

/// Coordinates on the product of space-like Grassmannians: per vertex the
/// d_i x (m_i - d_i) block W_i = (b_i | w_a g_{t(a)} for arrows a into i).
struct GrassmannCoords {
  std::shared_ptr<const Quiver> quiver;
  std::vector<CMatrix> W;  ///< by vertex position
  ScalarMode mode = ScalarMode::Complex;

  /// Smallest eigenvalue of Id - W_i W_i* per vertex.
  std::vector<double> min_eigenvalues() const;
  bool in_gr_minus() const;
};

/// Requires a gauge-fixed point (SingularBasisPart otherwise) in the
/// hyperbolic domain (OutOfDomain otherwise).
GrassmannCoords grassmann_map(const FramedRep& p);

/// Recovers the gauge-fixed point by triangular solves in topological order.
/// Throws ShapeError on mismatched blocks, OutOfDomain outside Gr^-.
FramedRep grassmann_inverse(const GrassmannCoords& c);

/// Largest entrywise deviation between the pullback under
/// sigma(z) = z / sqrt(1 + |z|^2) of the form with potential -log(1 - |w|^2)
/// and the standard form, at z. Forms are real 2n x 2n matrices in
/// interleaved coordinates.
double hyperbolic_sigma_deviation(const CVector& z);

/// hyperbolic_sigma_deviation at a random z in C^n (Gaussian entries, 0.5).
double hyperbolic_sigma_check(int n, std::uint64_t seed);

}  // namespace qml
