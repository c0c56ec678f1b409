#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <optional>

namespace qml {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Reciprocal condition number below which a square matrix counts as singular.
inline constexpr double kSingularRcond = 1e-12;

/// (A + A*) / 2.
CMatrix hermitian_part(const CMatrix& a);

/// Reciprocal 2-norm condition number (smallest / largest singular value).
/// Returns 0 for an empty or all-zero matrix.
double rcond(const CMatrix& a);

bool is_invertible(const CMatrix& a);

/// Smallest eigenvalue of the Hermitian part of `a` (+inf for 0x0).
double min_eigenvalue(const CMatrix& a);

/// log det of a Hermitian positive-definite matrix via Cholesky; nullopt if
/// the factorization fails.
std::optional<double> logdet_pd(const CMatrix& a);

/// Numerical rank with singular values thresholded relative to the largest.
int numerical_rank(const CMatrix& a, double rel_tol);

/// Largest absolute entry of a - b (0 for empty matrices).
double max_abs_diff(const CMatrix& a, const CMatrix& b);

/// Largest absolute imaginary part over all entries.
double max_abs_imag(const CMatrix& a);

/// Sum of `values` by pairwise (tree) reduction; the order depends only on
/// the length, so results are reproducible.
double pairwise_sum(const double* values, std::size_t count);

/// Central-difference Hessian of f at x with step h.
RMatrix fd_hessian(const std::function<double(const RVector&)>& f, const RVector& x, double h);

/// Hermitian matrix M_kl = d^2 f / dzbar_k dz_l from the real Hessian of f in
/// interleaved coordinates (Re z_1, Im z_1, Re z_2, ...).
CMatrix wirtinger_tensor(const RMatrix& hess);

}  // namespace qml
