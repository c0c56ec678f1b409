#include "quiverml/uniformize.hpp"

#include <random>

#include "quiverml/errors.hpp"
#include "quiverml/machine.hpp"
#include "quiverml/metric.hpp"

namespace qml {

CMatrix gram_factor(const CMatrix& a) {
  if (a.rows() != a.cols()) throw NotPositiveDefinite("gram_factor needs a square matrix");
  if (a.size() == 0) return a;
  if (max_abs_diff(a, a.adjoint()) > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
    throw NotPositiveDefinite("gram_factor needs a Hermitian matrix");
  }
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("matrix is not positive-definite");
  return llt.matrixL();
}

std::vector<double> GrassmannCoords::min_eigenvalues() const {
  std::vector<double> out;
  out.reserve(W.size());
  for (const auto& w : W) {
    out.push_back(min_eigenvalue(CMatrix::Identity(w.rows(), w.rows()) - w * w.adjoint()));
  }
  return out;
}

bool GrassmannCoords::in_gr_minus() const {
  for (double e : min_eigenvalues()) {
    if (!(e > 0.0)) return false;
  }
  return true;
}

GrassmannCoords grassmann_map(const FramedRep& p) {
  if (!is_gauge_fixed(p, 0.0)) throw SingularBasisPart("grassmann_map needs a gauge-fixed point");
  if (!in_domain(p, MetricSignature::hyperbolic()).ok) {
    throw OutOfDomain("point is outside the hyperbolic domain");
  }
  const Quiver& q = p.quiver();
  const auto compact = evaluate_metric(p, MetricSignature::compact()).compact;
  std::vector<CMatrix> g(q.num_vertices());
  for (std::size_t i = 0; i < q.num_vertices(); ++i) g[i] = gram_factor(compact[i]);

  GrassmannCoords c{p.quiver_ptr(), {}, p.mode()};
  c.W.resize(q.num_vertices());
  for (std::size_t i = 0; i < q.num_vertices(); ++i) {
    const auto& v = q.vertices()[i];
    CMatrix w(v.d, q.grassmann_ambient(v.id) - v.d);
    w.leftCols(v.n - v.d) = p.bias(i);
    Eigen::Index col = v.n - v.d;
    for (std::size_t a : q.arrows_into(i)) {
      const std::size_t t = q.vertex_index(q.arrows()[a].src);
      w.middleCols(col, g[t].cols()) = p.w(a) * g[t];
      col += g[t].cols();
    }
    c.W[i] = std::move(w);
  }
  return c;
}

FramedRep grassmann_inverse(const GrassmannCoords& c) {
  const Quiver& q = *c.quiver;
  if (c.W.size() != q.num_vertices()) throw ShapeError("one block per vertex expected");
  for (std::size_t i = 0; i < q.num_vertices(); ++i) {
    const auto& v = q.vertices()[i];
    if (c.W[i].rows() != v.d || c.W[i].cols() != q.grassmann_ambient(v.id) - v.d) {
      throw ShapeError("block of vertex " + std::to_string(v.id) + " has the wrong shape");
    }
  }
  if (!c.in_gr_minus()) throw OutOfDomain("coordinates are outside the space-like Grassmannians");

  FramedRep p = FramedRep::anchor(c.quiver, c.mode);
  std::vector<CMatrix> g(q.num_vertices());
  for (std::size_t i : q.topological_indices()) {
    const auto& v = q.vertices()[i];
    const CMatrix& w = c.W[i];
    const CMatrix b = w.leftCols(v.n - v.d);
    p.e(i).rightCols(v.n - v.d) = b;
    CMatrix compact = CMatrix::Identity(v.d, v.d) + b * b.adjoint();
    Eigen::Index col = v.n - v.d;
    for (std::size_t a : q.arrows_into(i)) {
      const std::size_t t = q.vertex_index(q.arrows()[a].src);
      const CMatrix block = w.middleCols(col, g[t].cols());
      col += g[t].cols();
      p.w(a) = g[t].triangularView<Eigen::Lower>().solve<Eigen::OnTheRight>(block);
      const CMatrix wg = p.w(a) * g[t];
      compact += wg * wg.adjoint();
    }
    g[i] = gram_factor(hermitian_part(compact));
  }
  return p;
}

namespace {

// Real 2n x 2n matrix of the form 2 Im(u* h v) in interleaved coordinates.
RMatrix symplectic_matrix(const CMatrix& h) {
  const Eigen::Index n = h.rows();
  CMatrix basis = CMatrix::Zero(n, 2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    basis(k, 2 * k) = 1.0;
    basis(k, 2 * k + 1) = Complex(0.0, 1.0);
  }
  return 2.0 * (basis.adjoint() * h * basis).imag();
}

RVector interleave(const CVector& z) {
  RVector x(2 * z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    x(2 * k) = z(k).real();
    x(2 * k + 1) = z(k).imag();
  }
  return x;
}

CVector deinterleave(const RVector& x) {
  CVector z(x.size() / 2);
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = Complex(x(2 * k), x(2 * k + 1));
  return z;
}

}  // namespace

double hyperbolic_sigma_deviation(const CVector& z) {
  const Eigen::Index n = z.size();
  const auto& sigma = ActivationCatalog::builtin().get(4).value;
  auto sigma_real = [&](const RVector& x) { return interleave(sigma(deinterleave(x))); };
  auto potential = [](const RVector& x) { return -std::log(1.0 - x.squaredNorm()); };

  const RVector x = interleave(z);
  const double jh = 1e-6;
  RMatrix jac(2 * n, 2 * n);
  RVector y = x;
  for (Eigen::Index j = 0; j < 2 * n; ++j) {
    y(j) = x(j) + jh;
    const RVector fp = sigma_real(y);
    y(j) = x(j) - jh;
    const RVector fm = sigma_real(y);
    y(j) = x(j);
    jac.col(j) = (fp - fm) / (2.0 * jh);
  }
  const RVector w = sigma_real(x);
  const CMatrix h = wirtinger_tensor(fd_hessian(potential, w, 1e-4));
  const RMatrix pulled = jac.transpose() * symplectic_matrix(h) * jac;
  const RMatrix standard = symplectic_matrix(CMatrix::Identity(n, n));
  return (pulled - standard).cwiseAbs().maxCoeff();
}

double hyperbolic_sigma_check(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 0.5);
  CVector z(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double re = nd(rng);
    const double im = nd(rng);
    z(k) = Complex(re, im);
  }
  return hyperbolic_sigma_deviation(z);
}

}  // namespace qml
