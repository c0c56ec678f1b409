#include "quiverml/linalg.hpp"

#include <limits>

namespace qml {

CMatrix hermitian_part(const CMatrix& a) {
  return (a + a.adjoint()) * 0.5;
}

double rcond(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& s = svd.singularValues();
  const double largest = s(0);
  if (largest == 0.0) return 0.0;
  return s(s.size() - 1) / largest;
}

bool is_invertible(const CMatrix& a) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  return rcond(a) >= kSingularRcond;
}

double min_eigenvalue(const CMatrix& a) {
  if (a.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a),
                                            Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

std::optional<double> logdet_pd(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const CMatrix& l = llt.matrixLLT();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    const double diag = l(i, i).real();
    if (!(diag > 0.0)) return std::nullopt;
    acc += 2.0 * std::log(diag);
  }
  return acc;
}

int numerical_rank(const CMatrix& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++rank;
  }
  return rank;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

double max_abs_imag(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.imag().cwiseAbs().maxCoeff();
}

double pairwise_sum(const double* values, std::size_t count) {
  if (count == 0) return 0.0;
  if (count == 1) return values[0];
  if (count == 2) return values[0] + values[1];
  const std::size_t half = count / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

RMatrix fd_hessian(const std::function<double(const RVector&)>& f, const RVector& x, double h) {
  const Eigen::Index n = x.size();
  const double f0 = f(x);
  RMatrix hess(n, n);
  RVector y = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = x(i) + h;
    const double fp = f(y);
    y(i) = x(i) - h;
    const double fm = f(y);
    y(i) = x(i);
    hess(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    for (Eigen::Index j = 0; j < i; ++j) {
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          y(i) = x(i) + si * h;
          y(j) = x(j) + sj * h;
          acc += si * sj * f(y);
        }
      }
      y(i) = x(i);
      y(j) = x(j);
      hess(i, j) = hess(j, i) = acc / (4.0 * h * h);
    }
  }
  return hess;
}

CMatrix wirtinger_tensor(const RMatrix& hess) {
  const Eigen::Index n = hess.rows() / 2;
  CMatrix m(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) {
      const double xx = hess(2 * k, 2 * l);
      const double yy = hess(2 * k + 1, 2 * l + 1);
      const double yx = hess(2 * k + 1, 2 * l);
      const double xy = hess(2 * k, 2 * l + 1);
      m(k, l) = 0.25 * Complex(xx + yy, yx - xy);
    }
  }
  return hermitian_part(m);
}

}  // namespace qml
