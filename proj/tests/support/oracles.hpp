#pragma once

// Test quivers and independent reference computations shared by the unit and
// acceptance suites. Nothing here calls into the library's own algorithms for
// the quantity being checked.

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "quiverml/quiver.hpp"
#include "quiverml/representation.hpp"

namespace qml::testing {

using QuiverPtr = std::shared_ptr<const Quiver>;

inline QuiverPtr make_quiver(std::vector<VertexSpec> v, std::vector<ArrowSpec> a) {
  return std::make_shared<const Quiver>(std::move(v), std::move(a));
}

/// Single vertex, no arrows.
inline QuiverPtr a1_quiver(int n = 2, int d = 1) {
  return make_quiver({{1, n, d, Role::Memory}}, {});
}

/// 1 -> 2 with arrow id 1.
inline QuiverPtr a2_quiver(int n1 = 2, int n2 = 2, int d1 = 1, int d2 = 1) {
  return make_quiver({{1, n1, d1, Role::Input}, {2, n2, d2, Role::Output}}, {{1, 1, 2}});
}

/// a1: 1->2, a2: 1->3, a3: 2->4, a4: 3->4.
inline QuiverPtr diamond_quiver(int n_in = 2, int n_mid = 3, int n_out = 2, int d_mid = 2) {
  return make_quiver({{1, n_in, 1, Role::Input},
                      {2, n_mid, d_mid, Role::Memory},
                      {3, n_mid, d_mid, Role::Memory},
                      {4, n_out, 1, Role::Output}},
                     {{1, 1, 2}, {2, 1, 3}, {3, 2, 4}, {4, 3, 4}});
}

inline constexpr const char* kDiamondAlgorithm =
    "eout* . ( a4 . e3 . s2 . e3* . a2 + a3 . e2 . s3 . e2* . a1 ) . ein";

/// 1 -> 2 -> 3 -> 4 with arrows a1, a2, a3.
inline QuiverPtr chain_quiver(int n_in = 2, int n_mid = 3, int n_out = 2, int d_mid = 2) {
  return make_quiver({{1, n_in, 1, Role::Input},
                      {2, n_mid, d_mid, Role::Memory},
                      {3, n_mid, d_mid, Role::Memory},
                      {4, n_out, 1, Role::Output}},
                     {{1, 1, 2}, {2, 2, 3}, {3, 3, 4}});
}

inline constexpr const char* kChainAlgorithm =
    "eout* . a3 . e3 . s2 . e3* . a2 . e2 . s2 . e2* . a1 . ein";

/// Layered 1 -> 2 -> 3 with d = (2,2,1), n = (3,3,1).
inline QuiverPtr layered_quiver() {
  return make_quiver({{1, 3, 2, Role::Input}, {2, 3, 2, Role::Memory}, {3, 1, 1, Role::Output}},
                     {{1, 1, 2}, {2, 2, 3}});
}

inline constexpr const char* kLayeredAlgorithm = "eout* . a2 . e2 . s2 . e2* . a1 . ein";

/// Random acyclic quiver: arrows only go from lower to higher vertex id,
/// multiple arrows allowed. n_i >= d_i when `chart_ready`.
inline QuiverPtr random_acyclic_quiver(std::mt19937_64& rng, int max_vertices, int max_arrows,
                                       int max_dim, bool chart_ready = true) {
  std::uniform_int_distribution<int> nv_dist(1, max_vertices);
  std::uniform_int_distribution<int> dim(1, max_dim);
  const int nv = nv_dist(rng);
  std::vector<VertexSpec> vs;
  for (int i = 1; i <= nv; ++i) {
    const int d = dim(rng);
    int n = dim(rng);
    if (chart_ready && n < d) n = d + (dim(rng) % 2);
    vs.push_back({i, n, d, Role::Plain});
  }
  std::vector<ArrowSpec> as;
  if (nv > 1) {
    std::uniform_int_distribution<int> na_dist(0, max_arrows);
    std::uniform_int_distribution<int> vert(1, nv);
    const int na = na_dist(rng);
    for (int k = 1; k <= na; ++k) {
      int s = vert(rng), t = vert(rng);
      while (s == t) t = vert(rng);
      if (s > t) std::swap(s, t);
      as.push_back({k, s, t});
    }
  }
  return make_quiver(std::move(vs), std::move(as));
}

/// Number of paths ending at each vertex from powers of the adjacency matrix
/// (entry (i,j) of A^k counts length-k paths from i to j).
inline std::vector<long> path_counts_by_matrix_power(const Quiver& q) {
  const auto nv = static_cast<Eigen::Index>(q.num_vertices());
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(nv, nv);
  for (const auto& a : q.arrows()) adj(q.vertex_index(a.src), q.vertex_index(a.dst)) += 1.0;
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(nv, nv);
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(nv, nv);
  for (Eigen::Index k = 0; k <= nv; ++k) {
    total += power;
    power = power * adj;
  }
  std::vector<long> counts(nv);
  for (Eigen::Index j = 0; j < nv; ++j) counts[j] = std::lround(total.col(j).sum());
  return counts;
}

/// All arrow sequences ending at `target` by brute-force depth-first search
/// over outgoing arrows from every vertex. Traversal order.
inline std::vector<std::vector<int>> brute_force_paths(const Quiver& q, int target) {
  std::vector<std::vector<int>> out;
  std::vector<std::pair<int, std::vector<int>>> stack;
  for (const auto& v : q.vertices()) stack.push_back({v.id, {}});
  while (!stack.empty()) {
    auto [at, seq] = stack.back();
    stack.pop_back();
    if (at == target) out.push_back(seq);
    for (const auto& a : q.arrows()) {
      if (a.src == at) {
        auto next = seq;
        next.push_back(a.id);
        stack.push_back({a.dst, next});
      }
    }
  }
  return out;
}

inline std::complex<double> rand_complex(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

inline Eigen::MatrixXcd rand_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c,
                                    double scale = 1.0, bool real = false) {
  Eigen::MatrixXcd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) {
      auto z = rand_complex(rng, scale);
      m(i, j) = real ? std::complex<double>(z.real(), 0.0) : z;
    }
  }
  return m;
}

/// Hyperbolic single-vertex closed forms (d = 1): (1 - |b|^2)^{-1} and
/// (1 + |b|^2)^{-1}, with |b|^2 summed over the bias entries.
inline double a1_hyperbolic_metric(double bnorm2) { return 1.0 / (1.0 - bnorm2); }
inline double a1_compact_metric(double bnorm2) { return 1.0 / (1.0 + bnorm2); }

/// Second Wirtinger derivative of -log(1 - |b|^2) / log(1 + |b|^2) at b,
/// n - d = 1: (1 -/+ |b|^2)^{-2}.
inline double poincare_tensor(double bnorm2) { return 1.0 / ((1.0 - bnorm2) * (1.0 - bnorm2)); }
inline double fubini_study_tensor(double bnorm2) { return 1.0 / ((1.0 + bnorm2) * (1.0 + bnorm2)); }

/// Classical two-layer network y = E3^T W2 E2 tanh(E2^T W1 E1 x) with
/// E_i = [Id | B_i], trained on mean squared error. Hand-written forward and
/// backward passes over real dense matrices; gradient ordered like the chart
/// (B1, B2, B3, W1, W2, each column-major).
struct DenseNet {
  Eigen::MatrixXd B1, B2, B3, W1, W2;

  static Eigen::MatrixXd frame(const Eigen::MatrixXd& b) {
    Eigen::MatrixXd e(b.rows(), b.rows() + b.cols());
    e << Eigen::MatrixXd::Identity(b.rows(), b.rows()), b;
    return e;
  }

  Eigen::VectorXd predict(const Eigen::VectorXd& x) const {
    const Eigen::MatrixXd E1 = frame(B1), E2 = frame(B2), E3 = frame(B3);
    const Eigen::VectorXd z = E2.transpose() * (W1 * (E1 * x));
    const Eigen::VectorXd h = z.array().tanh().matrix();
    return E3.transpose() * (W2 * (E2 * h));
  }

  // Returns (loss, gradient).
  std::pair<double, Eigen::VectorXd> loss_and_gradient(
      const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& data) const {
    const Eigen::MatrixXd E1 = frame(B1), E2 = frame(B2), E3 = frame(B3);
    Eigen::MatrixXd gE1 = Eigen::MatrixXd::Zero(E1.rows(), E1.cols());
    Eigen::MatrixXd gE2 = Eigen::MatrixXd::Zero(E2.rows(), E2.cols());
    Eigen::MatrixXd gE3 = Eigen::MatrixXd::Zero(E3.rows(), E3.cols());
    Eigen::MatrixXd gW1 = Eigen::MatrixXd::Zero(W1.rows(), W1.cols());
    Eigen::MatrixXd gW2 = Eigen::MatrixXd::Zero(W2.rows(), W2.cols());
    double loss = 0.0;
    const double n = static_cast<double>(data.size());
    for (const auto& [x, target] : data) {
      const Eigen::VectorXd u = E1 * x;
      const Eigen::VectorXd v = W1 * u;
      const Eigen::VectorXd z = E2.transpose() * v;
      const Eigen::VectorXd h = z.array().tanh().matrix();
      const Eigen::VectorXd s = E2 * h;
      const Eigen::VectorXd t = W2 * s;
      const Eigen::VectorXd y = E3.transpose() * t;
      loss += (y - target).squaredNorm() / n;
      const Eigen::VectorXd gy = 2.0 * (y - target) / n;
      const Eigen::VectorXd gt = E3 * gy;
      gE3 += t * gy.transpose();
      gW2 += gt * s.transpose();
      const Eigen::VectorXd gs = W2.transpose() * gt;
      gE2 += gs * h.transpose();
      const Eigen::VectorXd gh = E2.transpose() * gs;
      const Eigen::VectorXd gz = (gh.array() * (1.0 - h.array().square())).matrix();
      const Eigen::VectorXd gv = E2 * gz;
      gE2 += v * gz.transpose();
      gW1 += gv * u.transpose();
      const Eigen::VectorXd gu = W1.transpose() * gv;
      gE1 += gu * x.transpose();
    }
    std::vector<Eigen::MatrixXd> blocks{gE1.rightCols(B1.cols()), gE2.rightCols(B2.cols()),
                                        gE3.rightCols(B3.cols()), gW1, gW2};
    Eigen::Index total = 0;
    for (const auto& b : blocks) total += b.size();
    Eigen::VectorXd g(total);
    Eigen::Index pos = 0;
    for (const auto& b : blocks) {
      g.segment(pos, b.size()) = b.reshaped();
      pos += b.size();
    }
    return {loss, g};
  }
};

}  // namespace qml::testing
