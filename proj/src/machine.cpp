#include "quiverml/machine.hpp"

#include <cmath>
#include <random>

#include "quiverml/errors.hpp"

namespace qml {

namespace {

constexpr double kSoftplusSharpness = 20.0;

double softplus(double x) {
  const double kx = kSoftplusSharpness * x;
  return (std::max(kx, 0.0) + std::log1p(std::exp(-std::abs(kx)))) / kSoftplusSharpness;
}

double logistic(double x) {
  const double kx = kSoftplusSharpness * x;
  if (kx >= 0) return 1.0 / (1.0 + std::exp(-kx));
  const double e = std::exp(kx);
  return e / (1.0 + e);
}

// Activation applying a real function to real and imaginary parts separately.
Activation split(std::string name, double (*f)(double), double (*df)(double)) {
  Activation a;
  a.name = std::move(name);
  a.value = [f](const CVector& z) {
    CVector out(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) out(i) = Complex(f(z(i).real()), f(z(i).imag()));
    return out;
  };
  auto scale = [df](const CVector& z, const CVector& v) {
    CVector out(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      out(i) = Complex(df(z(i).real()) * v(i).real(), df(z(i).imag()) * v(i).imag());
    }
    return out;
  };
  a.jvp = scale;
  a.vjp = scale;
  return a;
}

double tanh_prime(double x) {
  const double t = std::tanh(x);
  return 1.0 - t * t;
}

double tanh_value(double x) { return std::tanh(x); }

Activation hyperbolic_sigma() {
  Activation a;
  a.name = "hyperbolic_sigma";
  a.value = [](const CVector& z) { return CVector(z / std::sqrt(1.0 + z.squaredNorm())); };
  a.jvp = [](const CVector& z, const CVector& dz) {
    const double s = std::sqrt(1.0 + z.squaredNorm());
    const double proj = z.dot(dz).real();  // Re <z, dz>
    return CVector(dz / s - z * (proj / (s * s * s)));
  };
  a.vjp = [](const CVector& z, const CVector& g) {
    const double s = std::sqrt(1.0 + z.squaredNorm());
    const double proj = z.dot(g).real();
    return CVector(g / s - z * (proj / (s * s * s)));
  };
  return a;
}

Activation identity() {
  Activation a;
  a.name = "identity";
  a.value = [](const CVector& z) { return z; };
  a.jvp = [](const CVector&, const CVector& dz) { return dz; };
  a.vjp = [](const CVector&, const CVector& g) { return g; };
  return a;
}

double re_inner(const CVector& a, const CVector& b) { return a.dot(b).real(); }

// Matrix of one segment e_k* H_k w_gamma e_j.
CMatrix segment_matrix(const Segment& s, const FramedRep& p, const MetricState& m) {
  const Quiver& q = p.quiver();
  const std::size_t k = q.vertex_index(s.out_vertex);
  const std::size_t j = q.vertex_index(s.in_vertex);
  const CMatrix path = p.path_matrix(Path{s.arrows, s.in_vertex, s.out_vertex});
  return p.e(k).adjoint() * (m.H[k] * (path * p.e(j)));
}

CMatrix term_matrix(const LabelTerm& t, int block_dim, const FramedRep& p, const MetricState& m) {
  CMatrix acc = CMatrix::Identity(block_dim, block_dim);
  for (const auto& s : t.segments) acc = segment_matrix(s, p, m) * acc;
  return t.coeff * acc;
}

void check_finite(const CVector& v, const char* what) {
  if (!v.allFinite()) throw NonDifferentiable(std::string("non-finite ") + what + " in forward pass");
}

}  // namespace

// ---------------------------------------------------------------------------
// Activations

const ActivationCatalog& ActivationCatalog::builtin() {
  static const ActivationCatalog catalog = [] {
    ActivationCatalog c;
    c.add(1, identity());
    c.add(2, split("tanh", &tanh_value, &tanh_prime));
    c.add(3, split("softplus", &softplus, &logistic));
    c.add(4, hyperbolic_sigma());
    return c;
  }();
  return catalog;
}

void ActivationCatalog::add(int id, Activation a) { acts_[id] = std::move(a); }

const Activation& ActivationCatalog::get(int id) const {
  auto it = acts_.find(id);
  if (it == acts_.end()) throw UnknownSymbol("unknown activation s" + std::to_string(id));
  return it->second;
}

std::vector<int> ActivationCatalog::ids() const {
  std::vector<int> out;
  for (const auto& [id, a] : acts_) out.push_back(id);
  return out;
}

double ActivationCatalog::self_test(int id, int dim, std::uint64_t seed, int samples) const {
  const Activation& a = get(id);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto rand_vec = [&] {
    CVector v(dim);
    for (int i = 0; i < dim; ++i) {
      const double re = nd(rng);
      const double im = nd(rng);
      v(i) = Complex(re, im);
    }
    return v;
  };
  const double h = 1e-6;
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const CVector z = rand_vec();
    const CVector dz = rand_vec();
    const CVector g = rand_vec();
    const CVector fd = (a.value(z + h * dz) - a.value(z - h * dz)) / (2 * h);
    const CVector jv = a.jvp(z, dz);
    worst = std::max(worst, (jv - fd).cwiseAbs().maxCoeff() / std::max(1.0, fd.cwiseAbs().maxCoeff()));
    const double lhs = re_inner(g, jv);
    const double rhs = re_inner(a.vjp(z, g), dz);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Realization

CMatrix realize_edge(const EdgeLabel& label, const FramedRep& p, const MetricState& m) {
  const Quiver& q = p.quiver();
  const int src_dim = q.vertex(label.src_vertex).n;
  const int dst_dim = q.vertex(label.dst_vertex).n;
  for (std::size_t i = 0; i < m.H.size(); ++i) {
    if (!(min_eigenvalue(m.H[i]) > 0.0)) {
      throw OutOfDomain("metric at vertex " + std::to_string(q.vertices()[i].id) +
                        " is not positive-definite");
    }
  }
  CMatrix acc = CMatrix::Zero(dst_dim, src_dim);
  for (const auto& t : label.terms) acc += term_matrix(t, src_dim, p, m);
  return acc;
}

Machine::Machine(ActivationTree tree, const ActivationCatalog& catalog)
    : tree_(std::move(tree)), catalog_(&catalog) {
  for (const auto& n : tree_.nodes()) {
    if (n.kind == TreeNode::Kind::Activation) catalog_->get(n.activation);
  }
}

int Machine::input_dim() const { return tree_.quiver().vertex(tree_.input_vertex()).n; }
int Machine::output_dim() const { return tree_.quiver().vertex(tree_.output_vertex()).n; }

Realization Machine::realize(const FramedRep& p, const MetricSignature& sig) const {
  const DomainReport report = in_domain(p, sig);
  if (!report.ok) {
    throw OutOfDomain("point is outside the " + sig.name() + " domain at vertex " +
                      std::to_string(report.failing_vertex));
  }
  Realization r;
  r.metric = evaluate_metric(p, sig);
  r.edge.resize(tree_.size());
  const Quiver& q = p.quiver();
  for (std::size_t i = 1; i < tree_.size(); ++i) {
    const EdgeLabel& label = tree_.node(static_cast<int>(i)).label;
    const int src_dim = q.vertex(label.src_vertex).n;
    CMatrix acc = CMatrix::Zero(q.vertex(label.dst_vertex).n, src_dim);
    for (const auto& t : label.terms) acc += term_matrix(t, src_dim, p, r.metric);
    r.edge[i] = std::move(acc);
  }
  return r;
}

CVector Machine::forward(const Realization& r, const CVector& x, Tape* tape) const {
  if (x.size() != input_dim()) throw ShapeError("input has wrong dimension");
  const std::size_t n = tree_.size();
  std::vector<CVector> z(n), out(n);
  for (int i : tree_.postorder()) {
    const TreeNode& node = tree_.node(i);
    if (node.kind == TreeNode::Kind::Leaf) {
      out[static_cast<std::size_t>(i)] = x;
      continue;
    }
    const int dim = tree_.quiver().vertex(node.block).n;
    CVector acc = CVector::Zero(dim);
    for (int c : node.children) acc += r.edge[static_cast<std::size_t>(c)] * out[static_cast<std::size_t>(c)];
    if (node.kind == TreeNode::Kind::Activation) {
      check_finite(acc, "pre-activation");
      out[static_cast<std::size_t>(i)] = catalog_->get(node.activation).value(acc);
      z[static_cast<std::size_t>(i)] = std::move(acc);
    } else {
      out[0] = std::move(acc);
    }
  }
  CVector y = out[0];
  if (tape) {
    tape->z = std::move(z);
    tape->out = std::move(out);
    tape->y = y;
  }
  return y;
}

CVector Machine::forward(const FramedRep& p, const MetricSignature& sig, const CVector& x) const {
  return forward(realize(p, sig), x);
}

double Machine::cost(const Realization& r, const Dataset& data) const {
  if (data.empty()) return 0.0;
  std::vector<double> terms;
  terms.reserve(data.size());
  for (const auto& s : data) {
    if (s.y.size() != output_dim()) throw ShapeError("target has wrong dimension");
    terms.push_back((forward(r, s.x) - s.y).squaredNorm());
  }
  return pairwise_sum(terms.data(), terms.size()) / static_cast<double>(data.size());
}

double Machine::cost(const FramedRep& p, const MetricSignature& sig, const Dataset& data) const {
  return cost(realize(p, sig), data);
}

Machine::Gradient Machine::backward(const FramedRep& p, const MetricSignature& sig,
                                    const Dataset& data) const {
  const Realization r = realize(p, sig);
  const Quiver& q = p.quiver();
  const std::size_t n = tree_.size();
  std::vector<CMatrix> gEdge(n);
  for (std::size_t i = 1; i < n; ++i) gEdge[i] = CMatrix::Zero(r.edge[i].rows(), r.edge[i].cols());

  // Preorder: parents before children.
  std::vector<int> pre = tree_.postorder();
  std::reverse(pre.begin(), pre.end());

  std::vector<double> costs;
  costs.reserve(data.size());
  const double scale = data.empty() ? 0.0 : 2.0 / static_cast<double>(data.size());
  for (const auto& s : data) {
    if (s.y.size() != output_dim()) throw ShapeError("target has wrong dimension");
    Tape tape;
    const CVector y = forward(r, s.x, &tape);
    const CVector resid = y - s.y;
    costs.push_back(resid.squaredNorm());
    // Cotangent arriving at each node's summed input (root output, or z).
    std::vector<CVector> gIn(n);
    gIn[0] = scale * resid;
    for (int i : pre) {
      const TreeNode& node = tree_.node(i);
      if (node.kind == TreeNode::Kind::Leaf) continue;
      const CVector& g = gIn[static_cast<std::size_t>(i)];
      for (int c : node.children) {
        const auto ci = static_cast<std::size_t>(c);
        gEdge[ci] += g * tape.out[ci].adjoint();
        if (tree_.node(c).kind == TreeNode::Kind::Activation) {
          const CVector gOut = r.edge[ci].adjoint() * g;
          gIn[ci] = catalog_->get(tree_.node(c).activation).vjp(tape.z[ci], gOut);
        }
      }
    }
  }

  Gradient out;
  out.cost = data.empty() ? 0.0 : pairwise_sum(costs.data(), costs.size()) / static_cast<double>(data.size());
  out.full = RepDirection::zeros_like(p);
  std::vector<CMatrix> gH;
  for (const auto& h : r.metric.H) gH.push_back(CMatrix::Zero(h.rows(), h.cols()));

  for (std::size_t i = 1; i < n; ++i) {
    const EdgeLabel& label = tree_.node(static_cast<int>(i)).label;
    const int src_dim = q.vertex(label.src_vertex).n;
    for (const auto& t : label.terms) {
      const std::size_t r_len = t.segments.size();
      if (r_len == 0) continue;
      std::vector<CMatrix> seg;
      for (const auto& s : t.segments) seg.push_back(segment_matrix(s, p, r.metric));
      // before[k] = S_{k-1} ... S_1 (application order), after[k] = S_r ... S_{k+1}.
      std::vector<CMatrix> before(r_len), after(r_len);
      before[0] = CMatrix::Identity(src_dim, src_dim);
      for (std::size_t k = 1; k < r_len; ++k) before[k] = seg[k - 1] * before[k - 1];
      after[r_len - 1] = CMatrix::Identity(seg.back().rows(), seg.back().rows());
      for (std::size_t k = r_len - 1; k-- > 0;) after[k] = after[k + 1] * seg[k + 1];
      for (std::size_t k = 0; k < r_len; ++k) {
        const CMatrix gS = t.coeff * after[k].adjoint() * gEdge[i] * before[k].adjoint();
        const Segment& s = t.segments[k];
        const std::size_t ko = q.vertex_index(s.out_vertex);
        const std::size_t ji = q.vertex_index(s.in_vertex);
        const CMatrix& H = r.metric.H[ko];
        const CMatrix path = p.path_matrix(Path{s.arrows, s.in_vertex, s.out_vertex});
        const CMatrix pe = path * p.e(ji);
        out.full.e[ko] += H * pe * gS.adjoint();
        gH[ko] += p.e(ko) * gS * pe.adjoint();
        const CMatrix gP = H * p.e(ko) * gS * p.e(ji).adjoint();
        out.full.e[ji] += path.adjoint() * H * p.e(ko) * gS;
        // Through w_{a_m} ... w_{a_1}.
        std::vector<CMatrix> prefix{CMatrix::Identity(q.vertex(s.in_vertex).d, q.vertex(s.in_vertex).d)};
        for (int id : s.arrows) prefix.push_back(p.w(q.arrow_index(id)) * prefix.back());
        CMatrix suffix_adj_g = gP;  // (w_r ... w_{m+1})* gP
        for (std::size_t m = s.arrows.size(); m-- > 0;) {
          const std::size_t a = q.arrow_index(s.arrows[m]);
          out.full.w[a] += suffix_adj_g * prefix[m].adjoint();
          suffix_adj_g = p.w(a).adjoint() * suffix_adj_g;
        }
      }
    }
  }
  out.full += metric_vjp(p, r.metric, gH);
  out.chart = direction_to_chart(q, out.full);
  out.params = chart_gradient_to_params(out.chart, p.mode());
  return out;
}

std::vector<CMatrix> edge_tangents(const ActivationTree& t, const FramedRep& p,
                                   const MetricState& m, const std::vector<CMatrix>& dH,
                                   const RepDirection& v) {
  const Quiver& q = p.quiver();
  std::vector<CMatrix> out(t.size());
  for (std::size_t i = 1; i < t.size(); ++i) {
    const EdgeLabel& label = t.node(static_cast<int>(i)).label;
    const int src_dim = q.vertex(label.src_vertex).n;
    CMatrix acc = CMatrix::Zero(q.vertex(label.dst_vertex).n, src_dim);
    for (const auto& term : label.terms) {
      // Product rule over S_r ... S_1 carried as (value, derivative).
      CMatrix val = CMatrix::Identity(src_dim, src_dim);
      CMatrix dval = CMatrix::Zero(src_dim, src_dim);
      for (const auto& s : term.segments) {
        const std::size_t k = q.vertex_index(s.out_vertex);
        const std::size_t j = q.vertex_index(s.in_vertex);
        CMatrix path = CMatrix::Identity(q.vertex(s.in_vertex).d, q.vertex(s.in_vertex).d);
        CMatrix dpath = CMatrix::Zero(path.rows(), path.cols());
        for (int id : s.arrows) {
          const std::size_t a = q.arrow_index(id);
          dpath = v.w[a] * path + p.w(a) * dpath;
          path = p.w(a) * path;
        }
        const CMatrix pe = path * p.e(j);
        const CMatrix dpe = dpath * p.e(j) + path * v.e[j];
        const CMatrix S = p.e(k).adjoint() * m.H[k] * pe;
        const CMatrix dS = v.e[k].adjoint() * m.H[k] * pe + p.e(k).adjoint() * dH[k] * pe +
                           p.e(k).adjoint() * m.H[k] * dpe;
        dval = dS * val + S * dval;
        val = S * val;
      }
      acc += term.coeff * dval;
    }
    out[i] = std::move(acc);
  }
  return out;
}

CVector Machine::differential(const FramedRep& p, const MetricSignature& sig, const FormTree& form,
                              const CVector& x, const RepDirection& v) const {
  const Realization r = realize(p, sig);
  Tape tape;
  forward(r, x, &tape);
  const auto dH = metric_tangent(p, r.metric, v);
  const auto dEdge = edge_tangents(tree_, p, r.metric, dH, v);
  CVector total = CVector::Zero(output_dim());
  for (const auto& summand : form.summands) {
    const auto target = static_cast<std::size_t>(summand.node());
    CVector u = dEdge[target] * tape.out[target];
    for (std::size_t k = summand.chain.size() - 1; k-- > 0;) {
      const auto ni = static_cast<std::size_t>(summand.chain[k]);
      const TreeNode& node = tree_.node(summand.chain[k]);
      u = r.edge[ni] * catalog_->get(node.activation).jvp(tape.z[ni], u);
    }
    total += u;
  }
  return total;
}

RVector finite_difference_gradient(const Machine& machine, const FramedRep& p,
                                   const MetricSignature& sig, const Dataset& data, double step) {
  const RVector x = to_params(p);
  RVector g(x.size());
  RVector y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    y(i) = x(i) + step;
    const double fp = machine.cost(from_params(p.quiver_ptr(), y, p.mode()), sig, data);
    y(i) = x(i) - step;
    const double fm = machine.cost(from_params(p.quiver_ptr(), y, p.mode()), sig, data);
    y(i) = x(i);
    g(i) = (fp - fm) / (2 * step);
  }
  return g;
}

double relative_gradient_error(const RVector& g, const RVector& fd) {
  if (g.size() == 0) return 0.0;
  const double scale = fd.cwiseAbs().maxCoeff();
  const double err = (g - fd).cwiseAbs().maxCoeff();
  return scale > 0.0 ? err / scale : err;
}

double hessian_asymmetry(const Machine& machine, const FramedRep& p, const MetricSignature& sig,
                         const Dataset& data, double step) {
  const RVector x = to_params(p);
  const Eigen::Index n = x.size();
  RMatrix h(n, n);
  RVector y = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    y(j) = x(j) + step;
    const RVector gp = machine.backward(from_params(p.quiver_ptr(), y, p.mode()), sig, data).params;
    y(j) = x(j) - step;
    const RVector gm = machine.backward(from_params(p.quiver_ptr(), y, p.mode()), sig, data).params;
    y(j) = x(j);
    h.col(j) = (gp - gm) / (2 * step);
  }
  const double scale = h.cwiseAbs().maxCoeff();
  const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
  return scale > 0.0 ? asym / scale : asym;
}

Dataset teacher_dataset(const Machine& machine, const FramedRep& teacher,
                        const MetricSignature& sig, std::size_t count, std::uint64_t seed,
                        double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, scale);
  const Realization r = machine.realize(teacher, sig);
  Dataset data;
  for (std::size_t s = 0; s < count; ++s) {
    CVector x(machine.input_dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double re = nd(rng);
      const double im = teacher.mode() == ScalarMode::Complex ? nd(rng) : 0.0;
      x(i) = Complex(re, im);
    }
    data.push_back({x, machine.forward(r, x)});
  }
  return data;
}

}  // namespace qml
