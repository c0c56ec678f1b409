#include "quiverml/metric.hpp"

#include <cmath>
#include <sstream>

#include "quiverml/errors.hpp"

namespace qml {

namespace {

// Number of leading framing columns treated as the basis part.
Eigen::Index basis_cols(const VertexSpec& v) { return std::min(v.n, v.d); }

CMatrix outer(const CMatrix& a) { return a * a.adjoint(); }

CMatrix trivial_term(const FramedRep& p, std::size_t i, double alpha) {
  const auto& v = p.quiver().vertices()[i];
  const Eigen::Index k = basis_cols(v);
  const CMatrix& e = p.e(i);
  return outer(e.leftCols(k)) + alpha * outer(e.rightCols(v.n - k));
}

CMatrix invert_form(const CMatrix& f, int vertex_id) {
  if (!is_invertible(f)) {
    throw SingularForm(vertex_id, "quadratic form at vertex " + std::to_string(vertex_id) +
                                      " is singular");
  }
  return hermitian_part(f.inverse());
}

// Path matrices w_gamma e_t for each nontrivial path into `id`, with the
// path's coefficient.
struct PathTerm {
  Path path;
  double coeff;
};

std::vector<PathTerm> nontrivial_paths(const Quiver& q, int id, const MetricSignature& sig) {
  std::vector<PathTerm> out;
  for (auto& path : q.paths_into(id)) {
    if (path.trivial()) continue;
    const double c = sig.coeff(path);
    out.push_back({std::move(path), c});
  }
  return out;
}

}  // namespace

MetricSignature MetricSignature::uniform(double s) {
  MetricSignature sig;
  sig.alpha = s;
  sig.path_default = s;
  return sig;
}

MetricSignature MetricSignature::of(Preset p) {
  switch (p) {
    case Preset::Compact: return compact();
    case Preset::Euclidean: return euclidean();
    case Preset::Hyperbolic: return hyperbolic();
  }
  return compact();
}

bool MetricSignature::is_uniform() const {
  if (path_default != alpha) return false;
  for (const auto& [key, c] : path_coeffs) {
    if (c != alpha) return false;
  }
  return true;
}

std::optional<double> MetricSignature::uniform_value() const {
  if (!is_uniform()) return std::nullopt;
  return alpha;
}

std::optional<Preset> MetricSignature::preset() const {
  if (!is_uniform()) return std::nullopt;
  if (alpha == 1.0) return Preset::Compact;
  if (alpha == 0.0) return Preset::Euclidean;
  if (alpha == -1.0) return Preset::Hyperbolic;
  return std::nullopt;
}

double MetricSignature::coeff(const Path& p) const {
  if (p.trivial()) return 1.0;
  auto it = path_coeffs.find(to_string(p));
  return it == path_coeffs.end() ? path_default : it->second;
}

std::string MetricSignature::name() const {
  if (auto pr = preset()) return to_string(*pr);
  std::ostringstream os;
  os.precision(17);
  if (is_uniform()) {
    os << "uniform(" << alpha << ")";
  } else {
    os << "general(alpha=" << alpha << ", default=" << path_default << ", "
       << path_coeffs.size() << " path overrides)";
  }
  return os.str();
}

std::string to_string(Preset p) {
  switch (p) {
    case Preset::Compact: return "compact";
    case Preset::Euclidean: return "euclidean";
    case Preset::Hyperbolic: return "hyperbolic";
  }
  return "compact";
}

Preset preset_from_string(const std::string& s) {
  if (s == "compact") return Preset::Compact;
  if (s == "euclidean") return Preset::Euclidean;
  if (s == "hyperbolic") return Preset::Hyperbolic;
  throw ConfigError("unknown signature preset '" + s + "'");
}

void validate_signature(const MetricSignature& sig, const Quiver& q) {
  if (sig.path_coeffs.empty()) return;
  std::map<std::string, bool> known;
  for (const auto& v : q.vertices()) {
    for (const auto& path : q.paths_into(v.id)) {
      if (!path.trivial()) known[to_string(path)] = true;
    }
  }
  for (const auto& [key, c] : sig.path_coeffs) {
    if (!known.count(key)) {
      throw ConfigError("signature path '" + key + "' is not a nontrivial path of the quiver");
    }
    if (!std::isfinite(c)) throw ConfigError("signature coefficient for '" + key + "' is not finite");
  }
}

CMatrix rho(const FramedRep& p, int id) {
  const Quiver& q = p.quiver();
  const auto paths = q.paths_into(id);
  const int d = q.vertex(id).d;
  Eigen::Index cols = 0;
  for (const auto& path : paths) cols += q.vertex(path.source).n;
  CMatrix out(d, cols);
  Eigen::Index pos = 0;
  for (const auto& path : paths) {
    const CMatrix& e = p.e(q.vertex_index(path.source));
    out.middleCols(pos, e.cols()) = p.path_matrix(path) * e;
    pos += e.cols();
  }
  return out;
}

CMatrix quadratic_form_pathsum(const FramedRep& p, int id, const MetricSignature& sig) {
  const Quiver& q = p.quiver();
  CMatrix f = trivial_term(p, q.vertex_index(id), sig.alpha);
  for (const auto& term : nontrivial_paths(q, id, sig)) {
    if (term.coeff == 0.0) continue;
    const CMatrix m = p.path_matrix(term.path) * p.e(q.vertex_index(term.path.source));
    f += term.coeff * outer(m);
  }
  return hermitian_part(f);
}

CMatrix metric_pathsum(const FramedRep& p, int id, const MetricSignature& sig) {
  return invert_form(quadratic_form_pathsum(p, id, sig), id);
}

namespace {

// Forms without inversion; shared by evaluation and the domain check.
void assemble_forms(const FramedRep& p, const MetricSignature& sig, MetricState& m) {
  const Quiver& q = p.quiver();
  const std::size_t nv = q.num_vertices();
  m.signature = sig;
  m.compact.assign(nv, CMatrix());
  m.form.assign(nv, CMatrix());
  if (auto s = sig.uniform_value()) {
    for (std::size_t i : q.topological_indices()) {
      const auto& v = q.vertices()[i];
      const Eigen::Index k = basis_cols(v);
      const CMatrix& e = p.e(i);
      CMatrix inner = CMatrix::Zero(v.d, v.d);
      for (std::size_t a : q.arrows_into(i)) {
        const std::size_t t = q.vertex_index(q.arrows()[a].src);
        inner += p.w(a) * m.compact[t] * p.w(a).adjoint();
      }
      const CMatrix basis = outer(e.leftCols(k));
      const CMatrix bias = outer(e.rightCols(v.n - k));
      m.compact[i] = hermitian_part(basis + bias + inner);
      m.form[i] = hermitian_part(basis + *s * (bias + inner));
    }
  } else {
    const MetricSignature compact = MetricSignature::compact();
    for (std::size_t i = 0; i < nv; ++i) {
      const int id = q.vertices()[i].id;
      m.compact[i] = quadratic_form_pathsum(p, id, compact);
      m.form[i] = quadratic_form_pathsum(p, id, sig);
    }
  }
}

}  // namespace

MetricState metric_recursive(const FramedRep& p, const MetricSignature& sig) {
  if (!sig.is_uniform()) {
    throw ConfigError("the metric recursion requires a uniform signature; use path sums");
  }
  return evaluate_metric(p, sig);
}

MetricState evaluate_metric(const FramedRep& p, const MetricSignature& sig) {
  MetricState m;
  assemble_forms(p, sig, m);
  const Quiver& q = p.quiver();
  m.H.resize(q.num_vertices());
  for (std::size_t i : q.topological_indices()) {
    m.H[i] = invert_form(m.form[i], q.vertices()[i].id);
  }
  return m;
}

DomainReport in_domain(const FramedRep& p, const MetricSignature& sig) {
  DomainReport r;
  MetricState m;
  assemble_forms(p, sig, m);
  const Quiver& q = p.quiver();
  r.min_eigenvalue.resize(q.num_vertices());
  for (std::size_t i : q.topological_indices()) {
    const double lam = min_eigenvalue(m.form[i]);
    r.min_eigenvalue[i] = lam;
    const bool pd = lam > 0.0 && logdet_pd(m.form[i]).has_value() && std::isfinite(lam);
    if (!pd && r.ok) {
      r.ok = false;
      r.failing_vertex = q.vertices()[i].id;
    }
  }
  return r;
}

std::vector<CMatrix> metric_tangent(const FramedRep& p, const MetricState& m,
                                    const RepDirection& v) {
  const Quiver& q = p.quiver();
  const std::size_t nv = q.num_vertices();
  std::vector<CMatrix> dF(nv);
  auto sym = [](const CMatrix& a, const CMatrix& da) -> CMatrix {
    CMatrix x = da * a.adjoint();
    return x + x.adjoint();
  };
  if (auto s = m.signature.uniform_value()) {
    std::vector<CMatrix> dC(nv);
    for (std::size_t i : q.topological_indices()) {
      const auto& spec = q.vertices()[i];
      const Eigen::Index k = basis_cols(spec);
      CMatrix inner = CMatrix::Zero(spec.d, spec.d);
      for (std::size_t a : q.arrows_into(i)) {
        const std::size_t t = q.vertex_index(q.arrows()[a].src);
        CMatrix x = v.w[a] * m.compact[t] * p.w(a).adjoint();
        inner += x + x.adjoint() + p.w(a) * dC[t] * p.w(a).adjoint();
      }
      const CMatrix dbasis = sym(p.e(i).leftCols(k), v.e[i].leftCols(k));
      const CMatrix dbias = sym(p.e(i).rightCols(spec.n - k), v.e[i].rightCols(spec.n - k));
      dC[i] = dbasis + dbias + inner;
      dF[i] = dbasis + *s * (dbias + inner);
    }
  } else {
    for (std::size_t i = 0; i < nv; ++i) {
      const auto& spec = q.vertices()[i];
      const Eigen::Index k = basis_cols(spec);
      dF[i] = sym(p.e(i).leftCols(k), v.e[i].leftCols(k)) +
              m.signature.alpha * sym(p.e(i).rightCols(spec.n - k), v.e[i].rightCols(spec.n - k));
      for (const auto& term : nontrivial_paths(q, spec.id, m.signature)) {
        if (term.coeff == 0.0) continue;
        const std::size_t src = q.vertex_index(term.path.source);
        // Product rule along w_{a_r} ... w_{a_1} e.
        CMatrix val = p.e(src);
        CMatrix dval = v.e[src];
        for (int id : term.path.arrows) {
          const std::size_t a = q.arrow_index(id);
          dval = v.w[a] * val + p.w(a) * dval;
          val = p.w(a) * val;
        }
        dF[i] += term.coeff * sym(val, dval);
      }
    }
  }
  std::vector<CMatrix> dH(nv);
  for (std::size_t i = 0; i < nv; ++i) dH[i] = -m.H[i] * dF[i] * m.H[i];
  return dH;
}

RepDirection metric_vjp(const FramedRep& p, const MetricState& m,
                        const std::vector<CMatrix>& grad_H) {
  const Quiver& q = p.quiver();
  const std::size_t nv = q.num_vertices();
  RepDirection g = RepDirection::zeros_like(p);
  std::vector<CMatrix> gF(nv);
  for (std::size_t i = 0; i < nv; ++i) gF[i] = -m.H[i] * grad_H[i] * m.H[i];

  if (auto s = m.signature.uniform_value()) {
    std::vector<CMatrix> gC(nv);
    for (std::size_t i = 0; i < nv; ++i) {
      gC[i] = CMatrix::Zero(q.vertices()[i].d, q.vertices()[i].d);
    }
    const auto order = q.topological_indices();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t i = *it;
      const auto& spec = q.vertices()[i];
      const Eigen::Index k = basis_cols(spec);
      const CMatrix symF = gF[i] + gF[i].adjoint();
      const CMatrix symC = gC[i] + gC[i].adjoint();
      g.e[i].leftCols(k) += (symF + symC) * p.e(i).leftCols(k);
      g.e[i].rightCols(spec.n - k) += (*s * symF + symC) * p.e(i).rightCols(spec.n - k);
      const CMatrix gS = *s * gF[i] + gC[i];
      const CMatrix symS = gS + gS.adjoint();
      for (std::size_t a : q.arrows_into(i)) {
        const std::size_t t = q.vertex_index(q.arrows()[a].src);
        g.w[a] += symS * p.w(a) * m.compact[t];
        gC[t] += p.w(a).adjoint() * gS * p.w(a);
      }
    }
  } else {
    for (std::size_t i = 0; i < nv; ++i) {
      const auto& spec = q.vertices()[i];
      const Eigen::Index k = basis_cols(spec);
      const CMatrix symF = gF[i] + gF[i].adjoint();
      g.e[i].leftCols(k) += symF * p.e(i).leftCols(k);
      g.e[i].rightCols(spec.n - k) += m.signature.alpha * symF * p.e(i).rightCols(spec.n - k);
      for (const auto& term : nontrivial_paths(q, spec.id, m.signature)) {
        if (term.coeff == 0.0) continue;
        const std::size_t src = q.vertex_index(term.path.source);
        // prefix[j] = w_{a_j} ... w_{a_1} e
        std::vector<CMatrix> prefix{p.e(src)};
        for (int id : term.path.arrows) prefix.push_back(p.w(q.arrow_index(id)) * prefix.back());
        CMatrix gP = term.coeff * symF * prefix.back();
        for (std::size_t j = term.path.arrows.size(); j-- > 0;) {
          const std::size_t a = q.arrow_index(term.path.arrows[j]);
          g.w[a] += gP * prefix[j].adjoint();
          gP = p.w(a).adjoint() * gP;
        }
        g.e[src] += gP;
      }
    }
  }
  return g;
}

double potential_scale(const MetricSignature& sig) {
  if (auto s = sig.uniform_value()) return *s == 0.0 ? 0.0 : 1.0 / *s;
  if (sig.alpha > 0.0) return 1.0;
  if (sig.alpha < 0.0) return -1.0;
  return 0.0;
}

double kahler_potential(std::shared_ptr<const Quiver> q, const CVector& z,
                        const MetricSignature& sig) {
  const FramedRep p = from_chart(std::move(q), z);
  MetricState m;
  assemble_forms(p, sig, m);
  double acc = 0.0;
  for (std::size_t i = 0; i < m.form.size(); ++i) {
    auto ld = logdet_pd(m.form[i]);
    if (!ld) {
      throw OutOfDomain("quadratic form at vertex " +
                        std::to_string(p.quiver().vertices()[i].id) +
                        " is not positive-definite");
    }
    acc += *ld;
  }
  return potential_scale(sig) * acc;
}

namespace {

RMatrix potential_hessian(std::shared_ptr<const Quiver> q, const RVector& x,
                          const MetricSignature& sig, double h) {
  return fd_hessian([&](const RVector& y) { return kahler_potential(q, real_to_chart(y), sig); },
                    x, h);
}

}  // namespace

CMatrix moduli_metric_tensor(const FramedRep& p_chart, const MetricSignature& sig,
                             const TensorOptions& opts) {
  if (!is_gauge_fixed(p_chart, 1e-12)) {
    throw SingularBasisPart("moduli metric tensor requires a gauge-fixed point");
  }
  const auto q = p_chart.quiver_ptr();
  const Eigen::Index dim = static_cast<Eigen::Index>(chart_dimension(*q));
  if (potential_scale(sig) == 0.0) return CMatrix::Identity(dim, dim);
  if (!in_domain(p_chart, sig).ok) throw OutOfDomain("point is outside the signature domain");

  const RVector x = chart_to_real(to_chart(p_chart));
  CMatrix m;
  try {
    m = wirtinger_tensor(potential_hessian(q, x, sig, opts.step));
    if (opts.richardson) {
      const CMatrix coarse = wirtinger_tensor(potential_hessian(q, x, sig, 2.0 * opts.step));
      m = (4.0 * m - coarse) / 3.0;
    }
  } catch (const OutOfDomain&) {
    throw OutOfDomain("finite-difference stencil leaves the signature domain");
  }
  if (p_chart.mode() == ScalarMode::Real) m = m.real().cast<Complex>();
  const double lam = min_eigenvalue(m);
  if (!(lam >= opts.min_eigenvalue)) {
    throw NonPositive("moduli metric tensor has smallest eigenvalue " + std::to_string(lam));
  }
  return m;
}

}  // namespace qml
