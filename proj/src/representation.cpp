#include "quiverml/representation.hpp"

#include <random>

#include "quiverml/errors.hpp"
#include "quiverml/metric.hpp"

namespace qml {

namespace {

constexpr double kStabilityRankTol = 1e-10;

CMatrix gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                 double scale, ScalarMode mode) {
  std::normal_distribution<double> nd(0.0, scale);
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = nd(rng);
      const double im = mode == ScalarMode::Complex ? nd(rng) : 0.0;
      m(i, j) = Complex(re, im);
    }
  }
  return m;
}

// Orthonormal basis of the column span (threshold relative to the largest
// singular value).
CMatrix column_span(const CMatrix& a) {
  if (a.cols() == 0 || a.rows() == 0) return CMatrix(a.rows(), 0);
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return CMatrix(a.rows(), 0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > kStabilityRankTol * s(0)) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

}  // namespace

FramedRep::FramedRep(std::shared_ptr<const Quiver> quiver,
                     std::vector<CMatrix> arrows, std::vector<CMatrix> framing,
                     ScalarMode mode)
    : quiver_(std::move(quiver)),
      arrows_(std::move(arrows)),
      framing_(std::move(framing)),
      mode_(mode) {
  validate();
}

FramedRep FramedRep::zeros(std::shared_ptr<const Quiver> quiver, ScalarMode mode) {
  std::vector<CMatrix> arrows;
  for (const auto& a : quiver->arrows()) {
    arrows.push_back(CMatrix::Zero(quiver->vertex(a.dst).d, quiver->vertex(a.src).d));
  }
  std::vector<CMatrix> framing;
  for (const auto& v : quiver->vertices()) framing.push_back(CMatrix::Zero(v.d, v.n));
  return FramedRep(std::move(quiver), std::move(arrows), std::move(framing), mode);
}

FramedRep FramedRep::anchor(std::shared_ptr<const Quiver> quiver, ScalarMode mode) {
  FramedRep p = zeros(quiver, mode);
  for (std::size_t i = 0; i < quiver->num_vertices(); ++i) {
    const auto& v = quiver->vertices()[i];
    if (v.n < v.d) {
      throw ShapeError("vertex " + std::to_string(v.id) + " has n < d; no basis part");
    }
    p.framing_[i].leftCols(v.d).setIdentity();
  }
  return p;
}

CMatrix FramedRep::basis(std::size_t v) const {
  const auto& spec = quiver_->vertices()[v];
  if (spec.n < spec.d) throw ShapeError("vertex " + std::to_string(spec.id) + " has n < d");
  return framing_[v].leftCols(spec.d);
}

CMatrix FramedRep::bias(std::size_t v) const {
  const auto& spec = quiver_->vertices()[v];
  if (spec.n < spec.d) throw ShapeError("vertex " + std::to_string(spec.id) + " has n < d");
  return framing_[v].rightCols(spec.n - spec.d);
}

CMatrix FramedRep::path_matrix(const Path& p) const {
  const int d = quiver_->vertex(p.source).d;
  CMatrix m = CMatrix::Identity(d, d);
  for (int id : p.arrows) m = arrows_[quiver_->arrow_index(id)] * m;
  return m;
}

void FramedRep::validate() const {
  const Quiver& q = *quiver_;
  if (arrows_.size() != q.num_arrows() || framing_.size() != q.num_vertices()) {
    throw ShapeError("representation does not match quiver size");
  }
  for (std::size_t k = 0; k < q.num_arrows(); ++k) {
    const auto& a = q.arrows()[k];
    if (arrows_[k].rows() != q.vertex(a.dst).d || arrows_[k].cols() != q.vertex(a.src).d) {
      throw ShapeError("arrow " + std::to_string(a.id) + " has wrong shape");
    }
  }
  for (std::size_t i = 0; i < q.num_vertices(); ++i) {
    const auto& v = q.vertices()[i];
    if (framing_[i].rows() != v.d || framing_[i].cols() != v.n) {
      throw ShapeError("framing at vertex " + std::to_string(v.id) + " has wrong shape");
    }
  }
  if (mode_ == ScalarMode::Real) {
    for (const auto& m : arrows_) {
      if (max_abs_imag(m) != 0.0) throw ShapeError("real-mode arrow matrix has imaginary part");
    }
    for (const auto& m : framing_) {
      if (max_abs_imag(m) != 0.0) throw ShapeError("real-mode framing has imaginary part");
    }
  }
}

void FramedRep::enforce_mode() {
  if (mode_ != ScalarMode::Real) return;
  for (auto& m : arrows_) m = m.real().cast<Complex>();
  for (auto& m : framing_) m = m.real().cast<Complex>();
}

double FramedRep::max_abs_diff(const FramedRep& other) const {
  double worst = 0.0;
  for (std::size_t k = 0; k < arrows_.size(); ++k) {
    worst = std::max(worst, qml::max_abs_diff(arrows_[k], other.arrows_[k]));
  }
  for (std::size_t i = 0; i < framing_.size(); ++i) {
    worst = std::max(worst, qml::max_abs_diff(framing_[i], other.framing_[i]));
  }
  return worst;
}

bool FramedRep::identical(const FramedRep& other) const {
  if (mode_ != other.mode_) return false;
  for (std::size_t k = 0; k < arrows_.size(); ++k) {
    if (arrows_[k] != other.arrows_[k]) return false;
  }
  for (std::size_t i = 0; i < framing_.size(); ++i) {
    if (framing_[i] != other.framing_[i]) return false;
  }
  return true;
}

GaugeElement GaugeElement::identity(const Quiver& q) {
  GaugeElement g;
  for (const auto& v : q.vertices()) g.g.push_back(CMatrix::Identity(v.d, v.d));
  return g;
}

GaugeElement GaugeElement::operator*(const GaugeElement& other) const {
  GaugeElement out;
  for (std::size_t i = 0; i < g.size(); ++i) out.g.push_back(g[i] * other.g[i]);
  return out;
}

GaugeElement GaugeElement::inverse() const {
  GaugeElement out;
  for (const auto& m : g) {
    if (!is_invertible(m)) throw SingularGauge("gauge block is not invertible");
    out.g.push_back(m.inverse());
  }
  return out;
}

GaugeElement random_gauge(const Quiver& q, std::uint64_t seed, double scale,
                          ScalarMode mode) {
  std::mt19937_64 rng(seed);
  GaugeElement g;
  for (const auto& v : q.vertices()) {
    for (int attempt = 0;; ++attempt) {
      CMatrix m = CMatrix::Identity(v.d, v.d) + gaussian(rng, v.d, v.d, scale, mode);
      if (rcond(m) > 1e-3) {
        g.g.push_back(std::move(m));
        break;
      }
      if (attempt > 100) throw SingularGauge("could not sample an invertible gauge block");
    }
  }
  return g;
}

FramedRep act(const GaugeElement& g, const FramedRep& p) {
  const Quiver& q = p.quiver();
  if (g.g.size() != q.num_vertices()) throw ShapeError("gauge element has wrong size");
  std::vector<CMatrix> inv;
  for (std::size_t i = 0; i < q.num_vertices(); ++i) {
    const int d = q.vertices()[i].d;
    if (g.g[i].rows() != d || g.g[i].cols() != d) throw ShapeError("gauge block has wrong shape");
    if (!is_invertible(g.g[i])) {
      throw SingularGauge("gauge block at vertex " + std::to_string(q.vertices()[i].id) +
                          " is singular");
    }
    inv.push_back(g.g[i].inverse());
  }
  std::vector<CMatrix> arrows;
  for (std::size_t k = 0; k < q.num_arrows(); ++k) {
    const auto& a = q.arrows()[k];
    arrows.push_back(g.g[q.vertex_index(a.dst)] * p.w(k) * inv[q.vertex_index(a.src)]);
  }
  std::vector<CMatrix> framing;
  for (std::size_t i = 0; i < q.num_vertices(); ++i) framing.push_back(g.g[i] * p.e(i));
  FramedRep out(p.quiver_ptr(), std::move(arrows), std::move(framing), ScalarMode::Complex);
  if (p.mode() == ScalarMode::Real) {
    bool real = true;
    for (const auto& m : out.arrow_matrices()) real = real && max_abs_imag(m) == 0.0;
    for (const auto& m : out.framing_matrices()) real = real && max_abs_imag(m) == 0.0;
    if (real) return FramedRep(p.quiver_ptr(), out.arrow_matrices(), out.framing_matrices(), ScalarMode::Real);
  }
  return out;
}

bool is_stable(const FramedRep& p) {
  const Quiver& q = p.quiver();
  const auto order = q.topological_indices();
  std::vector<CMatrix> span(q.num_vertices());
  for (std::size_t i = 0; i < q.num_vertices(); ++i) span[i] = column_span(p.e(i));
  // For an acyclic quiver one sweep in topological order reaches the fixpoint;
  // iterate anyway until ranks stop changing.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t v : order) {
      CMatrix gens = p.e(v);
      for (std::size_t k : q.arrows_into(v)) {
        const std::size_t t = q.vertex_index(q.arrows()[k].src);
        CMatrix img = p.w(k) * span[t];
        CMatrix joined(gens.rows(), gens.cols() + img.cols());
        joined << gens, img;
        gens = std::move(joined);
      }
      CMatrix next = column_span(gens);
      if (next.cols() != span[v].cols()) changed = true;
      span[v] = std::move(next);
    }
  }
  for (std::size_t i = 0; i < q.num_vertices(); ++i) {
    if (span[i].cols() != q.vertices()[i].d) return false;
  }
  return true;
}

GaugeElement gauge_fixing_element(const FramedRep& p) {
  const Quiver& q = p.quiver();
  GaugeElement g;
  for (std::size_t i = 0; i < q.num_vertices(); ++i) {
    const auto& v = q.vertices()[i];
    if (v.n < v.d) {
      throw SingularBasisPart("vertex " + std::to_string(v.id) + " has n < d; no basis part");
    }
    CMatrix eps = p.basis(i);
    if (!is_invertible(eps)) {
      throw SingularBasisPart("basis part at vertex " + std::to_string(v.id) +
                              " is singular; point lies outside the chart");
    }
    g.g.push_back(eps.inverse());
  }
  return g;
}

FramedRep gauge_fix(const FramedRep& p) {
  FramedRep out = act(gauge_fixing_element(p), p);
  const Quiver& q = p.quiver();
  for (std::size_t i = 0; i < q.num_vertices(); ++i) {
    out.e(i).leftCols(q.vertices()[i].d).setIdentity();
  }
  if (p.mode() == ScalarMode::Real) {
    std::vector<CMatrix> arrows = out.arrow_matrices();
    std::vector<CMatrix> framing = out.framing_matrices();
    for (auto& m : arrows) m = m.real().cast<Complex>();
    for (auto& m : framing) m = m.real().cast<Complex>();
    return FramedRep(p.quiver_ptr(), std::move(arrows), std::move(framing), ScalarMode::Real);
  }
  return out;
}

bool is_gauge_fixed(const FramedRep& p, double tol) {
  const Quiver& q = p.quiver();
  for (std::size_t i = 0; i < q.num_vertices(); ++i) {
    const auto& v = q.vertices()[i];
    if (v.n < v.d) return false;
    if (qml::max_abs_diff(p.basis(i), CMatrix::Identity(v.d, v.d)) > tol) return false;
  }
  return true;
}

FramedRep random_rep(std::shared_ptr<const Quiver> q, std::uint64_t seed,
                     SampleDomain domain, const SampleOptions& opts) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < q->num_vertices(); ++i) {
    const auto& v = q->vertices()[i];
    if (domain == SampleDomain::Stable) {
      if (q->grassmann_ambient(v.id) < v.d) {
        throw DomainSamplingFailed("stable locus is empty at vertex " + std::to_string(v.id));
      }
    } else if (v.n < v.d) {
      throw DomainSamplingFailed("n < d at vertex " + std::to_string(v.id) +
                                 "; signature domain requires n >= d");
    }
  }
  double scale = opts.scale;
  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    std::vector<CMatrix> arrows;
    for (const auto& a : q->arrows()) {
      arrows.push_back(gaussian(rng, q->vertex(a.dst).d, q->vertex(a.src).d, scale, opts.mode));
    }
    std::vector<CMatrix> framing;
    for (const auto& v : q->vertices()) {
      CMatrix e = gaussian(rng, v.d, v.n, scale, opts.mode);
      if (v.n >= v.d) {
        if (opts.fixed_basis) {
          e.leftCols(v.d).setIdentity();
        } else {
          e.leftCols(v.d) += CMatrix::Identity(v.d, v.d);
        }
      }
      framing.push_back(std::move(e));
    }
    FramedRep p(q, std::move(arrows), std::move(framing), opts.mode);
    bool ok = false;
    switch (domain) {
      case SampleDomain::Stable:
        ok = is_stable(p);
        break;
      case SampleDomain::Euclidean:
        ok = in_domain(p, MetricSignature::euclidean()).ok;
        break;
      case SampleDomain::Hyperbolic:
        ok = in_domain(p, MetricSignature::hyperbolic()).ok;
        if (!ok) scale *= 0.8;
        break;
    }
    if (ok) return p;
  }
  throw DomainSamplingFailed("no sample in the requested domain after " +
                             std::to_string(opts.max_attempts) + " attempts");
}

CMatrix linearized_action(const FramedRep& p) {
  const Quiver& q = p.quiver();
  std::vector<Eigen::Index> gl_offset(q.num_vertices());
  Eigen::Index cols = 0;
  for (std::size_t i = 0; i < q.num_vertices(); ++i) {
    gl_offset[i] = cols;
    cols += static_cast<Eigen::Index>(q.vertices()[i].d) * q.vertices()[i].d;
  }
  const Eigen::Index rows = representation_space_dimension(q);
  CMatrix j = CMatrix::Zero(rows, cols);
  for (std::size_t i = 0; i < q.num_vertices(); ++i) {
    const int d = q.vertices()[i].d;
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        CMatrix xi = CMatrix::Zero(d, d);
        xi(r, c) = 1.0;
        const Eigen::Index col = gl_offset[i] + r + static_cast<Eigen::Index>(c) * d;
        Eigen::Index row = 0;
        for (std::size_t k = 0; k < q.num_arrows(); ++k) {
          const auto& a = q.arrows()[k];
          const std::size_t h = q.vertex_index(a.dst);
          const std::size_t t = q.vertex_index(a.src);
          CMatrix delta = CMatrix::Zero(p.w(k).rows(), p.w(k).cols());
          if (h == i) delta += xi * p.w(k);
          if (t == i) delta -= p.w(k) * xi;
          j.block(row, col, delta.size(), 1) = delta.reshaped();
          row += delta.size();
        }
        for (std::size_t v = 0; v < q.num_vertices(); ++v) {
          const Eigen::Index size = p.e(v).size();
          if (v == i && size > 0) {
            CMatrix delta = xi * p.e(v);
            j.block(row, col, size, 1) = delta.reshaped();
          }
          row += size;
        }
      }
    }
  }
  return j;
}

std::size_t chart_dimension(const Quiver& q) {
  std::size_t dim = 0;
  for (const auto& v : q.vertices()) {
    if (v.n < v.d) throw ShapeError("chart requires n >= d at vertex " + std::to_string(v.id));
    dim += static_cast<std::size_t>(v.d) * (v.n - v.d);
  }
  for (const auto& a : q.arrows()) {
    dim += static_cast<std::size_t>(q.vertex(a.dst).d) * q.vertex(a.src).d;
  }
  return dim;
}

CVector to_chart(const FramedRep& p) {
  const Quiver& q = p.quiver();
  CVector z(chart_dimension(q));
  Eigen::Index pos = 0;
  for (std::size_t i = 0; i < q.num_vertices(); ++i) {
    CMatrix b = p.bias(i);
    z.segment(pos, b.size()) = b.reshaped();
    pos += b.size();
  }
  for (std::size_t k = 0; k < q.num_arrows(); ++k) {
    z.segment(pos, p.w(k).size()) = p.w(k).reshaped();
    pos += p.w(k).size();
  }
  return z;
}

FramedRep from_chart(std::shared_ptr<const Quiver> q, const CVector& z, ScalarMode mode) {
  if (static_cast<std::size_t>(z.size()) != chart_dimension(*q)) {
    throw ShapeError("chart vector has wrong length");
  }
  std::vector<CMatrix> framing;
  Eigen::Index pos = 0;
  for (const auto& v : q->vertices()) {
    CMatrix e(v.d, v.n);
    e.leftCols(v.d).setIdentity();
    const Eigen::Index size = static_cast<Eigen::Index>(v.d) * (v.n - v.d);
    e.rightCols(v.n - v.d) = z.segment(pos, size).reshaped(v.d, v.n - v.d);
    pos += size;
    framing.push_back(std::move(e));
  }
  std::vector<CMatrix> arrows;
  for (const auto& a : q->arrows()) {
    const int rows = q->vertex(a.dst).d;
    const int cols = q->vertex(a.src).d;
    arrows.push_back(z.segment(pos, rows * cols).reshaped(rows, cols));
    pos += rows * cols;
  }
  FramedRep p(q, std::move(arrows), std::move(framing), ScalarMode::Complex);
  if (mode == ScalarMode::Real) {
    std::vector<CMatrix> ar = p.arrow_matrices();
    std::vector<CMatrix> fr = p.framing_matrices();
    for (auto& m : ar) m = m.real().cast<Complex>();
    for (auto& m : fr) m = m.real().cast<Complex>();
    return FramedRep(q, std::move(ar), std::move(fr), ScalarMode::Real);
  }
  return p;
}

RepDirection RepDirection::zeros_like(const FramedRep& p) {
  RepDirection v;
  for (const auto& m : p.arrow_matrices()) v.w.push_back(CMatrix::Zero(m.rows(), m.cols()));
  for (const auto& m : p.framing_matrices()) v.e.push_back(CMatrix::Zero(m.rows(), m.cols()));
  return v;
}

RepDirection& RepDirection::operator+=(const RepDirection& o) {
  for (std::size_t k = 0; k < w.size(); ++k) w[k] += o.w[k];
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += o.e[i];
  return *this;
}

RepDirection RepDirection::operator*(double c) const {
  RepDirection v = *this;
  for (auto& m : v.w) m *= c;
  for (auto& m : v.e) m *= c;
  return v;
}

double RepDirection::dot(const RepDirection& o) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) acc += (w[k].conjugate().cwiseProduct(o.w[k])).sum().real();
  for (std::size_t i = 0; i < e.size(); ++i) acc += (e[i].conjugate().cwiseProduct(o.e[i])).sum().real();
  return acc;
}

FramedRep displace(const FramedRep& p, const RepDirection& v, double t) {
  std::vector<CMatrix> arrows = p.arrow_matrices();
  std::vector<CMatrix> framing = p.framing_matrices();
  for (std::size_t k = 0; k < arrows.size(); ++k) arrows[k] += t * v.w[k];
  for (std::size_t i = 0; i < framing.size(); ++i) framing[i] += t * v.e[i];
  return FramedRep(p.quiver_ptr(), std::move(arrows), std::move(framing), ScalarMode::Complex);
}

CVector direction_to_chart(const Quiver& q, const RepDirection& v) {
  CVector z(chart_dimension(q));
  Eigen::Index pos = 0;
  for (std::size_t i = 0; i < q.num_vertices(); ++i) {
    const auto& spec = q.vertices()[i];
    CMatrix b = v.e[i].rightCols(spec.n - spec.d);
    z.segment(pos, b.size()) = b.reshaped();
    pos += b.size();
  }
  for (std::size_t k = 0; k < q.num_arrows(); ++k) {
    z.segment(pos, v.w[k].size()) = v.w[k].reshaped();
    pos += v.w[k].size();
  }
  return z;
}

RepDirection chart_to_direction(const Quiver& q, const CVector& z) {
  if (static_cast<std::size_t>(z.size()) != chart_dimension(q)) {
    throw ShapeError("chart vector has wrong length");
  }
  RepDirection v;
  Eigen::Index pos = 0;
  for (const auto& spec : q.vertices()) {
    CMatrix e = CMatrix::Zero(spec.d, spec.n);
    const Eigen::Index size = static_cast<Eigen::Index>(spec.d) * (spec.n - spec.d);
    e.rightCols(spec.n - spec.d) = z.segment(pos, size).reshaped(spec.d, spec.n - spec.d);
    pos += size;
    v.e.push_back(std::move(e));
  }
  for (const auto& a : q.arrows()) {
    const int rows = q.vertex(a.dst).d;
    const int cols = q.vertex(a.src).d;
    v.w.push_back(z.segment(pos, rows * cols).reshaped(rows, cols));
    pos += rows * cols;
  }
  return v;
}

RVector chart_to_real(const CVector& z) {
  RVector x(2 * z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    x(2 * k) = z(k).real();
    x(2 * k + 1) = z(k).imag();
  }
  return x;
}

CVector real_to_chart(const RVector& x) {
  CVector z(x.size() / 2);
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = Complex(x(2 * k), x(2 * k + 1));
  return z;
}

RVector chart_gradient_to_params(const CVector& g, ScalarMode mode) {
  if (mode == ScalarMode::Complex) return chart_to_real(g);
  return g.real();
}

CVector params_to_chart(const RVector& x, ScalarMode mode) {
  if (mode == ScalarMode::Complex) return real_to_chart(x);
  return x.cast<Complex>();
}

RVector to_params(const FramedRep& p) {
  return chart_gradient_to_params(to_chart(p), p.mode());
}

FramedRep from_params(std::shared_ptr<const Quiver> q, const RVector& x, ScalarMode mode) {
  return from_chart(std::move(q), params_to_chart(x, mode), mode);
}

}  // namespace qml
