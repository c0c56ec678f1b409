#include "quiverml/checks.hpp"

#include <random>

#include "quiverml/errors.hpp"

namespace qml {

namespace {

constexpr int kPoints = 5;

CheckResult finish(std::string name, double deviation, double tol, std::string detail = {}) {
  return {std::move(name), deviation <= tol, deviation, tol, std::move(detail)};
}

template <class F>
CheckResult guarded(const std::string& name, double tol, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return {name, false, std::numeric_limits<double>::infinity(), tol, e.what()};
  }
}

bool chart_ready(const Quiver& q) {
  for (const auto& v : q.vertices()) {
    if (v.n < v.d) return false;
  }
  return true;
}

// Hyperbolic sample whose forms keep a margin from the boundary.
FramedRep interior_point(std::shared_ptr<const Quiver> q, std::uint64_t seed, ScalarMode mode) {
  SampleOptions opts;
  opts.scale = 0.4;
  opts.mode = mode;
  for (std::uint64_t k = 0; k < 100; ++k) {
    FramedRep p = random_rep(q, seed + 1000 * k, SampleDomain::Hyperbolic, opts);
    double lo = 1.0;
    for (double e : in_domain(p, MetricSignature::hyperbolic()).min_eigenvalue) lo = std::min(lo, e);
    if (lo > 0.05) return p;
  }
  throw DomainSamplingFailed("no well-conditioned hyperbolic point found");
}

FramedRep any_point(const RunConfig& cfg, std::uint64_t seed) {
  if (chart_ready(*cfg.quiver)) return interior_point(cfg.quiver, seed, cfg.train.mode);
  return random_rep(cfg.quiver, seed, SampleDomain::Stable, {0.5, 200, false, cfg.train.mode});
}

std::vector<MetricSignature> signatures_for(const RunConfig& cfg) {
  std::vector<MetricSignature> out{MetricSignature::compact()};
  if (chart_ready(*cfg.quiver)) {
    out.push_back(MetricSignature::euclidean());
    out.push_back(MetricSignature::hyperbolic());
  }
  if (!cfg.train.signature.preset()) out.push_back(cfg.train.signature);
  return out;
}

Dataset check_data(const RunConfig& cfg, const Machine& m, std::uint64_t seed) {
  Dataset data(cfg.data.begin(), cfg.data.begin() + std::min<std::size_t>(cfg.data.size(), 8));
  if (!data.empty()) return data;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const bool real = cfg.train.mode == ScalarMode::Real;
  auto vec = [&](int n) {
    CVector v(n);
    for (int k = 0; k < n; ++k) {
      const double re = nd(rng);
      const double im = real ? 0.0 : nd(rng);
      v(k) = Complex(re, im);
    }
    return v;
  };
  for (int s = 0; s < 6; ++s) {
    CVector x = vec(m.input_dim());
    data.push_back({std::move(x), vec(m.output_dim())});
  }
  return data;
}

double relative(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

double relative(const CMatrix& a, const CMatrix& b) {
  if (a.size() == 0) return 0.0;
  return max_abs_diff(a, b) / std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace

nlohmann::json to_json(const CheckResult& r) {
  nlohmann::json j = {{"name", r.name}, {"passed", r.passed}, {"tolerance", r.tolerance}};
  j["deviation"] = std::isfinite(r.deviation) ? nlohmann::json(r.deviation) : nlohmann::json(nullptr);
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

CheckResult check_equivariance(const RunConfig& cfg, std::uint64_t seed, double tol) {
  return guarded("equivariance", tol, [&] {
    const Machine machine(parse_algorithm(cfg.algorithm, cfg.quiver));
    const Dataset data = check_data(cfg, machine, seed);
    const Quiver& q = *cfg.quiver;
    double dev = 0.0;
    for (int k = 0; k < kPoints; ++k) {
      const FramedRep p = any_point(cfg, seed + k);
      const GaugeElement g = random_gauge(q, seed + 100 + k, 0.3, cfg.train.mode);
      const FramedRep gp = act(g, p);
      for (const auto& sig : signatures_for(cfg)) {
        const auto dp = in_domain(p, sig);
        const auto dg = in_domain(gp, sig);
        if (dp.ok != dg.ok) dev = std::max(dev, 1.0);
        if (!dp.ok) continue;
        const auto mp = evaluate_metric(p, sig);
        const auto mg = evaluate_metric(gp, sig);
        for (std::size_t i = 0; i < q.num_vertices(); ++i) {
          dev = std::max(dev, relative(mg.form[i], g.g[i] * mp.form[i] * g.g[i].adjoint()));
        }
        dev = std::max(dev, relative(machine.cost(gp, sig, data), machine.cost(p, sig, data)));
        const CVector fp = machine.forward(p, sig, data[0].x);
        const CVector fg = machine.forward(gp, sig, data[0].x);
        dev = std::max(dev, relative(CMatrix(fg), CMatrix(fp)));
      }
    }
    return finish("equivariance", dev, tol);
  });
}

CheckResult check_recursion_vs_pathsum(const RunConfig& cfg, std::uint64_t seed, double tol) {
  return guarded("recursion_vs_pathsum", tol, [&] {
    const Quiver& q = *cfg.quiver;
    double dev = 0.0;
    for (int k = 0; k < kPoints; ++k) {
      const FramedRep p = any_point(cfg, seed + k);
      for (const auto& sig : signatures_for(cfg)) {
        if (!sig.is_uniform()) continue;
        const auto rec = metric_recursive(p, sig);
        for (const auto& v : q.vertices()) {
          const std::size_t i = q.vertex_index(v.id);
          dev = std::max(dev, relative(rec.form[i], quadratic_form_pathsum(p, v.id, sig)));
        }
      }
    }
    return finish("recursion_vs_pathsum", dev, tol);
  });
}

CheckResult check_gradient_fd(const RunConfig& cfg, std::uint64_t seed, double tol) {
  return guarded("gradient_fd", tol, [&] {
    if (!chart_ready(*cfg.quiver)) {
      return CheckResult{"gradient_fd", false, 0.0, tol, "needs n >= d at every vertex"};
    }
    const Machine machine(parse_algorithm(cfg.algorithm, cfg.quiver));
    const Dataset data = check_data(cfg, machine, seed);
    double dev = 0.0;
    for (int k = 0; k < 2; ++k) {
      const FramedRep p = interior_point(cfg.quiver, seed + 10 + k, cfg.train.mode);
      for (const auto& sig : signatures_for(cfg)) {
        if (!in_domain(p, sig).ok) continue;
        const auto g = machine.backward(p, sig, data);
        dev = std::max(dev, relative_gradient_error(g.params, finite_difference_gradient(machine, p, sig, data)));
      }
    }
    return finish("gradient_fd", dev, tol);
  });
}

CheckResult check_grassmann_roundtrip(const RunConfig& cfg, std::uint64_t seed, double tol) {
  return guarded("grassmann_roundtrip", tol, [&] {
    if (!chart_ready(*cfg.quiver)) {
      return CheckResult{"grassmann_roundtrip", false, 0.0, tol, "needs n >= d at every vertex"};
    }
    const Quiver& q = *cfg.quiver;
    double dev = 0.0;
    for (int k = 0; k < 2 * kPoints; ++k) {
      const FramedRep p = interior_point(cfg.quiver, seed + 20 + k, cfg.train.mode);
      const GrassmannCoords c = grassmann_map(p);
      const auto m = evaluate_metric(p, MetricSignature::hyperbolic());
      for (std::size_t i = 0; i < q.num_vertices(); ++i) {
        const CMatrix& w = c.W[i];
        const CMatrix h = (CMatrix::Identity(w.rows(), w.rows()) - w * w.adjoint()).inverse();
        dev = std::max(dev, relative(h, m.H[i]));
      }
      dev = std::max(dev, grassmann_inverse(c).max_abs_diff(p));
    }
    return finish("grassmann_roundtrip", dev, tol);
  });
}

CheckResult check_hyperbolic_sigma(std::uint64_t seed, double tol) {
  return guarded("hyperbolic_sigma", tol, [&] {
    double dev = 0.0;
    for (int n = 1; n <= 3; ++n) {
      for (std::uint64_t k = 0; k < 5; ++k) dev = std::max(dev, hyperbolic_sigma_check(n, seed + k));
    }
    return finish("hyperbolic_sigma", dev, tol);
  });
}

CheckResult check_reineke_dimension(const RunConfig& cfg, std::uint64_t seed) {
  return guarded("reineke_dimension", 0.0, [&] {
    const Quiver& q = *cfg.quiver;
    long gauge = 0;
    for (const auto& v : q.vertices()) gauge += static_cast<long>(v.d) * v.d;
    const long dim = moduli_dimension(q);
    double dev = std::abs(static_cast<double>(dim - (representation_space_dimension(q) - gauge)));
    const FramedRep p = random_rep(cfg.quiver, seed, SampleDomain::Stable, {0.5, 200, false, cfg.train.mode});
    const int rank = numerical_rank(linearized_action(p), 1e-10);
    dev = std::max(dev, std::abs(static_cast<double>(rank - gauge)));
    return finish("reineke_dimension", dev, 0.0,
                  "dimension " + std::to_string(dim) + ", action rank " + std::to_string(rank));
  });
}

std::vector<CheckResult> run_checks(const RunConfig& cfg, std::uint64_t seed, double scale) {
  return {check_equivariance(cfg, seed, 1e-8 * scale),
          check_recursion_vs_pathsum(cfg, seed, 1e-10 * scale),
          check_gradient_fd(cfg, seed, 1e-5 * scale),
          check_grassmann_roundtrip(cfg, seed, 1e-10 * scale),
          check_hyperbolic_sigma(seed, 1e-5 * scale),
          check_reineke_dimension(cfg, seed)};
}

}  // namespace qml
