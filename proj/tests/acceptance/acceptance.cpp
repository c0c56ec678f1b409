// One PASS/FAIL line per acceptance criterion, with the measured value, its
// tolerance, and the runtime against its limit. Exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "quiverml/errors.hpp"
#include "quiverml/machine.hpp"
#include "quiverml/metric.hpp"
#include "quiverml/trainer.hpp"
#include "quiverml/uniformize.hpp"
#include "support/oracles.hpp"

using namespace qml;
using namespace qml::testing;

namespace {

struct Outcome {
  bool ok = true;
  std::string measured;
};

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double rel(const CMatrix& a, const CMatrix& b) {
  return max_abs_diff(a, b) / std::max(1.0, b.cwiseAbs().maxCoeff());
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

FramedRep interior(QuiverPtr q, std::uint64_t seed, ScalarMode mode, double margin = 0.05) {
  SampleOptions opts;
  opts.scale = 0.4;
  opts.mode = mode;
  for (std::uint64_t k = 0;; ++k) {
    FramedRep p = random_rep(q, seed + 1000 * k, SampleDomain::Hyperbolic, opts);
    double lo = 1.0;
    for (double e : in_domain(p, MetricSignature::hyperbolic()).min_eigenvalue) lo = std::min(lo, e);
    if (lo > margin) return p;
  }
}

Dataset random_data(const Machine& m, int count, std::uint64_t seed, bool real) {
  std::mt19937_64 rng(seed);
  Dataset d;
  for (int s = 0; s < count; ++s) {
    d.push_back({rand_matrix(rng, m.input_dim(), 1, 1.0, real).col(0),
                 rand_matrix(rng, m.output_dim(), 1, 1.0, real).col(0)});
  }
  return d;
}

const std::vector<MetricSignature> kPresets{MetricSignature::compact(), MetricSignature::euclidean(),
                                            MetricSignature::hyperbolic()};

std::vector<std::pair<QuiverPtr, std::string>> test_machines() {
  return {{a2_quiver(), "eout* . a1 . ein"},
          {diamond_quiver(), kDiamondAlgorithm},
          {chain_quiver(), kChainAlgorithm}};
}

// 1
Outcome closed_form_metrics() {
  auto q = a1_quiver(2, 1);
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> radius(0.0, 0.999), angle(0.0, 2 * M_PI);
  double dev = 0.0;
  bool domain_ok = true;
  for (int k = 0; k < 100; ++k) {
    const Complex b = std::polar(radius(rng), angle(rng));
    CMatrix e(1, 2);
    e << 1.0, b;
    FramedRep p(q, {}, {e});
    const double b2 = std::norm(b);
    const auto hc = evaluate_metric(p, MetricSignature::compact()).H[0](0, 0);
    const auto hh = evaluate_metric(p, MetricSignature::hyperbolic()).H[0](0, 0);
    dev = std::max(dev, std::abs(hc - a1_compact_metric(b2)) / a1_compact_metric(b2));
    dev = std::max(dev, std::abs(hh - a1_hyperbolic_metric(b2)) / a1_hyperbolic_metric(b2));
    domain_ok = domain_ok && in_domain(p, MetricSignature::hyperbolic()).ok;
    CMatrix outside(1, 2);
    outside << 1.0, b / std::abs(b) * (1.001 + radius(rng));
    domain_ok = domain_ok && !in_domain(FramedRep(q, {}, {outside}), MetricSignature::hyperbolic()).ok;
  }
  return {dev < 1e-12 && domain_ok, fmt("max_rel_dev=%.3g tol=%.0e", dev, 1e-12) +
                                        (domain_ok ? " domain=|b|<1" : " domain=WRONG")};
}

// 2
Outcome recursion_vs_pathsum() {
  std::mt19937_64 rng(202);
  double dev = 0.0;
  for (int k = 0; k < 20; ++k) {
    auto q = random_acyclic_quiver(rng, 5, 7, 4);
    const FramedRep p = random_rep(q, 300 + k, SampleDomain::Stable, {0.5, 200, true, ScalarMode::Complex});
    for (const auto& sig : kPresets) {
      const auto m = metric_recursive(p, sig);
      for (const auto& v : q->vertices()) {
        const std::size_t i = q->vertex_index(v.id);
        dev = std::max(dev, rel(m.form[i], quadratic_form_pathsum(p, v.id, sig)));
        if (in_domain(p, sig).ok) dev = std::max(dev, rel(m.H[i], metric_pathsum(p, v.id, sig)));
      }
    }
  }
  return {dev < 1e-10, fmt("max_rel_dev=%.3g tol=%.0e", dev, 1e-10)};
}

// 3
Outcome gauge_invariance() {
  auto q = diamond_quiver();
  Machine m(parse_algorithm(kDiamondAlgorithm, q));
  const Dataset data = random_data(m, 6, 3, false);
  const FramedRep p = interior(q, 5, ScalarMode::Complex);
  double dev = 0.0;
  bool domain_same = true;
  for (int k = 0; k < 50; ++k) {
    const GaugeElement g = random_gauge(*q, 400 + k, 0.4);
    const FramedRep gp = act(g, p);
    for (const auto& sig : kPresets) {
      domain_same = domain_same && in_domain(p, sig).ok == in_domain(gp, sig).ok;
      const auto a = evaluate_metric(p, sig);
      const auto b = evaluate_metric(gp, sig);
      for (std::size_t i = 0; i < q->num_vertices(); ++i) {
        dev = std::max(dev, rel(b.form[i], g.g[i] * a.form[i] * g.g[i].adjoint()));
      }
      dev = std::max(dev, rel(m.cost(gp, sig, data), m.cost(p, sig, data)));
      for (const auto& s : data) {
        dev = std::max(dev, rel(CMatrix(m.forward(gp, sig, s.x)), CMatrix(m.forward(p, sig, s.x))));
      }
    }
  }
  return {dev < 1e-8 && domain_same,
          fmt("max_rel_dev=%.3g tol=%.0e", dev, 1e-8) + (domain_same ? "" : " domain=CHANGED")};
}

// 4
Outcome gradient_correctness() {
  MetricSignature general = MetricSignature::uniform(-0.6);
  general.alpha = -0.9;
  std::vector<MetricSignature> sigs = kPresets;
  sigs.push_back(MetricSignature::uniform(0.4));
  sigs.push_back(general);
  double dev = 0.0;
  for (const auto& [q, algo] : test_machines()) {
    Machine m(parse_algorithm(algo, q));
    for (ScalarMode mode : {ScalarMode::Complex, ScalarMode::Real}) {
      const Dataset data = random_data(m, 6, 9, mode == ScalarMode::Real);
      for (std::uint64_t seed = 0; seed < 2; ++seed) {
        const FramedRep p = interior(q, 40 + seed, mode);
        for (const auto& sig : sigs) {
          const auto g = m.backward(p, sig, data);
          dev = std::max(dev, relative_gradient_error(g.params, finite_difference_gradient(m, p, sig, data)));
        }
      }
    }
  }
  double asym = 0.0;
  auto q = diamond_quiver();
  Machine m(parse_algorithm(kDiamondAlgorithm, q));
  const Dataset data = random_data(m, 4, 6, false);
  const FramedRep p = interior(q, 2, ScalarMode::Complex);
  for (const auto& sig : kPresets) asym = std::max(asym, hessian_asymmetry(m, p, sig, data));
  return {dev < 1e-5 && asym < 1e-4,
          fmt("max_rel_grad_err=%.3g tol=%.0e", dev, 1e-5) + fmt(" hessian_asym=%.3g tol=%.0e", asym, 1e-4)};
}

// 5
Outcome kahler_positivity() {
  double lo = std::numeric_limits<double>::infinity();
  int failures = 0;
  for (const auto& [q, algo] : test_machines()) {
    for (const auto& sig : kPresets) {
      for (std::uint64_t k = 0; k < 50; ++k) {
        const FramedRep p = random_rep(q, 600 + k, sig.alpha < 0 ? SampleDomain::Hyperbolic : SampleDomain::Stable,
                                       {0.4, 200, true, ScalarMode::Complex});
        try {
          lo = std::min(lo, min_eigenvalue(moduli_metric_tensor(p, sig)));
        } catch (const Error&) {
          ++failures;
        }
      }
    }
  }
  auto q = a1_quiver(2, 1);
  std::mt19937_64 rng(7);
  double dev = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Complex b = rand_complex(rng, 0.3);
    CMatrix e(1, 2);
    e << 1.0, b;
    FramedRep p(q, {}, {e});
    const double b2 = std::norm(b);
    dev = std::max(dev, std::abs(moduli_metric_tensor(p, MetricSignature::hyperbolic())(0, 0) - poincare_tensor(b2)));
    dev = std::max(dev, std::abs(moduli_metric_tensor(p, MetricSignature::compact())(0, 0) - fubini_study_tensor(b2)));
  }
  return {failures == 0 && lo > 1e-10 && dev < 1e-5,
          fmt("min_eig=%.3g (>1e-10) a1_tensor_dev=%.3g tol=1e-05", lo, dev) +
              (failures ? " failures=" + std::to_string(failures) : "")};
}

// 6
Outcome symplectomorphism() {
  std::mt19937_64 rng(808);
  double dev = 0.0;
  bool real_exact = true;
  for (int k = 0; k < 100; ++k) {
    auto q = (k % 4 == 0) ? diamond_quiver() : random_acyclic_quiver(rng, 5, 6, 3);
    const ScalarMode mode = (k % 2) ? ScalarMode::Real : ScalarMode::Complex;
    const FramedRep p = interior(q, 900 + k, mode, 0.0);
    const GrassmannCoords c = grassmann_map(p);
    const auto h = evaluate_metric(p, MetricSignature::hyperbolic()).H;
    for (std::size_t i = 0; i < c.W.size(); ++i) {
      const CMatrix& w = c.W[i];
      dev = std::max(dev, rel((CMatrix::Identity(w.rows(), w.rows()) - w * w.adjoint()).inverse(), h[i]));
      if (mode == ScalarMode::Real) real_exact = real_exact && max_abs_imag(w) == 0.0;
    }
    const FramedRep back = grassmann_inverse(c);
    dev = std::max(dev, back.max_abs_diff(p));
    if (mode == ScalarMode::Real) {
      for (const auto& w : back.arrow_matrices()) real_exact = real_exact && max_abs_imag(w) == 0.0;
    }
  }
  return {dev < 1e-10 && real_exact,
          fmt("max_dev=%.3g tol=%.0e", dev, 1e-10) + (real_exact ? " real=exact" : " real=LEAKED")};
}

// 7
Outcome hyperbolic_activation() {
  double dev = 0.0;
  for (std::uint64_t k = 0; k < 50; ++k) dev = std::max(dev, hyperbolic_sigma_check(1 + k % 3, 1000 + k));
  return {dev < 1e-5, fmt("max_pullback_dev=%.3g tol=%.0e", dev, 1e-5)};
}

// 8
Outcome dimension_formula() {
  std::mt19937_64 rng(1111);
  int mismatches = 0;
  for (int k = 0; k < 50; ++k) {
    auto q = random_acyclic_quiver(rng, 5, 6, 3);
    long gauge = 0;
    for (const auto& v : q->vertices()) gauge += static_cast<long>(v.d) * v.d;
    if (moduli_dimension(*q) != representation_space_dimension(*q) - gauge) ++mismatches;
    const FramedRep p = random_rep(q, 2000 + k, SampleDomain::Stable, {0.7, 200, false, ScalarMode::Complex});
    if (numerical_rank(linearized_action(p), 1e-10) != gauge) ++mismatches;
  }
  return {mismatches == 0, "mismatches=" + std::to_string(mismatches) + " of 100 comparisons"};
}

// 9
Outcome euclidean_reduction() {
  auto lq = layered_quiver();
  Machine layered(parse_algorithm(kLayeredAlgorithm, lq));
  std::mt19937_64 rng(13);
  double dev = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const FramedRep p = random_rep(lq, 100 + trial, SampleDomain::Euclidean, {0.8, 200, true, ScalarMode::Real});
    DenseNet net{p.bias(0).real(), p.bias(1).real(), p.bias(2).real(), p.w(0).real(), p.w(1).real()};
    Dataset data;
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> dense;
    for (int s = 0; s < 8; ++s) {
      const Eigen::VectorXd x = rand_matrix(rng, 3, 1, 1.0, true).real().col(0);
      const Eigen::VectorXd y = rand_matrix(rng, 1, 1, 1.0, true).real().col(0);
      data.push_back({x.cast<Complex>(), y.cast<Complex>()});
      dense.push_back({x, y});
    }
    const auto [loss, grad] = net.loss_and_gradient(dense);
    const auto g = layered.backward(p, MetricSignature::euclidean(), data);
    dev = std::max({dev, std::abs(g.cost - loss), (g.params - grad).cwiseAbs().maxCoeff()});
  }

  auto q = a2_quiver();
  Machine linear(parse_algorithm("eout* . a1 . ein", q));
  TrainConfig ts;
  ts.signature = MetricSignature::euclidean();
  ts.max_steps = 2000;
  ts.target_cost = 1e-4;
  ts.learning_rate = 0.5;
  ts.seed = 3;
  const FramedRep teacher = initial_point(q, TrainConfig{.signature = ts.signature, .seed = 99});
  const auto student = train(linear, teacher_dataset(linear, teacher, ts.signature, 20, 5), ts);
  const double ts_cost = student.history.records.back().cost;
  const int ts_steps = student.history.records.back().step;

  Dataset xor_data;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      CVector x(3);
      x << double(a), double(b), 1.0;
      xor_data.push_back({x, CVector::Constant(1, (a ^ b) ? 1.0 : -1.0)});
    }
  }
  TrainConfig xc;
  xc.signature = MetricSignature::euclidean();
  xc.mode = ScalarMode::Real;
  xc.learning_rate = 0.5;
  xc.max_steps = 5000;
  xc.target_cost = 0.01;
  xc.seed = 1;
  xc.init_scale = 0.8;
  const auto xr = train(layered, xor_data, xc);
  int correct = 0;
  for (const auto& s : xor_data) {
    correct += (layered.forward(xr.point, xc.signature, s.x)(0).real() > 0) == (s.y(0).real() > 0);
  }
  const bool ok = dev < 1e-10 && ts_cost < 1e-3 && ts_steps <= 2000 && correct == 4;
  return {ok, fmt("backprop_dev=%.3g tol=%.0e", dev, 1e-10) + fmt(" teacher_cost=%.3g after %.0f steps", ts_cost, ts_steps) +
                  " xor=" + std::to_string(correct) + "/4 after " + std::to_string(xr.history.records.back().step) +
                  " steps"};
}

// 10
Outcome hyperbolic_training() {
  auto q = diamond_quiver();
  Machine m(parse_algorithm(kDiamondAlgorithm, q));
  int violations = 0, accepted = 0;
  for (std::uint64_t run = 0; run < 10; ++run) {
    TrainConfig cfg;
    cfg.signature = MetricSignature::hyperbolic();
    cfg.seed = run;
    cfg.max_steps = 60;
    cfg.learning_rate = 0.5;
    cfg.mode = (run % 2) ? ScalarMode::Real : ScalarMode::Complex;
    double previous = std::numeric_limits<double>::infinity();
    cfg.observer = [&](const TrainRecord& r, const FramedRep& p, const MetricSignature& sig) {
      if (!r.accepted) return;
      ++accepted;
      if (!in_domain(p, sig).ok) ++violations;
      if (!(r.cost < previous)) ++violations;
      previous = r.cost;
    };
    const FramedRep teacher = initial_point(q, TrainConfig{.signature = cfg.signature, .seed = 70 + run});
    const Dataset data = teacher_dataset(m, teacher, cfg.signature, 12, run);
    train(m, data, cfg);
  }
  return {violations == 0 && accepted > 10,
          "violations=" + std::to_string(violations) + " over " + std::to_string(accepted) + " accepted iterates"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "closed-form Grassmannian metrics", 1, closed_form_metrics},
      {2, "recursion equals path-sum", 10, recursion_vs_pathsum},
      {3, "gauge equivariance and invariance", 10, gauge_invariance},
      {4, "gradient correctness", 30, gradient_correctness},
      {5, "Kahler positivity", 60, kahler_positivity},
      {6, "symplectomorphism structure", 10, symplectomorphism},
      {7, "hyperbolic activation", 10, hyperbolic_activation},
      {8, "dimension formula", 10, dimension_formula},
      {9, "Euclidean reduction", 60, euclidean_reduction},
      {10, "domain-preserving hyperbolic training", 120, hyperbolic_training},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = out.ok && secs < c.limit_seconds;
    failed += !ok;
    std::printf("%s [%d] %s: %s time=%.2fs limit=%.0fs\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(),
                out.measured.c_str(), secs, c.limit_seconds);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
