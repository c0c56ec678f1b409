#include "quiverml/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "quiverml/errors.hpp"

namespace qml {

namespace {

bool has_negative_coefficient(const MetricSignature& sig) {
  if (sig.alpha < 0.0 || sig.path_default < 0.0) return true;
  for (const auto& [path, c] : sig.path_coeffs) {
    if (c < 0.0) return true;
  }
  return false;
}

double signature_value(const MetricSignature& sig) {
  return sig.uniform_value().value_or(sig.alpha);
}

bool domain_ok(const FramedRep& p, const MetricSignature& sig) {
  try {
    return in_domain(p, sig).ok;
  } catch (const Error&) {
    return false;
  }
}

double safe_cost(const Machine& m, const FramedRep& p, const MetricSignature& sig,
                 const Dataset& data) {
  try {
    return m.cost(p, sig, data);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

// d cost / d s by central differences, one-sided when a stencil point leaves
// [-1, 1] or the domain.
double signature_gradient(const Machine& m, const FramedRep& p, double s, const Dataset& data) {
  const double h = 1e-6;
  const double f0 = safe_cost(m, p, MetricSignature::uniform(s), data);
  const double fp = s + h <= 1.0 ? safe_cost(m, p, MetricSignature::uniform(s + h), data)
                                 : std::numeric_limits<double>::infinity();
  const double fm = s - h >= -1.0 ? safe_cost(m, p, MetricSignature::uniform(s - h), data)
                                  : std::numeric_limits<double>::infinity();
  if (std::isfinite(fp) && std::isfinite(fm)) return (fp - fm) / (2 * h);
  if (std::isfinite(fp)) return (fp - f0) / h;
  if (std::isfinite(fm)) return (f0 - fm) / h;
  return 0.0;
}

// The moduli tensor, or nothing when it is not numerically positive-definite
// (the step then follows the plain gradient).
std::optional<CMatrix> tensor_or_none(const FramedRep& p, const MetricSignature& sig,
                                      const TensorOptions& opts) {
  try {
    return moduli_metric_tensor(p, sig, opts);
  } catch (const NonPositive&) {
    return std::nullopt;
  }
}

std::vector<double> min_eigenvalues(const FramedRep& p, const MetricSignature& sig) {
  return in_domain(p, sig).min_eigenvalue;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (refresh < 1) throw ConfigError("refresh period must be at least 1");
  if (max_steps < 0) throw ConfigError("max steps must be non-negative");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("backtracking factor must lie in (0, 1)");
  if (max_halvings < 0) throw ConfigError("max halvings must be non-negative");
  if (learnable_signature) {
    const auto s = signature.uniform_value();
    if (!s || *s < -1.0 || *s > 1.0) {
      throw ConfigError("a learnable signature starts from a uniform value in [-1, 1]");
    }
  }
}

void TrainHistory::write_csv(std::ostream& out) const {
  out << "step,cost,grad_norm,step_norm";
  for (int id : vertex_ids) out << ",min_eig_v" << id;
  out << ",signature\n";
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.step << ',' << r.cost << ',' << r.grad_norm << ',' << r.step_norm;
    for (double e : r.min_eigenvalue) out << ',' << e;
    out << ',' << r.signature << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

std::string TrainHistory::csv() const {
  std::ostringstream s;
  write_csv(s);
  return s.str();
}

CVector precondition(const CVector& grad, const CMatrix& g) {
  if (g.rows() != grad.size() || g.cols() != grad.size()) {
    throw ShapeError("tensor and gradient sizes differ");
  }
  Eigen::LLT<CMatrix> llt(hermitian_part(g));
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("metric tensor is not positive-definite");
  return llt.solve(grad);
}

CVector descent_direction(const FramedRep& p, const MetricSignature& sig, const CVector& chart_grad,
                          const TensorOptions& opts, bool use_metric, const CMatrix* tensor) {
  CVector g = chart_grad;
  if (p.mode() == ScalarMode::Real) g = g.real().cast<Complex>();
  if (!use_metric || potential_scale(sig) == 0.0) return g;
  const CMatrix m = tensor ? *tensor : moduli_metric_tensor(p, sig, opts);
  CVector v = precondition(g, m);
  if (p.mode() == ScalarMode::Real) v = v.real().cast<Complex>();
  return v;
}

StepResult step(const Machine& machine, const Dataset& data, const StepState& state,
                const CVector& direction, double signature_direction, const TrainConfig& config) {
  StepResult out{state, false, 0.0};
  const auto q = state.point.quiver_ptr();
  const ScalarMode mode = state.point.mode();
  const RVector x = to_params(state.point);
  const RVector d = chart_gradient_to_params(direction, mode);
  const double dnorm = std::hypot(d.norm(), signature_direction);
  if (dnorm == 0.0 || !std::isfinite(dnorm)) return out;

  double eta = config.learning_rate;
  for (int k = 0; k <= config.max_halvings; ++k, eta *= config.backtrack) {
    FramedRep candidate = from_params(q, x - eta * d, mode);
    MetricSignature sig = state.signature;
    if (config.learnable_signature) {
      const double s = std::clamp(signature_value(state.signature) - eta * signature_direction, -1.0, 1.0);
      sig = MetricSignature::uniform(s);
    }
    if (!domain_ok(candidate, sig)) continue;
    const double c = safe_cost(machine, candidate, sig, data);
    if (c < state.cost) {
      out.state = {std::move(candidate), sig, c};
      out.accepted = true;
      out.step_length = eta * dnorm;
      return out;
    }
  }
  return out;
}

FramedRep initial_point(std::shared_ptr<const Quiver> q, const TrainConfig& config) {
  SampleOptions opts;
  opts.scale = config.init_scale;
  opts.mode = config.mode;
  opts.fixed_basis = true;
  const MetricSignature& sig = config.signature;
  const SampleDomain domain = has_negative_coefficient(sig) ? SampleDomain::Hyperbolic
                              : potential_scale(sig) == 0.0 ? SampleDomain::Euclidean
                                                            : SampleDomain::Stable;
  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    FramedRep p = random_rep(q, config.seed + 7919ULL * attempt, domain, opts);
    if (domain_ok(p, sig)) return p;
  }
  throw DomainSamplingFailed("no starting point found in the signature's domain");
}

TrainResult train(const Machine& machine, const Dataset& data, const TrainConfig& config,
                  std::optional<FramedRep> start) {
  config.validate();
  if (data.empty()) throw ConfigError("training needs at least one sample");
  const auto q = machine.tree().quiver_ptr();
  StepState state{start ? gauge_fix(*start) : initial_point(q, config), config.signature, 0.0};
  if (start && config.mode == ScalarMode::Real) state.point.enforce_mode();
  if (!domain_ok(state.point, state.signature)) throw OutOfDomain("starting point is outside the domain");

  TrainResult result{{}, state.point, state.signature};
  for (const auto& v : q->vertices()) result.history.vertex_ids.push_back(v.id);

  auto record = [&](TrainRecord r) {
    if (config.observer) config.observer(r, state.point, state.signature);
    result.history.records.push_back(std::move(r));
  };

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  auto batch = [&]() -> Dataset {
    if (config.batch == 0 || config.batch >= data.size()) return data;
    Dataset b;
    b.reserve(config.batch);
    for (std::size_t k = 0; k < config.batch; ++k) b.push_back(data[pick(rng)]);
    return b;
  };

  auto full = machine.backward(state.point, state.signature, data);
  state.cost = full.cost;
  record({0, state.cost, full.params.norm(), 0.0,
                                    min_eigenvalues(state.point, state.signature),
                                    signature_value(state.signature), true});

  std::optional<CMatrix> tensor;
  int since_refresh = config.refresh;
  for (int it = 1; it <= config.max_steps; ++it) {
    if (state.cost <= config.target_cost) break;
    const Dataset b = batch();
    const auto g = (config.batch == 0) ? full : machine.backward(state.point, state.signature, b);
    double ds = 0.0;
    if (config.learnable_signature) {
      ds = signature_gradient(machine, state.point, signature_value(state.signature), b);
    }

    const bool wants_metric = config.precondition && potential_scale(state.signature) != 0.0;
    if (wants_metric && (since_refresh >= config.refresh || !tensor)) {
      tensor = tensor_or_none(state.point, state.signature, config.tensor);
      since_refresh = 0;
    }
    ++since_refresh;
    const bool use_metric = wants_metric && tensor.has_value();
    const CVector dir = descent_direction(state.point, state.signature, g.chart, config.tensor,
                                          use_metric, use_metric ? &*tensor : nullptr);
    StepResult r = step(machine, data, state, dir, ds, config);
    if (!r.accepted && use_metric && since_refresh > 1) {
      // Retry once with a fresh tensor before giving up.
      tensor = tensor_or_none(state.point, state.signature, config.tensor);
      since_refresh = 1;
      const CVector fresh = descent_direction(state.point, state.signature, g.chart, config.tensor,
                                              tensor.has_value(), tensor ? &*tensor : nullptr);
      r = step(machine, data, state, fresh, ds, config);
    }
    if (!r.accepted) {
      record({it, state.cost, g.params.norm(), 0.0,
                                        min_eigenvalues(state.point, state.signature),
                                        signature_value(state.signature), false, use_metric});
      break;
    }
    if (config.learnable_signature && signature_value(r.state.signature) != signature_value(state.signature)) {
      tensor.reset();
    }
    state = std::move(r.state);
    full = machine.backward(state.point, state.signature, data);
    record({it, state.cost, full.params.norm(), r.step_length,
                                      min_eigenvalues(state.point, state.signature),
                                      signature_value(state.signature), true, use_metric});
  }
  result.point = state.point;
  result.signature = state.signature;
  return result;
}

}  // namespace qml
