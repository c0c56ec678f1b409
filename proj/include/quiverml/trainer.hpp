#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "quiverml/machine.hpp"
#include "quiverml/metric.hpp"
#include "quiverml/representation.hpp"

namespace qml {

struct TrainRecord {
  int step = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double step_norm = 0.0;
  std::vector<double> min_eigenvalue;  ///< per vertex, of the signature form F_i
  double signature = 0.0;
  bool accepted = true;
  bool preconditioned = false;  ///< the metric tensor was used for this step
};

struct TrainConfig {
  MetricSignature signature = MetricSignature::compact();
  /// Optimize a uniform signature value s in [-1, 1] alongside the point,
  /// starting from signature's uniform value.
  bool learnable_signature = false;
  double learning_rate = 0.1;
  int max_steps = 1000;
  double backtrack = 0.5;
  int max_halvings = 30;
  std::uint64_t seed = 0;
  std::size_t batch = 0;  ///< 0 means full batch
  int refresh = 10;       ///< steps between metric tensor evaluations
  bool precondition = true;
  ScalarMode mode = ScalarMode::Complex;
  double init_scale = 0.5;
  /// Stop once the cost drops below this value.
  double target_cost = 0.0;
  TensorOptions tensor;
  /// Called with every record and the point it describes.
  std::function<void(const TrainRecord&, const FramedRep&, const MetricSignature&)> observer;

  /// Throws ConfigError.
  void validate() const;
};


struct TrainHistory {
  std::vector<int> vertex_ids;
  std::vector<TrainRecord> records;

  /// Columns step,cost,grad_norm,step_norm,min_eig_v<id>...,signature with
  /// 17 significant digits.
  void write_csv(std::ostream& out) const;
  std::string csv() const;
};

struct TrainResult {
  TrainHistory history;
  FramedRep point;
  MetricSignature signature;
};

/// Solves g v = grad by Cholesky (complex Hermitian g). Throws
/// NotPositiveDefinite.
CVector precondition(const CVector& grad, const CMatrix& g);

/// Chart-space descent direction at p: the gradient preconditioned by the
/// moduli metric tensor (Euclidean signatures and `use_metric = false` return
/// the gradient itself). Real mode uses the real part of the tensor.
CVector descent_direction(const FramedRep& p, const MetricSignature& sig, const CVector& chart_grad,
                          const TensorOptions& opts, bool use_metric = true,
                          const CMatrix* tensor = nullptr);

struct StepState {
  FramedRep point;
  MetricSignature signature;
  double cost = 0.0;
};

struct StepResult {
  StepState state;
  bool accepted = false;
  double step_length = 0.0;  ///< eta * |direction| in parameter space
};

/// Line search along -direction (chart components; `signature_direction`
/// moves a learnable uniform s). Halves eta while the candidate leaves the
/// signature domain or fails to decrease the cost; after max_halvings the
/// state is returned unchanged with accepted = false.
StepResult step(const Machine& machine, const Dataset& data, const StepState& state,
                const CVector& direction, double signature_direction, const TrainConfig& config);

/// Gauge-fixed starting point in the configured signature's domain.
/// Throws DomainSamplingFailed.
FramedRep initial_point(std::shared_ptr<const Quiver> q, const TrainConfig& config);

/// Metric-preconditioned descent on the gauge-fixed chart. Every accepted
/// step strictly decreases the full-data cost and stays in the domain.
TrainResult train(const Machine& machine, const Dataset& data, const TrainConfig& config,
                  std::optional<FramedRep> start = std::nullopt);

}  // namespace qml
