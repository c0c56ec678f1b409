#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "quiverml/linalg.hpp"
#include "quiverml/metric.hpp"
#include "quiverml/nearring.hpp"
#include "quiverml/representation.hpp"

namespace qml {

/// Activation on a framing block with its first derivative. Gradients use
/// the convention G = dL/dRe + i dL/dIm.
struct Activation {
  std::string name;
  std::function<CVector(const CVector&)> value;
  /// Directional derivative at z along dz.
  std::function<CVector(const CVector& z, const CVector& dz)> jvp;
  /// Pull back a cotangent G at the output to the input.
  std::function<CVector(const CVector& z, const CVector& g)> vjp;
};

class ActivationCatalog {
 public:
  /// 1 identity, 2 tanh, 3 softplus (sharpness 20), 4 z / sqrt(1 + |z|^2).
  static const ActivationCatalog& builtin();

  void add(int id, Activation a);
  const Activation& get(int id) const;
  bool contains(int id) const { return acts_.count(id) != 0; }
  std::vector<int> ids() const;

  /// Largest deviation of jvp from central differences (step 1e-6) and of
  /// vjp from the adjoint of jvp, over random points of dimension `dim`.
  double self_test(int id, int dim, std::uint64_t seed, int samples = 20) const;

 private:
  std::map<int, Activation> acts_;
};

struct Sample {
  CVector x;  ///< F_in vector
  CVector y;  ///< F_out target
};

using Dataset = std::vector<Sample>;

/// c * e_k^{*h} w_gamma e_j summed over the label's terms, with
/// e_k^{*h} v = e_k* H_k v.
CMatrix realize_edge(const EdgeLabel& label, const FramedRep& p, const MetricState& m);

/// A tree realized at one point: metric and every edge matrix (indexed by
/// node; entry 0 unused).
struct Realization {
  MetricState metric;
  std::vector<CMatrix> edge;
};

/// Node values from one forward pass: pre-activations z (activation nodes)
/// and outputs (sigma(z), or x at leaves).
struct Tape {
  std::vector<CVector> z;
  std::vector<CVector> out;
  CVector y;
};

class Machine {
 public:
  explicit Machine(ActivationTree tree,
                   const ActivationCatalog& catalog = ActivationCatalog::builtin());

  const ActivationTree& tree() const { return tree_; }
  const ActivationCatalog& catalog() const { return *catalog_; }
  int input_dim() const;
  int output_dim() const;

  /// Throws OutOfDomain when some H_i is not positive-definite.
  Realization realize(const FramedRep& p, const MetricSignature& sig) const;

  CVector forward(const Realization& r, const CVector& x, Tape* tape = nullptr) const;
  CVector forward(const FramedRep& p, const MetricSignature& sig, const CVector& x) const;

  /// Mean of |f(x) - y|^2 over the dataset (pairwise reduction).
  double cost(const Realization& r, const Dataset& data) const;
  double cost(const FramedRep& p, const MetricSignature& sig, const Dataset& data) const;

  struct Gradient {
    double cost = 0.0;
    RepDirection full;  ///< cotangent on all of (w, e)
    CVector chart;      ///< chart components (bias blocks, arrows)
    RVector params;     ///< in the point's parameter space
  };

  /// Exact gradient by a reverse sweep over the tree followed by the metric's
  /// reverse sweep. Throws OutOfDomain, NonDifferentiable.
  Gradient backward(const FramedRep& p, const MetricSignature& sig, const Dataset& data) const;

  /// Directional derivative of f(x) along v, assembled as the sum over the
  /// differential's summands (one per non-root node).
  CVector differential(const FramedRep& p, const MetricSignature& sig, const FormTree& form,
                       const CVector& x, const RepDirection& v) const;

 private:
  ActivationTree tree_;
  const ActivationCatalog* catalog_;
};

/// Directional derivatives of every edge matrix along v.
std::vector<CMatrix> edge_tangents(const ActivationTree& t, const FramedRep& p,
                                   const MetricState& m, const std::vector<CMatrix>& dH,
                                   const RepDirection& v);

/// Central finite-difference gradient of the cost in parameter space.
RVector finite_difference_gradient(const Machine& machine, const FramedRep& p,
                                   const MetricSignature& sig, const Dataset& data,
                                   double step = 1e-5);

/// max |g - fd| / max |fd| (absolute when fd vanishes).
double relative_gradient_error(const RVector& g, const RVector& fd);

/// Asymmetry of the Hessian of the cost, from central differences of the
/// analytic gradient: max |H - H^T| / max |H|.
double hessian_asymmetry(const Machine& machine, const FramedRep& p, const MetricSignature& sig,
                         const Dataset& data, double step = 1e-5);

/// Dataset labelled by the machine itself at point p on random inputs.
Dataset teacher_dataset(const Machine& machine, const FramedRep& teacher,
                        const MetricSignature& sig, std::size_t count, std::uint64_t seed,
                        double scale = 1.0);

}  // namespace qml
