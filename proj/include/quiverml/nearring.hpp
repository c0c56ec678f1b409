#pragma once

#include <memory>
#include <string>
#include <vector>

#include "quiverml/quiver.hpp"

namespace qml {

/// Activation ids accepted by default (see ActivationCatalog::builtin).
inline const std::vector<int> kBuiltinActivationIds = {1, 2, 3, 4};

/// One generator of a linear word.
struct Atom {
  enum class Kind {
    Framing,     ///< e<i>: F_i -> V_i
    Adjoint,     ///< e<i>*: V_i -> F_i (metric adjoint)
    Arrow,       ///< a<k>: V_t -> V_h
    Input,       ///< ein: framing map of the input vertex
    OutAdjoint,  ///< eout*: metric adjoint of the output framing
  };
  Kind kind;
  int id;  ///< vertex id (Framing/Adjoint/Input/OutAdjoint) or arrow id

  bool operator==(const Atom&) const = default;
};

/// e_k^* . w_gamma . e_j : F_j -> F_k.
struct Segment {
  int in_vertex;
  std::vector<int> arrows;  ///< traversal order
  int out_vertex;

  bool operator==(const Segment&) const = default;
};

/// coeff * (segment_r o ... o segment_1); an empty segment list is the
/// identity on the label's block.
struct LabelTerm {
  double coeff = 1.0;
  std::vector<Atom> word;         ///< application order (first applied first)
  std::vector<Segment> segments;  ///< application order

  bool operator==(const LabelTerm& o) const {
    return coeff == o.coeff && word == o.word;
  }
};

/// Linear map F_src -> F_dst given as a sum of framing-loop products.
struct EdgeLabel {
  int src_vertex = 0;
  int dst_vertex = 0;
  std::vector<LabelTerm> terms;

  bool operator==(const EdgeLabel&) const = default;
};

/// Rooted tree for an element a_0 + sum_k a_k s_{l(k)} o alpha_k. Node 0 is the
/// root; every other node is reached from its parent through `label`.
struct TreeNode {
  enum class Kind { Root, Activation, Leaf };
  Kind kind = Kind::Root;
  int activation = 0;   ///< activation id (Activation nodes)
  int block = 0;        ///< vertex id of the framing block the node lives on
  int parent = -1;
  EdgeLabel label;      ///< edge from parent (unused at root)
  std::vector<int> children;
};

class ActivationTree {
 public:
  ActivationTree(std::shared_ptr<const Quiver> q, std::vector<TreeNode> nodes, int input_vertex,
                 int output_vertex);

  const Quiver& quiver() const { return *quiver_; }
  const std::shared_ptr<const Quiver>& quiver_ptr() const { return quiver_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return nodes_.size(); }
  int input_vertex() const { return input_; }
  int output_vertex() const { return output_; }

  /// Node indices with every child before its parent (root last).
  std::vector<int> postorder() const;
  /// Number of activation nodes strictly above node i, plus one if i itself
  /// is an activation node.
  int activation_depth(int i) const;
  /// Nodes from the root's child down to i (root excluded).
  std::vector<int> chain_to(int i) const;

  /// Sum of two trees of the same type: roots merged.
  ActivationTree operator+(const ActivationTree& other) const;

  bool structurally_equal(const ActivationTree& other) const;

 private:
  std::shared_ptr<const Quiver> quiver_;
  std::vector<TreeNode> nodes_;
  int input_;
  int output_;
};

/// Parse an algorithm expression (grammar in the README) into a type-checked
/// tree of type F_in -> F_out. Throws ParseError, TypeError, UnknownSymbol.
ActivationTree parse_algorithm(const std::string& text, std::shared_ptr<const Quiver> q,
                               const std::vector<int>& activation_ids = kBuiltinActivationIds);

/// Expression text that reparses to a structurally identical tree.
std::string pretty_print(const ActivationTree& t);

/// Generation: the largest activation depth over all nodes.
int grade(const ActivationTree& t);

/// One summand a_{g1} D s|_{alpha_1} ... D s|_{alpha_{r-1}} . d a_{gr} . (s o alpha_r)
/// of the differential: `chain` lists the nodes from the root's child down to
/// the node whose incoming edge is differentiated.
struct FormSummand {
  std::vector<int> chain;
  int node() const { return chain.back(); }
};

/// Degree-1 form-valued tree: one summand per non-root node.
struct FormTree {
  std::vector<FormSummand> summands;
  int degree = 1;
};

FormTree differentiate(const ActivationTree& t);

/// Readable rendering of one summand, e.g. "[eout* . a4 . e3] D(s2) d[e3* . a2 . ein] (x)".
std::string describe(const ActivationTree& t, const FormSummand& s);

std::string to_string(const EdgeLabel& label);

}  // namespace qml
