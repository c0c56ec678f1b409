#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace qml {

enum class Role { Input, Output, Memory, Plain };

Role role_from_string(const std::string& s);
std::string to_string(Role r);

struct VertexSpec {
  int id = 0;
  int n = 0;  ///< framing dimension
  int d = 1;  ///< representation dimension
  Role role = Role::Plain;
};

struct ArrowSpec {
  int id = 0;
  int src = 0;  ///< tail t(a)
  int dst = 0;  ///< head h(a)
};

/// A path in the quiver. `arrows` holds arrow ids in traversal order, so the
/// first entry leaves `source`. An empty list is the trivial path at source.
struct Path {
  std::vector<int> arrows;
  int source = 0;
  int target = 0;

  bool trivial() const { return arrows.empty(); }
  bool operator==(const Path&) const = default;
};

/// Human-readable form, e.g. "a3.a1" (composition order) or "e4" for trivial.
std::string to_string(const Path& p);

inline constexpr std::size_t kDefaultPathCap = 100000;

/// Finite quiver with per-vertex framing/representation dimensions.
///
/// Vertex and arrow ids are arbitrary integers; internally everything is
/// addressed by position ("index") in the order given at construction.
/// Cycles are allowed at construction time; every operation that needs an
/// acyclic quiver calls `topological_order()`, which throws CycleError.
class Quiver {
 public:
  Quiver(std::vector<VertexSpec> vertices, std::vector<ArrowSpec> arrows,
         std::size_t path_cap = kDefaultPathCap);

  const std::vector<VertexSpec>& vertices() const { return vertices_; }
  const std::vector<ArrowSpec>& arrows() const { return arrows_; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_arrows() const { return arrows_.size(); }

  std::size_t vertex_index(int id) const;
  std::size_t arrow_index(int id) const;
  const VertexSpec& vertex(int id) const { return vertices_[vertex_index(id)]; }
  const ArrowSpec& arrow(int id) const { return arrows_[arrow_index(id)]; }
  bool has_vertex(int id) const { return vertex_pos_.count(id) != 0; }
  bool has_arrow(int id) const { return arrow_pos_.count(id) != 0; }

  /// Indices of arrows whose head is vertex index `v`, in arrow order.
  const std::vector<std::size_t>& arrows_into(std::size_t v) const {
    return into_[v];
  }
  const std::vector<std::size_t>& arrows_out_of(std::size_t v) const {
    return out_of_[v];
  }

  /// Vertex ids ordered so each arrow goes from earlier to later; ties are
  /// broken by ascending id. Throws CycleError.
  std::vector<int> topological_order() const;
  /// Same order, as vertex indices.
  std::vector<std::size_t> topological_indices() const;
  bool is_acyclic() const;

  /// All paths ending at vertex `id`, trivial path first, then by length,
  /// then lexicographically by arrow ids. Throws UnknownVertex, CycleError,
  /// PathLimitExceeded.
  std::vector<Path> paths_into(int id) const;

  /// N_i: sum of n_{t(gamma)} over paths gamma into vertex `id`.
  int path_framing_total(int id) const;

  /// m_i = n_i + sum over arrows a into i of d_{t(a)}.
  int grassmann_ambient(int id) const;

  /// Vertex id holding the given role; throws ConfigError unless unique.
  int unique_vertex_with_role(Role r) const;

  std::vector<int> framing_dims() const;
  std::vector<int> rep_dims() const;

 private:
  std::vector<VertexSpec> vertices_;
  std::vector<ArrowSpec> arrows_;
  std::unordered_map<int, std::size_t> vertex_pos_;
  std::unordered_map<int, std::size_t> arrow_pos_;
  std::vector<std::vector<std::size_t>> into_;
  std::vector<std::vector<std::size_t>> out_of_;
  std::size_t path_cap_;
};

/// Dimension of the framed moduli space, sum_i d_i (m_i - d_i), for explicit
/// dimension vectors (indexed by vertex position). Throws EmptyModuli when
/// some m_i < d_i, CycleError for cyclic quivers.
long moduli_dimension(const Quiver& q, const std::vector<int>& n,
                      const std::vector<int>& d);
long moduli_dimension(const Quiver& q);

/// dim R_{n,d} = sum_a d_h d_t + sum_i n_i d_i.
long representation_space_dimension(const Quiver& q);

}  // namespace qml
