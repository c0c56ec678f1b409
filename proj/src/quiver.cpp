#include "quiverml/quiver.hpp"

#include <algorithm>
#include <queue>

#include "quiverml/errors.hpp"

namespace qml {

Role role_from_string(const std::string& s) {
  if (s == "input" || s == "in") return Role::Input;
  if (s == "output" || s == "out") return Role::Output;
  if (s == "memory" || s == "middle") return Role::Memory;
  if (s == "plain" || s.empty()) return Role::Plain;
  throw ConfigError("unknown vertex role '" + s + "'");
}

std::string to_string(Role r) {
  switch (r) {
    case Role::Input: return "input";
    case Role::Output: return "output";
    case Role::Memory: return "memory";
    case Role::Plain: return "plain";
  }
  return "plain";
}

std::string to_string(const Path& p) {
  if (p.arrows.empty()) return "e" + std::to_string(p.source);
  std::string out;
  for (auto it = p.arrows.rbegin(); it != p.arrows.rend(); ++it) {
    if (!out.empty()) out += ".";
    out += "a" + std::to_string(*it);
  }
  return out;
}

Quiver::Quiver(std::vector<VertexSpec> vertices, std::vector<ArrowSpec> arrows,
               std::size_t path_cap)
    : vertices_(std::move(vertices)),
      arrows_(std::move(arrows)),
      path_cap_(path_cap) {
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const auto& v = vertices_[i];
    if (!vertex_pos_.emplace(v.id, i).second) {
      throw ConfigError("duplicate vertex id " + std::to_string(v.id));
    }
    if (v.n < 0) throw ConfigError("negative framing dimension at vertex " + std::to_string(v.id));
    if (v.d < 1) throw ConfigError("representation dimension must be >= 1 at vertex " + std::to_string(v.id));
  }
  into_.resize(vertices_.size());
  out_of_.resize(vertices_.size());
  for (std::size_t k = 0; k < arrows_.size(); ++k) {
    const auto& a = arrows_[k];
    if (!arrow_pos_.emplace(a.id, k).second) {
      throw ConfigError("duplicate arrow id " + std::to_string(a.id));
    }
    if (!has_vertex(a.src)) throw UnknownVertex(a.src);
    if (!has_vertex(a.dst)) throw UnknownVertex(a.dst);
    into_[vertex_index(a.dst)].push_back(k);
    out_of_[vertex_index(a.src)].push_back(k);
  }
}

std::size_t Quiver::vertex_index(int id) const {
  auto it = vertex_pos_.find(id);
  if (it == vertex_pos_.end()) throw UnknownVertex(id);
  return it->second;
}

std::size_t Quiver::arrow_index(int id) const {
  auto it = arrow_pos_.find(id);
  if (it == arrow_pos_.end()) throw UnknownArrow(id);
  return it->second;
}

std::vector<std::size_t> Quiver::topological_indices() const {
  // Kahn's algorithm with a min-heap on vertex id.
  std::vector<std::size_t> indeg(vertices_.size(), 0);
  for (const auto& a : arrows_) ++indeg[vertex_index(a.dst)];
  using Item = std::pair<int, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (indeg[i] == 0) ready.emplace(vertices_[i].id, i);
  }
  std::vector<std::size_t> order;
  order.reserve(vertices_.size());
  while (!ready.empty()) {
    const auto [id, v] = ready.top();
    ready.pop();
    order.push_back(v);
    for (std::size_t k : out_of_[v]) {
      const std::size_t h = vertex_index(arrows_[k].dst);
      if (--indeg[h] == 0) ready.emplace(vertices_[h].id, h);
    }
  }
  if (order.size() != vertices_.size()) {
    std::string names;
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      if (indeg[i] > 0) names += (names.empty() ? "" : ", ") + std::to_string(vertices_[i].id);
    }
    throw CycleError("quiver has an oriented cycle through vertices {" + names + "}");
  }
  return order;
}

std::vector<int> Quiver::topological_order() const {
  std::vector<int> ids;
  for (std::size_t v : topological_indices()) ids.push_back(vertices_[v].id);
  return ids;
}

bool Quiver::is_acyclic() const {
  try {
    topological_indices();
    return true;
  } catch (const CycleError&) {
    return false;
  }
}

std::vector<Path> Quiver::paths_into(int id) const {
  const std::size_t target = vertex_index(id);
  topological_indices();  // acyclicity guard

  // Walk backwards from the target; every prefix of the reversed walk is a
  // path ending at the target.
  std::vector<Path> out;
  struct Frame {
    std::size_t vertex;
    std::vector<int> reversed;  // arrow ids from target backwards
  };
  std::vector<Frame> stack{{target, {}}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    Path p;
    p.arrows.assign(f.reversed.rbegin(), f.reversed.rend());
    p.source = vertices_[f.vertex].id;
    p.target = id;
    out.push_back(std::move(p));
    if (out.size() > path_cap_) {
      throw PathLimitExceeded("more than " + std::to_string(path_cap_) +
                              " paths into vertex " + std::to_string(id));
    }
    for (std::size_t k : into_[f.vertex]) {
      Frame next{vertex_index(arrows_[k].src), f.reversed};
      next.reversed.push_back(arrows_[k].id);
      stack.push_back(std::move(next));
    }
  }
  std::sort(out.begin(), out.end(), [](const Path& a, const Path& b) {
    if (a.arrows.size() != b.arrows.size()) return a.arrows.size() < b.arrows.size();
    return a.arrows < b.arrows;
  });
  return out;
}

int Quiver::path_framing_total(int id) const {
  int total = 0;
  for (const auto& p : paths_into(id)) total += vertex(p.source).n;
  return total;
}

int Quiver::grassmann_ambient(int id) const {
  const std::size_t v = vertex_index(id);
  int m = vertices_[v].n;
  for (std::size_t k : into_[v]) m += vertex(arrows_[k].src).d;
  return m;
}

int Quiver::unique_vertex_with_role(Role r) const {
  int found = 0;
  int count = 0;
  for (const auto& v : vertices_) {
    if (v.role == r) {
      found = v.id;
      ++count;
    }
  }
  if (count != 1) {
    throw ConfigError("expected exactly one " + to_string(r) + " vertex, found " +
                      std::to_string(count));
  }
  return found;
}

std::vector<int> Quiver::framing_dims() const {
  std::vector<int> n;
  for (const auto& v : vertices_) n.push_back(v.n);
  return n;
}

std::vector<int> Quiver::rep_dims() const {
  std::vector<int> d;
  for (const auto& v : vertices_) d.push_back(v.d);
  return d;
}

long moduli_dimension(const Quiver& q, const std::vector<int>& n,
                      const std::vector<int>& d) {
  if (n.size() != q.num_vertices() || d.size() != q.num_vertices()) {
    throw ShapeError("dimension vectors do not match the vertex count");
  }
  q.topological_indices();
  long total = 0;
  for (std::size_t i = 0; i < q.num_vertices(); ++i) {
    long m = n[i];
    for (std::size_t k : q.arrows_into(i)) {
      m += d[q.vertex_index(q.arrows()[k].src)];
    }
    if (m < d[i]) {
      throw EmptyModuli("no stable points: m_" + std::to_string(q.vertices()[i].id) +
                        " = " + std::to_string(m) + " < d = " + std::to_string(d[i]));
    }
    total += static_cast<long>(d[i]) * (m - d[i]);
  }
  return total;
}

long moduli_dimension(const Quiver& q) {
  return moduli_dimension(q, q.framing_dims(), q.rep_dims());
}

long representation_space_dimension(const Quiver& q) {
  long dim = 0;
  for (const auto& a : q.arrows()) {
    dim += static_cast<long>(q.vertex(a.src).d) * q.vertex(a.dst).d;
  }
  for (const auto& v : q.vertices()) dim += static_cast<long>(v.n) * v.d;
  return dim;
}

}  // namespace qml
