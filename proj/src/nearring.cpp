#include "quiverml/nearring.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <optional>

#include "quiverml/errors.hpp"

namespace qml {

namespace {

// ---------------------------------------------------------------------------
// Lexer

struct Token {
  enum class Kind { Input, OutAdjoint, Framing, Adjoint, Arrow, Act, Number, Plus, Dot, Star, LParen, RParen, End };
  Kind kind;
  std::size_t pos;
  int id = 0;
  double value = 0.0;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  };
  auto read_int = [&](std::size_t start) -> int {
    if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) {
      throw ParseError(start, "expected an integer id");
    }
    long v = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      v = v * 10 + (s[i] - '0');
      if (v > 1000000000L) throw ParseError(start, "id too large");
      ++i;
    }
    return static_cast<int>(v);
  };
  auto starts_with = [&](const char* word) {
    return s.compare(i, std::char_traits<char>::length(word), word) == 0;
  };
  while (true) {
    skip_ws();
    if (i >= s.size()) {
      out.push_back({Token::Kind::End, i});
      return out;
    }
    const std::size_t start = i;
    const char c = s[i];
    const bool number_start =
        std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < s.size() &&
         (std::isdigit(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '.'));
    if (number_start) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str() + i, &end);
      std::size_t stop = static_cast<std::size_t>(end - s.c_str());
      // A trailing '.' belongs to the composition operator, not the number.
      if (stop > i && s[stop - 1] == '.' && (stop >= s.size() || !std::isdigit(static_cast<unsigned char>(s[stop])))) {
        const std::string trimmed = s.substr(i, stop - 1 - i);
        out.push_back({Token::Kind::Number, start, 0, std::strtod(trimmed.c_str(), nullptr)});
        i = stop - 1;
      } else {
        out.push_back({Token::Kind::Number, start, 0, v});
        i = stop;
      }
      continue;
    }
    switch (c) {
      case '+': out.push_back({Token::Kind::Plus, start}); ++i; continue;
      case '.': out.push_back({Token::Kind::Dot, start}); ++i; continue;
      case '*': out.push_back({Token::Kind::Star, start}); ++i; continue;
      case '(': out.push_back({Token::Kind::LParen, start}); ++i; continue;
      case ')': out.push_back({Token::Kind::RParen, start}); ++i; continue;
      default: break;
    }
    if (starts_with("ein")) {
      i += 3;
      out.push_back({Token::Kind::Input, start});
      continue;
    }
    if (starts_with("eout")) {
      i += 4;
      skip_ws();
      if (i >= s.size() || s[i] != '*') throw ParseError(i, "expected '*' after eout");
      ++i;
      out.push_back({Token::Kind::OutAdjoint, start});
      continue;
    }
    if (c == 'e') {
      ++i;
      const int id = read_int(start);
      std::size_t j = i;
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j < s.size() && s[j] == '*') {
        i = j + 1;
        out.push_back({Token::Kind::Adjoint, start, id});
      } else {
        out.push_back({Token::Kind::Framing, start, id});
      }
      continue;
    }
    if (c == 'a' || c == 's') {
      ++i;
      const int id = read_int(start);
      out.push_back({c == 'a' ? Token::Kind::Arrow : Token::Kind::Act, start, id});
      continue;
    }
    throw ParseError(start, std::string("unexpected character '") + c + "'");
  }
}

// ---------------------------------------------------------------------------
// Syntax tree

struct Ast {
  enum class Kind { Sum, Comp, Scale, Atom, Act };
  Ast(Kind k, std::size_t p) : kind(k), pos(p) {}
  Kind kind;
  std::size_t pos;
  std::vector<int> kids;
  double coeff = 1.0;
  qml::Atom atom{qml::Atom::Kind::Arrow, 0};
  int act = 0;
  int src = -1;  // type variables
  int dst = -1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  int parse_all(std::vector<Ast>& pool) {
    pool_ = &pool;
    const int root = expr();
    if (peek().kind != Token::Kind::End) throw ParseError(peek().pos, "unexpected trailing input");
    return root;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  int add(Ast a) {
    pool_->push_back(std::move(a));
    return static_cast<int>(pool_->size()) - 1;
  }

  int expr() {
    const std::size_t at = peek().pos;
    std::vector<int> terms{term()};
    while (peek().kind == Token::Kind::Plus) {
      next();
      terms.push_back(term());
    }
    if (terms.size() == 1) return terms[0];
    Ast a(Ast::Kind::Sum, at);
    a.kids = std::move(terms);
    return add(std::move(a));
  }

  int term() {
    const std::size_t at = peek().pos;
    std::vector<int> factors{factor()};
    while (peek().kind == Token::Kind::Dot) {
      next();
      factors.push_back(factor());
    }
    if (factors.size() == 1) return factors[0];
    Ast a(Ast::Kind::Comp, at);
    a.kids = std::move(factors);
    return add(std::move(a));
  }

  int factor() {
    const Token t = next();
    Ast a(Ast::Kind::Atom, t.pos);
    switch (t.kind) {
      case Token::Kind::Input: a.atom = {qml::Atom::Kind::Input, 0}; return add(a);
      case Token::Kind::OutAdjoint: a.atom = {qml::Atom::Kind::OutAdjoint, 0}; return add(a);
      case Token::Kind::Framing: a.atom = {qml::Atom::Kind::Framing, t.id}; return add(a);
      case Token::Kind::Adjoint: a.atom = {qml::Atom::Kind::Adjoint, t.id}; return add(a);
      case Token::Kind::Arrow: a.atom = {qml::Atom::Kind::Arrow, t.id}; return add(a);
      case Token::Kind::Act:
        a.kind = Ast::Kind::Act;
        a.act = t.id;
        return add(a);
      case Token::Kind::Number: {
        if (next().kind != Token::Kind::Star) throw ParseError(toks_[pos_ - 1].pos, "expected '*' after number");
        const int child = factor();
        a.kind = Ast::Kind::Scale;
        a.coeff = t.value;
        a.kids = {child};
        return add(a);
      }
      case Token::Kind::LParen: {
        const int inner = expr();
        if (next().kind != Token::Kind::RParen) throw ParseError(toks_[pos_ - 1].pos, "expected ')'");
        return inner;
      }
      case Token::Kind::End: throw ParseError(t.pos, "unexpected end of input");
      default: throw ParseError(t.pos, "unexpected token");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Ast>* pool_ = nullptr;
};

// ---------------------------------------------------------------------------
// Type inference. Spaces are encoded as 2*vertex_index (F) or 2*vertex_index+1 (V).

class Types {
 public:
  explicit Types(const Quiver& q) : q_(q) {}

  int fresh() {
    parent_.push_back(static_cast<int>(parent_.size()));
    value_.push_back(-1);
    return parent_.back();
  }
  int find(int v) {
    while (parent_[v] != v) v = parent_[v] = parent_[parent_[v]];
    return v;
  }
  void fix(int v, int space, std::size_t pos) {
    v = find(v);
    if (value_[v] == -1) {
      value_[v] = space;
    } else if (value_[v] != space) {
      throw TypeError("type mismatch at position " + std::to_string(pos) + ": " +
                      name(value_[v]) + " vs " + name(space));
    }
  }
  void unite(int a, int b, std::size_t pos) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (value_[a] != -1 && value_[b] != -1 && value_[a] != value_[b]) {
      throw TypeError("type mismatch at position " + std::to_string(pos) + ": " +
                      name(value_[a]) + " vs " + name(value_[b]));
    }
    parent_[a] = b;
    if (value_[b] == -1) value_[b] = value_[a];
  }
  int value(int v) { return value_[find(v)]; }

  std::string name(int space) const {
    const int id = q_.vertices()[static_cast<std::size_t>(space / 2)].id;
    return std::string(space % 2 == 0 ? "F_" : "V_") + std::to_string(id);
  }

 private:
  const Quiver& q_;
  std::vector<int> parent_;
  std::vector<int> value_;
};

int f_space(const Quiver& q, int id) { return 2 * static_cast<int>(q.vertex_index(id)); }
int v_space(const Quiver& q, int id) { return 2 * static_cast<int>(q.vertex_index(id)) + 1; }

struct Context {
  const Quiver& q;
  int input;
  int output;
  const std::vector<int>& acts;
};

void infer(std::vector<Ast>& pool, int n, Types& ty, const Context& ctx) {
  Ast& a = pool[static_cast<std::size_t>(n)];
  a.src = ty.fresh();
  a.dst = ty.fresh();
  const std::size_t pos = a.pos;
  switch (a.kind) {
    case Ast::Kind::Atom: {
      const Quiver& q = ctx.q;
      auto need_vertex = [&](int id) {
        if (!q.has_vertex(id)) throw UnknownSymbol("unknown vertex e" + std::to_string(id) + " at position " + std::to_string(pos));
      };
      switch (a.atom.kind) {
        case Atom::Kind::Framing:
          need_vertex(a.atom.id);
          ty.fix(a.src, f_space(q, a.atom.id), pos);
          ty.fix(a.dst, v_space(q, a.atom.id), pos);
          break;
        case Atom::Kind::Adjoint:
          need_vertex(a.atom.id);
          ty.fix(a.src, v_space(q, a.atom.id), pos);
          ty.fix(a.dst, f_space(q, a.atom.id), pos);
          break;
        case Atom::Kind::Input:
          a.atom.id = ctx.input;
          ty.fix(a.src, f_space(q, ctx.input), pos);
          ty.fix(a.dst, v_space(q, ctx.input), pos);
          break;
        case Atom::Kind::OutAdjoint:
          a.atom.id = ctx.output;
          ty.fix(a.src, v_space(q, ctx.output), pos);
          ty.fix(a.dst, f_space(q, ctx.output), pos);
          break;
        case Atom::Kind::Arrow: {
          if (!q.has_arrow(a.atom.id)) throw UnknownSymbol("unknown arrow a" + std::to_string(a.atom.id) + " at position " + std::to_string(pos));
          const auto& arrow = q.arrow(a.atom.id);
          ty.fix(a.src, v_space(q, arrow.src), pos);
          ty.fix(a.dst, v_space(q, arrow.dst), pos);
          break;
        }
      }
      break;
    }
    case Ast::Kind::Act:
      if (std::find(ctx.acts.begin(), ctx.acts.end(), a.act) == ctx.acts.end()) {
        throw UnknownSymbol("unknown activation s" + std::to_string(a.act) + " at position " + std::to_string(pos));
      }
      ty.unite(a.src, a.dst, pos);
      break;
    case Ast::Kind::Scale: {
      const int child = a.kids[0];
      infer(pool, child, ty, ctx);
      Ast& self = pool[static_cast<std::size_t>(n)];
      ty.unite(self.src, pool[static_cast<std::size_t>(child)].src, pos);
      ty.unite(self.dst, pool[static_cast<std::size_t>(child)].dst, pos);
      break;
    }
    case Ast::Kind::Sum: {
      const auto kids = a.kids;
      for (int k : kids) {
        infer(pool, k, ty, ctx);
        const Ast& self = pool[static_cast<std::size_t>(n)];
        ty.unite(self.src, pool[static_cast<std::size_t>(k)].src, pool[static_cast<std::size_t>(k)].pos);
        ty.unite(self.dst, pool[static_cast<std::size_t>(k)].dst, pool[static_cast<std::size_t>(k)].pos);
      }
      break;
    }
    case Ast::Kind::Comp: {
      const auto kids = a.kids;
      for (int k : kids) infer(pool, k, ty, ctx);
      const Ast& self = pool[static_cast<std::size_t>(n)];
      ty.unite(self.dst, pool[static_cast<std::size_t>(kids.front())].dst, pos);
      ty.unite(self.src, pool[static_cast<std::size_t>(kids.back())].src, pos);
      for (std::size_t i = 0; i + 1 < kids.size(); ++i) {
        const Ast& left = pool[static_cast<std::size_t>(kids[i])];
        const Ast& right = pool[static_cast<std::size_t>(kids[i + 1])];
        ty.unite(left.src, right.dst, right.pos);
      }
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// Near-ring normal form: lin + sum_k outer_k s_k o inner_k.

struct Word {
  double coeff;
  std::vector<Atom> atoms;  // application order
};

struct Lin {
  std::vector<Word> terms;
};

struct Sym;

struct NonLinear {
  Lin outer;
  int act;
  int block;  // vertex id
  std::shared_ptr<const Sym> inner;
};

struct Sym {
  Lin lin;
  std::vector<NonLinear> nl;
};

Lin lin_compose(const Lin& outer, const Lin& inner) {
  Lin r;
  for (const auto& a : outer.terms) {
    for (const auto& b : inner.terms) {
      Word w{a.coeff * b.coeff, b.atoms};
      w.atoms.insert(w.atoms.end(), a.atoms.begin(), a.atoms.end());
      r.terms.push_back(std::move(w));
    }
  }
  return r;
}

Sym compose(const Sym& outer, const Sym& inner) {
  Sym r;
  r.lin = lin_compose(outer.lin, inner.lin);
  if (!outer.lin.terms.empty()) {
    for (const auto& t : inner.nl) {
      r.nl.push_back({lin_compose(outer.lin, t.outer), t.act, t.block, t.inner});
    }
  }
  for (const auto& t : outer.nl) {
    r.nl.push_back({t.outer, t.act, t.block, std::make_shared<const Sym>(compose(*t.inner, inner))});
  }
  return r;
}

Sym scale(Sym s, double c) {
  for (auto& w : s.lin.terms) w.coeff *= c;
  for (auto& t : s.nl) {
    for (auto& w : t.outer.terms) w.coeff *= c;
  }
  return s;
}

Sym build_sym(const std::vector<Ast>& pool, int n, Types& ty, const Context& ctx) {
  const Ast& a = pool[static_cast<std::size_t>(n)];
  switch (a.kind) {
    case Ast::Kind::Atom: {
      Sym s;
      s.lin.terms.push_back({1.0, {a.atom}});
      return s;
    }
    case Ast::Kind::Act: {
      const int space = ty.value(a.src);
      if (space < 0) throw TypeError("cannot infer the block of s" + std::to_string(a.act) + " at position " + std::to_string(a.pos));
      if (space % 2 != 0) {
        throw TypeError("activation s" + std::to_string(a.act) + " at position " + std::to_string(a.pos) +
                        " is applied to " + ty.name(space) + "; activations act on framing blocks");
      }
      const auto& v = ctx.q.vertices()[static_cast<std::size_t>(space / 2)];
      if (v.role == Role::Input || v.role == Role::Output) {
        throw TypeError("activation s" + std::to_string(a.act) + " at position " + std::to_string(a.pos) +
                        " acts on the " + to_string(v.role) + " block F_" + std::to_string(v.id) +
                        "; activations act on memory or plain blocks");
      }
      Sym identity;
      identity.lin.terms.push_back({1.0, {}});
      Sym s;
      s.nl.push_back({identity.lin, a.act, v.id, std::make_shared<const Sym>(identity)});
      return s;
    }
    case Ast::Kind::Scale:
      return scale(build_sym(pool, a.kids[0], ty, ctx), a.coeff);
    case Ast::Kind::Sum: {
      Sym s;
      for (int k : a.kids) {
        Sym t = build_sym(pool, k, ty, ctx);
        s.lin.terms.insert(s.lin.terms.end(), t.lin.terms.begin(), t.lin.terms.end());
        s.nl.insert(s.nl.end(), t.nl.begin(), t.nl.end());
      }
      return s;
    }
    case Ast::Kind::Comp: {
      Sym s = build_sym(pool, a.kids.back(), ty, ctx);
      for (std::size_t i = a.kids.size() - 1; i-- > 0;) {
        s = compose(build_sym(pool, a.kids[i], ty, ctx), s);
      }
      return s;
    }
  }
  return {};
}

int atom_vertex(const Atom& a) { return a.id; }

std::vector<Segment> segments_of(const std::vector<Atom>& word, const Quiver& q) {
  std::vector<Segment> out;
  std::size_t i = 0;
  while (i < word.size()) {
    const Atom& first = word[i];
    if (first.kind != Atom::Kind::Framing && first.kind != Atom::Kind::Input) {
      throw TypeError("edge label is not a product of framing loops");
    }
    Segment seg{atom_vertex(first), {}, 0};
    ++i;
    while (i < word.size() && word[i].kind == Atom::Kind::Arrow) {
      seg.arrows.push_back(word[i].id);
      ++i;
    }
    if (i >= word.size() ||
        (word[i].kind != Atom::Kind::Adjoint && word[i].kind != Atom::Kind::OutAdjoint)) {
      throw TypeError("edge label is not a product of framing loops");
    }
    seg.out_vertex = atom_vertex(word[i]);
    ++i;
    (void)q;
    out.push_back(std::move(seg));
  }
  return out;
}

EdgeLabel make_label(const Lin& lin, int src, int dst, const Quiver& q) {
  EdgeLabel label{src, dst, {}};
  for (const auto& w : lin.terms) {
    label.terms.push_back({w.coeff, w.atoms, segments_of(w.atoms, q)});
  }
  return label;
}

void grow(const Sym& s, int parent, int block, int input, const Quiver& q, std::vector<TreeNode>& nodes) {
  if (!s.lin.terms.empty()) {
    TreeNode leaf;
    leaf.kind = TreeNode::Kind::Leaf;
    leaf.block = input;
    leaf.parent = parent;
    leaf.label = make_label(s.lin, input, block, q);
    nodes.push_back(std::move(leaf));
    nodes[static_cast<std::size_t>(parent)].children.push_back(static_cast<int>(nodes.size()) - 1);
  }
  for (const auto& t : s.nl) {
    TreeNode node;
    node.kind = TreeNode::Kind::Activation;
    node.activation = t.act;
    node.block = t.block;
    node.parent = parent;
    node.label = make_label(t.outer, t.block, block, q);
    nodes.push_back(std::move(node));
    const int idx = static_cast<int>(nodes.size()) - 1;
    nodes[static_cast<std::size_t>(parent)].children.push_back(idx);
    grow(*t.inner, idx, t.block, input, q, nodes);
  }
}

std::string format_coeff(double c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", c);
  return buf;
}

std::string atom_text(const Atom& a) {
  switch (a.kind) {
    case Atom::Kind::Framing: return "e" + std::to_string(a.id);
    case Atom::Kind::Adjoint: return "e" + std::to_string(a.id) + "*";
    case Atom::Kind::Arrow: return "a" + std::to_string(a.id);
    case Atom::Kind::Input: return "ein";
    case Atom::Kind::OutAdjoint: return "eout*";
  }
  return "";
}

std::string word_text(const std::vector<Atom>& atoms) {
  std::string out;
  for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
    if (!out.empty()) out += " . ";
    out += atom_text(*it);
  }
  return out;
}

// Text of coeff * word (non-empty word).
std::string term_text(const LabelTerm& t) {
  const std::string w = word_text(t.word);
  if (t.coeff == 1.0) return w;
  return format_coeff(t.coeff) + " * " + w;
}

std::string subtree_text(const ActivationTree& t, int n) {
  std::vector<std::string> parts;
  for (int c : t.node(n).children) {
    const TreeNode& child = t.node(c);
    if (child.kind == TreeNode::Kind::Leaf) {
      for (const auto& term : child.label.terms) parts.push_back(term_text(term));
      continue;
    }
    const std::string tail =
        "s" + std::to_string(child.activation) + " . (" + subtree_text(t, c) + ")";
    std::vector<std::string> named;
    for (const auto& term : child.label.terms) {
      if (term.word.empty()) {
        parts.push_back(term.coeff == 1.0 ? tail : format_coeff(term.coeff) + " * " + tail);
      } else {
        named.push_back(term_text(term));
      }
    }
    if (named.size() == 1) {
      parts.push_back(named[0] + " . " + tail);
    } else if (named.size() > 1) {
      std::string joined;
      for (const auto& s : named) joined += (joined.empty() ? "" : " + ") + s;
      parts.push_back("(" + joined + ") . " + tail);
    }
  }
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : " + ") + p;
  return out;
}

}  // namespace

ActivationTree::ActivationTree(std::shared_ptr<const Quiver> q, std::vector<TreeNode> nodes,
                               int input_vertex, int output_vertex)
    : quiver_(std::move(q)), nodes_(std::move(nodes)), input_(input_vertex), output_(output_vertex) {
  if (nodes_.empty() || nodes_[0].kind != TreeNode::Kind::Root) {
    throw TypeError("activation tree needs a root node");
  }
}

std::vector<int> ActivationTree::postorder() const {
  std::vector<int> out;
  std::vector<std::pair<int, bool>> stack{{0, false}};
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (expanded) {
      out.push_back(n);
      continue;
    }
    stack.push_back({n, true});
    const auto& kids = nodes_[static_cast<std::size_t>(n)].children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({*it, false});
  }
  return out;
}

int ActivationTree::activation_depth(int i) const {
  int depth = 0;
  for (int n = i; n > 0; n = nodes_[static_cast<std::size_t>(n)].parent) {
    if (nodes_[static_cast<std::size_t>(n)].kind == TreeNode::Kind::Activation) ++depth;
  }
  return depth;
}

std::vector<int> ActivationTree::chain_to(int i) const {
  std::vector<int> chain;
  for (int n = i; n > 0; n = nodes_[static_cast<std::size_t>(n)].parent) chain.push_back(n);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

ActivationTree ActivationTree::operator+(const ActivationTree& other) const {
  if (input_ != other.input_ || output_ != other.output_) throw TypeError("cannot add trees of different types");
  std::vector<TreeNode> nodes = nodes_;
  const int offset = static_cast<int>(nodes.size()) - 1;
  for (std::size_t i = 1; i < other.nodes_.size(); ++i) {
    TreeNode n = other.nodes_[i];
    n.parent = n.parent == 0 ? 0 : n.parent + offset;
    for (int& c : n.children) c += offset;
    nodes.push_back(std::move(n));
  }
  for (int c : other.nodes_[0].children) nodes[0].children.push_back(c + offset);
  return ActivationTree(quiver_, std::move(nodes), input_, output_);
}

bool ActivationTree::structurally_equal(const ActivationTree& other) const {
  if (nodes_.size() != other.nodes_.size() || input_ != other.input_ || output_ != other.output_) {
    return false;
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& a = nodes_[i];
    const TreeNode& b = other.nodes_[i];
    if (a.kind != b.kind || a.activation != b.activation || a.block != b.block ||
        a.parent != b.parent || a.children != b.children) {
      return false;
    }
    if (i > 0 && !(a.label == b.label)) return false;
  }
  return true;
}

ActivationTree parse_algorithm(const std::string& text, std::shared_ptr<const Quiver> q,
                               const std::vector<int>& activation_ids) {
  std::vector<Ast> pool;
  Parser parser(tokenize(text));
  const int root = parser.parse_all(pool);

  int input = 0, output = 0;
  try {
    input = q->unique_vertex_with_role(Role::Input);
    output = q->unique_vertex_with_role(Role::Output);
  } catch (const ConfigError& e) {
    throw UnknownSymbol(std::string("algorithm needs unique input and output vertices: ") + e.what());
  }
  q->topological_indices();

  Context ctx{*q, input, output, activation_ids};
  Types ty(*q);
  infer(pool, root, ty, ctx);
  ty.fix(pool[static_cast<std::size_t>(root)].dst, f_space(*q, output), 0);
  ty.fix(pool[static_cast<std::size_t>(root)].src, f_space(*q, input), 0);

  const Sym sym = build_sym(pool, root, ty, ctx);
  std::vector<TreeNode> nodes(1);
  nodes[0].kind = TreeNode::Kind::Root;
  nodes[0].block = output;
  grow(sym, 0, output, input, *q, nodes);
  return ActivationTree(std::move(q), std::move(nodes), input, output);
}

std::string pretty_print(const ActivationTree& t) { return subtree_text(t, 0); }

int grade(const ActivationTree& t) {
  int g = 0;
  for (std::size_t i = 0; i < t.size(); ++i) g = std::max(g, t.activation_depth(static_cast<int>(i)));
  return g;
}

FormTree differentiate(const ActivationTree& t) {
  FormTree f;
  for (std::size_t i = 1; i < t.size(); ++i) f.summands.push_back({t.chain_to(static_cast<int>(i))});
  return f;
}

std::string to_string(const EdgeLabel& label) {
  std::string out;
  for (const auto& term : label.terms) {
    std::string w = term.word.empty() ? "id_F" + std::to_string(label.src_vertex) : word_text(term.word);
    if (term.coeff != 1.0) w = format_coeff(term.coeff) + " * " + w;
    out += (out.empty() ? "" : " + ") + w;
  }
  return out.empty() ? "0" : out;
}

std::string describe(const ActivationTree& t, const FormSummand& s) {
  std::string out;
  for (std::size_t k = 0; k + 1 < s.chain.size(); ++k) {
    const TreeNode& n = t.node(s.chain[k]);
    out += "[" + to_string(n.label) + "] D(s" + std::to_string(n.activation) + ") ";
  }
  const TreeNode& last = t.node(s.node());
  out += "d[" + to_string(last.label) + "] ";
  out += last.kind == TreeNode::Kind::Leaf ? "(x)" : "(s" + std::to_string(last.activation) + " o alpha)";
  return out;
}

}  // namespace qml
