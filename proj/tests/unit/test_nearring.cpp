#include <gtest/gtest.h>

#include "quiverml/errors.hpp"
#include "quiverml/nearring.hpp"
#include "support/oracles.hpp"

using namespace qml;
using namespace qml::testing;

namespace {

int count_kind(const ActivationTree& t, TreeNode::Kind k) {
  int n = 0;
  for (const auto& node : t.nodes()) n += node.kind == k;
  return n;
}

// The nested element a_0 + a_1 s(a_10 + a_11 s(a_110)) on the chain quiver.
constexpr const char* kNested =
    "eout* . a3 . a2 . a1 . ein + eout* . a3 . e3 . s2 . "
    "( e3* . a2 . a1 . ein + e3* . a2 . e2 . s3 . e2* . a1 . ein )";

}  // namespace

TEST(NearRing, DiamondAlgorithmStructure) {
  auto t = parse_algorithm(kDiamondAlgorithm, diamond_quiver());
  ASSERT_EQ(t.size(), 5u);
  EXPECT_EQ(count_kind(t, TreeNode::Kind::Activation), 2);
  EXPECT_EQ(count_kind(t, TreeNode::Kind::Leaf), 2);
  EXPECT_EQ(grade(t), 1);

  const TreeNode& branch = t.node(t.node(0).children[0]);
  EXPECT_EQ(branch.activation, 2);
  EXPECT_EQ(branch.block, 3);
  ASSERT_EQ(branch.label.terms.size(), 1u);
  EXPECT_EQ(branch.label.terms[0].segments, (std::vector<Segment>{{3, {4}, 4}}));
  const TreeNode& leaf = t.node(branch.children[0]);
  EXPECT_EQ(leaf.kind, TreeNode::Kind::Leaf);
  EXPECT_EQ(leaf.label.terms[0].segments, (std::vector<Segment>{{1, {2}, 3}}));

  const TreeNode& other = t.node(t.node(0).children[1]);
  EXPECT_EQ(other.activation, 3);
  EXPECT_EQ(other.block, 2);
}

TEST(NearRing, LinearTree) {
  auto t = parse_algorithm("eout* . a1 . ein", a2_quiver());
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(grade(t), 0);
  EXPECT_EQ(t.node(1).kind, TreeNode::Kind::Leaf);
  EXPECT_EQ(t.node(1).label.terms[0].segments, (std::vector<Segment>{{1, {1}, 2}}));
  EXPECT_EQ(differentiate(t).summands.size(), 1u);
}

TEST(NearRing, TypeErrors) {
  auto a2 = a2_quiver();
  EXPECT_THROW(parse_algorithm("eout* . s1 . ein", a2), TypeError);
  EXPECT_THROW(parse_algorithm("eout* . a1 . ein . s2", a2), TypeError);
  EXPECT_THROW(parse_algorithm("eout* . ein", a2), TypeError);
  EXPECT_THROW(parse_algorithm("eout* . a1 . ein + ein", a2), TypeError);
  EXPECT_THROW(parse_algorithm("a1 . ein", a2), TypeError);
  auto d = diamond_quiver();
  EXPECT_THROW(parse_algorithm("eout* . a4 . e2 . s2 . e2* . a1 . ein", d), TypeError);
}

TEST(NearRing, UnknownSymbols) {
  auto a2 = a2_quiver();
  EXPECT_THROW(parse_algorithm("eout* . a9 . ein", a2), UnknownSymbol);
  EXPECT_THROW(parse_algorithm("eout* . a1 . e7 . ein", a2), UnknownSymbol);
  EXPECT_THROW(parse_algorithm(kDiamondAlgorithm, diamond_quiver(), {1, 2}), UnknownSymbol);
  EXPECT_THROW(parse_algorithm("e1* . e1", a1_quiver()), UnknownSymbol);
}

TEST(NearRing, ParseErrorsCarryPositions) {
  auto a2 = a2_quiver();
  try {
    parse_algorithm("eout* . . ein", a2);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 8u);
  }
  EXPECT_THROW(parse_algorithm("eout* . (a1 . ein", a2), ParseError);
  EXPECT_THROW(parse_algorithm("eout* a1 . ein", a2), ParseError);
  EXPECT_THROW(parse_algorithm("eout* . a1 . ein)", a2), ParseError);
  EXPECT_THROW(parse_algorithm("2 a1", a2), ParseError);
  EXPECT_THROW(parse_algorithm("eout* . a1 . ein ?", a2), ParseError);
  EXPECT_THROW(parse_algorithm("", a2), ParseError);
}

TEST(NearRing, WhitespaceInsignificant) {
  auto a = parse_algorithm(kDiamondAlgorithm, diamond_quiver());
  auto b = parse_algorithm("eout*.(a4.e3.s2.e3*.a2+a3.e2.s3.e2*.a1).ein", diamond_quiver());
  EXPECT_TRUE(a.structurally_equal(b));
}

TEST(NearRing, CoefficientsAndPolymorphicActivations) {
  auto q = chain_quiver();
  auto t = parse_algorithm("eout* . a3 . e3 . (s2 + 0.5 * s3) . e3* . a2 . a1 . ein", q);
  ASSERT_EQ(count_kind(t, TreeNode::Kind::Activation), 2);
  EXPECT_EQ(t.node(t.node(0).children[1]).label.terms[0].coeff, 0.5);
  EXPECT_EQ(t.node(t.node(0).children[1]).block, 3);

  auto scaled = parse_algorithm("-2.5 * eout* . a3 . a2 . a1 . ein", q);
  EXPECT_EQ(scaled.node(1).label.terms[0].coeff, -2.5);
}

TEST(NearRing, IdentityEdgeBetweenActivations) {
  auto t = parse_algorithm("eout* . a3 . e3 . s2 . s4 . e3* . a2 . a1 . ein", chain_quiver());
  EXPECT_EQ(grade(t), 2);
  const TreeNode& inner = t.node(t.node(t.node(0).children[0]).children[0]);
  EXPECT_EQ(inner.activation, 4);
  ASSERT_EQ(inner.label.terms.size(), 1u);
  EXPECT_TRUE(inner.label.terms[0].segments.empty());
}

TEST(NearRing, RoundTripPrettyPrint) {
  const std::vector<std::pair<QuiverPtr, std::string>> cases = {
      {diamond_quiver(), kDiamondAlgorithm},
      {a2_quiver(), "eout* . a1 . ein"},
      {chain_quiver(), kChainAlgorithm},
      {chain_quiver(), kNested},
      {chain_quiver(), "eout* . a3 . e3 . (s2 + 0.30000000000000004 * s3) . e3* . a2 . a1 . ein"},
      {chain_quiver(), "eout* . a3 . e3 . s2 . s4 . e3* . a2 . a1 . ein"},
      {chain_quiver(), "(eout* . a3 + -1.5 * eout* . a3 . e3 . e3*) . e3 . s2 . e3* . a2 . a1 . ein"},
  };
  for (const auto& [q, text] : cases) {
    auto t = parse_algorithm(text, q);
    const std::string printed = pretty_print(t);
    auto again = parse_algorithm(printed, q);
    EXPECT_TRUE(t.structurally_equal(again)) << text << "\n -> " << printed;
    EXPECT_EQ(pretty_print(again), printed);
  }
}

TEST(NearRing, DifferentialSummandsOnePerNonRootNode) {
  auto nested = parse_algorithm(kNested, chain_quiver());
  EXPECT_EQ(grade(nested), 2);
  const FormTree f = differentiate(nested);
  EXPECT_EQ(f.summands.size(), 5u);
  EXPECT_EQ(f.degree, 1);
  // Chains: leaf a_0, node s2, leaf under s2, node s3, leaf under s3.
  std::vector<std::size_t> lengths;
  for (const auto& s : f.summands) lengths.push_back(s.chain.size());
  EXPECT_EQ(lengths, (std::vector<std::size_t>{1, 1, 2, 2, 3}));

  auto diamond = parse_algorithm(kDiamondAlgorithm, diamond_quiver());
  EXPECT_EQ(differentiate(diamond).summands.size(), diamond.size() - 1);
  EXPECT_EQ(differentiate(diamond).summands.size(), 4u);
  EXPECT_NE(describe(diamond, differentiate(diamond).summands[1]).find("D(s2)"), std::string::npos);
}

TEST(NearRing, SumOfTreesMergesRoots) {
  auto q = diamond_quiver();
  auto a = parse_algorithm("eout* . a4 . e3 . s2 . e3* . a2 . ein", q);
  auto b = parse_algorithm("eout* . a3 . e2 . s3 . e2* . a1 . ein", q);
  auto sum = a + b;
  auto direct = parse_algorithm(kDiamondAlgorithm, q);
  EXPECT_TRUE(sum.structurally_equal(direct));
}

TEST(NearRing, GradeOfChain) {
  EXPECT_EQ(grade(parse_algorithm(kChainAlgorithm, chain_quiver())), 2);
}
