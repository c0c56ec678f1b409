#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "quiverml/errors.hpp"
#include "quiverml/quiver.hpp"
#include "support/oracles.hpp"

using namespace qml;
using namespace qml::testing;

TEST(Quiver, TopologicalOrderA2) {
  EXPECT_EQ(a2_quiver()->topological_order(), (std::vector<int>{1, 2}));
}

TEST(Quiver, TopologicalOrderDiamond) {
  EXPECT_EQ(diamond_quiver()->topological_order(), (std::vector<int>{1, 2, 3, 4}));
}

TEST(Quiver, TopologicalOrderTiesByAscendingId) {
  Quiver q({{5, 1, 1}, {3, 1, 1}, {9, 1, 1}}, {{1, 9, 5}});
  EXPECT_EQ(q.topological_order(), (std::vector<int>{3, 9, 5}));
}

TEST(Quiver, TwoCycleThrows) {
  Quiver q({{1, 1, 1}, {2, 1, 1}}, {{1, 1, 2}, {2, 2, 1}});
  EXPECT_THROW(q.topological_order(), CycleError);
  EXPECT_FALSE(q.is_acyclic());
  EXPECT_THROW(q.paths_into(1), CycleError);
  EXPECT_THROW(moduli_dimension(q), CycleError);
}

TEST(Quiver, ConstructionValidates) {
  EXPECT_THROW(Quiver({{1, 1, 1}, {1, 1, 1}}, {}), ConfigError);
  EXPECT_THROW(Quiver({{1, 1, 1}}, {{1, 1, 2}}), UnknownVertex);
  EXPECT_THROW(Quiver({{1, 1, 0}}, {}), ConfigError);
  EXPECT_THROW(Quiver({{1, 1, 1}, {2, 1, 1}}, {{1, 1, 2}, {1, 1, 2}}), ConfigError);
}

TEST(Quiver, PathsIntoA1AndA2) {
  auto a1 = a1_quiver();
  auto p1 = a1->paths_into(1);
  ASSERT_EQ(p1.size(), 1u);
  EXPECT_TRUE(p1[0].trivial());

  auto a2 = a2_quiver();
  auto p2 = a2->paths_into(2);
  ASSERT_EQ(p2.size(), 2u);
  EXPECT_TRUE(p2[0].trivial());
  EXPECT_EQ(p2[1].arrows, std::vector<int>{1});
  EXPECT_EQ(p2[1].source, 1);
  EXPECT_THROW(a2->paths_into(7), UnknownVertex);
}

TEST(Quiver, PathsIntoDiamondMatchesBruteForce) {
  auto q = diamond_quiver();
  auto paths = q->paths_into(4);
  ASSERT_EQ(paths.size(), 5u);
  std::vector<std::vector<int>> got;
  for (const auto& p : paths) got.push_back(p.arrows);
  // Deterministic order: by length, then lexicographic arrow ids.
  EXPECT_EQ(got, (std::vector<std::vector<int>>{{}, {3}, {4}, {1, 3}, {2, 4}}));
  auto expected = brute_force_paths(*q, 4);
  std::sort(expected.begin(), expected.end());
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, expected);
  EXPECT_EQ(to_string(paths[3]), "a3.a1");
}

TEST(Quiver, PathCapEnforced) {
  // Layered graph with many parallel arrows: 4^3 paths into the last vertex.
  std::vector<VertexSpec> v{{1, 1, 1}, {2, 1, 1}, {3, 1, 1}, {4, 1, 1}};
  std::vector<ArrowSpec> a;
  int id = 1;
  for (int layer = 1; layer <= 3; ++layer) {
    for (int k = 0; k < 4; ++k) a.push_back({id++, layer, layer + 1});
  }
  Quiver capped(v, a, 50);
  EXPECT_THROW(capped.paths_into(4), PathLimitExceeded);
  Quiver roomy(v, a);
  EXPECT_EQ(roomy.paths_into(4).size(), 1u + 4u + 16u + 64u);
}

TEST(Quiver, ModuliDimensionExamples) {
  EXPECT_EQ(moduli_dimension(*a1_quiver(2, 1)), 1);
  EXPECT_EQ(moduli_dimension(*a2_quiver()), 3);
  Quiver flat({{1, 2, 2}, {2, 3, 3}}, {});
  EXPECT_EQ(moduli_dimension(flat), 0);
  Quiver empty({{1, 1, 2}}, {});
  EXPECT_THROW(moduli_dimension(empty), EmptyModuli);
}

TEST(Quiver, GrassmannAmbientAndPathFramingTotals) {
  auto q = diamond_quiver(2, 3, 2, 2);
  EXPECT_EQ(q->grassmann_ambient(4), 2 + 2 + 2);
  EXPECT_EQ(q->path_framing_total(4), 2 + 3 + 3 + 2 + 2);
}

TEST(QuiverProperty, RandomQuiversPathCountsAndDimension) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    auto q = random_acyclic_quiver(rng, 6, 8, 3, false);
    const auto counts = path_counts_by_matrix_power(*q);
    for (std::size_t i = 0; i < q->num_vertices(); ++i) {
      EXPECT_EQ(static_cast<long>(q->paths_into(q->vertices()[i].id).size()), counts[i]);
    }
    const auto order = q->topological_order();
    auto pos = [&](int id) { return std::find(order.begin(), order.end(), id) - order.begin(); };
    for (const auto& a : q->arrows()) EXPECT_LT(pos(a.src), pos(a.dst));

    long rep = 0, gl = 0;
    bool empty = false;
    for (const auto& a : q->arrows()) rep += q->vertex(a.dst).d * q->vertex(a.src).d;
    for (const auto& v : q->vertices()) {
      rep += v.n * v.d;
      gl += v.d * v.d;
      if (q->grassmann_ambient(v.id) < v.d) empty = true;
    }
    if (empty) {
      EXPECT_THROW(moduli_dimension(*q), EmptyModuli);
    } else {
      EXPECT_EQ(moduli_dimension(*q), rep - gl);
    }
  }
}
