#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "seldoor/graph.hpp"

namespace {

using seldoor::Admg;
using seldoor::BidirectedEdge;
using seldoor::DirectedEdge;
using seldoor::Errc;

Admg two_mediators() {
  // X -> M1 -> Y, X -> M2 -> Y, M1 -> M2.
  return Admg({"X", "M1", "M2", "Y"},
              {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}}, {});
}

TEST(GraphBasics, AccessorsAndLookup) {
  const Admg g = two_mediators();
  EXPECT_EQ(g.vertex_count(), 4);
  EXPECT_EQ(g.name(2), "M2");
  EXPECT_EQ(g.index_of("Y"), 3);
  EXPECT_THROW(
      {
        try {
          g.index_of("W");
        } catch (const seldoor::Error& e) {
          EXPECT_EQ(e.code(), Errc::unknown_vertex);
          throw;
        }
      },
      seldoor::Error);
  EXPECT_TRUE(g.has_directed(0, 1));
  EXPECT_FALSE(g.has_directed(1, 0));
  EXPECT_FALSE(g.has_bidirected(0, 1));
}

TEST(GraphBasics, BidirectedLookupIsSymmetric) {
  const Admg g({"A", "B"}, {}, {{0, 1}});
  EXPECT_TRUE(g.has_bidirected(0, 1));
  EXPECT_TRUE(g.has_bidirected(1, 0));
}

TEST(GraphBasics, BidirectedEdgeEqualityIgnoresOrder) {
  EXPECT_TRUE((BidirectedEdge{0, 1} == BidirectedEdge{1, 0}));
  EXPECT_FALSE((BidirectedEdge{0, 1} == BidirectedEdge{0, 2}));
  EXPECT_TRUE((DirectedEdge{0, 1} == DirectedEdge{0, 1}));
  EXPECT_FALSE((DirectedEdge{0, 1} == DirectedEdge{1, 0}));
}

TEST(GraphValidate, AcceptsWellFormedGraph) {
  EXPECT_TRUE(seldoor::validate(two_mediators()).ok);
  EXPECT_TRUE(seldoor::validate(Admg({"solo"}, {}, {})).ok);
}

TEST(GraphValidate, RejectsEmptyGraph) {
  const auto r = seldoor::validate(Admg({}, {}, {}));
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.code, Errc::unknown_vertex);
}

TEST(GraphValidate, RejectsEdgeAgainstTheOrdering) {
  const auto r = seldoor::validate(Admg({"A", "B"}, {{1, 0}}, {}));
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.code, Errc::cycle_or_order_violation);
}

TEST(GraphValidate, RejectsSelfLoops) {
  EXPECT_EQ(seldoor::validate(Admg({"A", "B"}, {{1, 1}}, {})).code, Errc::self_loop);
  EXPECT_EQ(seldoor::validate(Admg({"A", "B"}, {}, {{0, 0}})).code, Errc::self_loop);
}

TEST(GraphValidate, RejectsDuplicateEdges) {
  EXPECT_EQ(seldoor::validate(Admg({"A", "B"}, {{0, 1}, {0, 1}}, {})).code, Errc::duplicate_edge);
  // Reversed listing is the same bidirected edge.
  EXPECT_EQ(seldoor::validate(Admg({"A", "B"}, {}, {{0, 1}, {1, 0}})).code, Errc::duplicate_edge);
}

TEST(GraphValidate, RejectsOutOfRangeEndpoints) {
  EXPECT_EQ(seldoor::validate(Admg({"A", "B"}, {{0, 2}}, {})).code, Errc::unknown_vertex);
  EXPECT_EQ(seldoor::validate(Admg({"A", "B"}, {}, {{-1, 1}})).code, Errc::unknown_vertex);
}

TEST(GraphValidate, RejectsBadNames) {
  EXPECT_EQ(seldoor::validate(Admg({"A", ""}, {}, {})).code, Errc::unknown_vertex);
  EXPECT_EQ(seldoor::validate(Admg({"A", "A"}, {}, {})).code, Errc::duplicate_edge);
}

TEST(GraphValidate, RejectsOversizedGraph) {
  std::vector<std::string> names;
  for (int i = 0; i < seldoor::kMaxVertices + 1; ++i) names.push_back("v" + std::to_string(i));
  EXPECT_EQ(seldoor::validate(Admg(names, {}, {})).code, Errc::graph_too_large);
}

TEST(GraphReach, StrictAncestorsAndDescendants) {
  const Admg g = two_mediators();
  EXPECT_EQ(seldoor::ancestors(g, 3), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(seldoor::ancestors(g, 0), (std::vector<int>{}));
  EXPECT_EQ(seldoor::descendants(g, 0), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(seldoor::descendants(g, 3), (std::vector<int>{}));
  // Reachability is directed only; bidirected edges do not contribute.
  const Admg h({"A", "B"}, {}, {{0, 1}});
  EXPECT_EQ(seldoor::descendants(h, 0), (std::vector<int>{}));
  EXPECT_EQ(seldoor::ancestors(h, 1), (std::vector<int>{}));
}

TEST(GraphReach, ChecksVertexRange) {
  const Admg g = two_mediators();
  EXPECT_THROW(seldoor::ancestors(g, 4), seldoor::Error);
  EXPECT_THROW(seldoor::descendants(g, -1), seldoor::Error);
}

}  // namespace
