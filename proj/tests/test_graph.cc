#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "revtime/graph/collab_graph.h"
#include "support/criteria.h"
#include "support/graph_oracle.h"

using namespace revtime;
using namespace revtime::graph;

namespace {

using Edge = std::pair<AccountId, AccountId>;

InteractionGraph make(std::vector<AccountId> nodes, std::vector<Edge> edges) {
  return InteractionGraph::from_edges(nodes, edges);
}

const InteractionGraph& star() {
  static const auto g = make({1, 2, 3, 4}, {{1, 2}, {1, 3}, {1, 4}});
  return g;
}

const InteractionGraph& path3() {
  static const auto g = make({1, 2, 3}, {{1, 2}, {2, 3}});
  return g;
}

const InteractionGraph& triangle() {
  static const auto g = make({1, 2, 3}, {{1, 2}, {2, 3}, {1, 3}});
  return g;
}

Timestamp at(int day) { return from_unix_seconds(1600000000 + day * 86400LL); }

ChangeRecord change(AccountId owner, std::vector<AccountId> authors, int day) {
  ChangeRecord c;
  c.owner_id = owner;
  c.created_at = at(day);
  for (auto a : authors) {
    ReviewMessage m;
    m.author_id = a;
    m.posted_at = at(day) + std::chrono::hours(1);
    c.messages.push_back(m);
  }
  return c;
}

}  // namespace

TEST(BuildGraph, EmptyHistoryGivesEmptyGraph) {
  const auto g = build_graph({}, at(10));
  EXPECT_EQ(g.node_count(), 0u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(BuildGraph, OwnerToEachReviewer) {
  const std::vector<ChangeRecord> h{change(1, {2, 3, 2, 1}, 0)};
  const auto g = build_graph(h, at(5));
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.weight(1, 2), 1);
  EXPECT_EQ(g.weight(1, 3), 1);
  EXPECT_EQ(g.weight(2, 3), 0);
}

TEST(BuildGraph, WeightCountsChangesNotMessages) {
  const std::vector<ChangeRecord> h{change(1, {2, 2, 2}, 0), change(1, {2}, 1)};
  EXPECT_EQ(build_graph(h, at(5)).weight(1, 2), 2);
}

TEST(BuildGraph, RespectsWindowAndAsOf) {
  std::vector<ChangeRecord> h{change(1, {2}, 0), change(1, {3}, 20), change(1, {4}, 30)};
  const auto g = build_graph(h, at(30), 15);
  EXPECT_FALSE(g.contains(2));  // before the window
  EXPECT_TRUE(g.contains(3));
  EXPECT_FALSE(g.contains(4));  // created at as_of
}

TEST(BuildGraph, SkipsBotsSystemMessagesAndLateMessages) {
  auto c = change(1, {2, 3}, 0);
  c.messages[1].from_bot = true;
  ReviewMessage system;
  system.posted_at = at(0);
  c.messages.push_back(system);
  ReviewMessage late;
  late.author_id = 4;
  late.posted_at = at(9);
  c.messages.push_back(late);
  const std::vector<ChangeRecord> h{c};
  const auto g = build_graph(h, at(5));
  EXPECT_TRUE(g.contains(2));
  EXPECT_FALSE(g.contains(3));
  EXPECT_FALSE(g.contains(4));
  EXPECT_FALSE(g.contains(kNoAccount));
}

TEST(BuildGraph, EdgeListDump) {
  std::ostringstream out;
  make({1, 2, 3}, {{2, 1}, {1, 2}, {3, 2}}).write_edge_list(out);
  EXPECT_EQ(out.str(), "1 2 2\n2 3 1\n");
}

TEST(Degree, StarCenterAndLeaf) {
  EXPECT_DOUBLE_EQ(degree_centrality(star(), 1), 1.0);
  EXPECT_DOUBLE_EQ(degree_centrality(star(), 2), 1.0 / 3);
  EXPECT_EQ(degree_centrality(make({1, 2}, {}), 1), 0.0);
  EXPECT_EQ(degree_centrality(star(), 99), 0.0);
}

TEST(Closeness, PathValues) {
  EXPECT_DOUBLE_EQ(closeness_centrality(path3(), 2), 1.0);
  EXPECT_DOUBLE_EQ(closeness_centrality(path3(), 1), 2.0 / 3);
  EXPECT_EQ(closeness_centrality(make({1, 2, 3}, {{2, 3}}), 1), 0.0);
}

TEST(Closeness, DisconnectedUsesComponentScaling) {
  // component {1,2} in a 4-node graph: (1/1) * (1/3)
  EXPECT_DOUBLE_EQ(closeness_centrality(make({1, 2, 3, 4}, {{1, 2}, {3, 4}}), 1), 1.0 / 3);
}

TEST(Betweenness, PathTriangleEndpoint) {
  EXPECT_DOUBLE_EQ(betweenness_centrality(path3(), 2), 1.0);
  EXPECT_EQ(betweenness_centrality(path3(), 1), 0.0);
  for (AccountId v : {1, 2, 3}) EXPECT_EQ(betweenness_centrality(triangle(), v), 0.0);
}

TEST(Eigenvector, TriangleAndStar) {
  for (AccountId v : {1, 2, 3}) EXPECT_NEAR(eigenvector_centrality(triangle(), v), 1.0, 1e-9);
  EXPECT_NEAR(eigenvector_centrality(star(), 1), 1.0, 1e-9);
  EXPECT_NEAR(eigenvector_centrality(star(), 2), 1.0 / std::sqrt(3.0), 1e-6);
  EXPECT_EQ(eigenvector_centrality(make({1, 2}, {}), 1), 0.0);
}

TEST(Clustering, Examples) {
  EXPECT_EQ(clustering_coefficient(triangle(), 1), 1.0);
  EXPECT_EQ(clustering_coefficient(star(), 1), 0.0);
  const auto tp = make({1, 2, 3, 4}, {{1, 2}, {2, 3}, {1, 3}, {1, 4}});
  EXPECT_DOUBLE_EQ(clustering_coefficient(tp, 1), 1.0 / 3);
}

TEST(Core, Examples) {
  EXPECT_EQ(core_number(triangle(), 1), 2);
  EXPECT_EQ(core_number(star(), 2), 1);
  EXPECT_EQ(core_number(make({1, 2}, {}), 1), 0);
}

TEST(CollabFeatures, AbsentOwnerIsAllZero) {
  const auto f = collab_features(star(), 42);
  EXPECT_EQ(f.degree_centrality, 0.0);
  EXPECT_EQ(f.closeness_centrality, 0.0);
  EXPECT_EQ(f.betweenness_centrality, 0.0);
  EXPECT_EQ(f.eigenvector_centrality, 0.0);
  EXPECT_EQ(f.clustering_coefficient, 0.0);
  EXPECT_EQ(f.core_number, 0);
}

TEST(GraphOracle, AllGraphsUpToSixNodes) {
  const auto r = criteria::graph_metric_oracles();
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(GraphProperties, RelabelingInvariance) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng() % 3 == 0) edges.emplace_back(i, j);
      }
    }
    std::vector<AccountId> nodes(static_cast<std::size_t>(n)), perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) nodes[i] = perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Edge> relabeled;
    for (auto [a, b] : edges) relabeled.emplace_back(perm[a] + 50, perm[b] + 50);
    std::vector<AccountId> relabeled_nodes;
    for (auto v : nodes) relabeled_nodes.push_back(perm[v] + 50);
    const auto g = make(nodes, edges);
    const auto h = make(relabeled_nodes, relabeled);
    for (int v = 0; v < n; ++v) {
      const auto a = collab_features(g, v);
      const auto b = collab_features(h, perm[v] + 50);
      EXPECT_NEAR(a.degree_centrality, b.degree_centrality, 1e-12);
      EXPECT_NEAR(a.closeness_centrality, b.closeness_centrality, 1e-12);
      EXPECT_NEAR(a.betweenness_centrality, b.betweenness_centrality, 1e-12);
      EXPECT_NEAR(a.eigenvector_centrality, b.eigenvector_centrality, 1e-8);
      EXPECT_NEAR(a.clustering_coefficient, b.clustering_coefficient, 1e-12);
      EXPECT_EQ(a.core_number, b.core_number);
    }
  }
}

TEST(GraphProperties, AddingEdgeNeverLowersDegreeOrCore) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 6);
    std::vector<AccountId> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back(i);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng() % 2) edges.emplace_back(i, j);
      }
    }
    const auto before = make(nodes, edges);
    const AccountId a = static_cast<AccountId>(rng() % n);
    AccountId b = static_cast<AccountId>(rng() % n);
    if (a == b) b = (b + 1) % n;
    edges.emplace_back(a, b);
    const auto after = make(nodes, edges);
    for (auto v : nodes) {
      EXPECT_GE(degree_centrality(after, v), degree_centrality(before, v));
      EXPECT_GE(core_number(after, v), core_number(before, v));
      const double e = eigenvector_centrality(after, v);
      EXPECT_GE(e, 0.0);
      EXPECT_LE(e, 1.0 + 1e-12);
    }
  }
}
