#include "kgrat/multipath_astar.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "kgrat/error.hpp"
#include "kgrat/graph_gen.hpp"
#include "kgrat/landmark.hpp"
#include "kgrat/report_json.hpp"
#include "oracles.hpp"
#include "random_graphs.hpp"

namespace kgrat {
namespace {

const std::filesystem::path kData = KGRAT_TEST_DATA_DIR;

EntityId Id(const KnowledgeGraph& g, std::string_view label) {
  return g.entity_by_label(label).value();
}

std::vector<std::uint32_t> Costs(const SearchReport& r) {
  std::vector<std::uint32_t> out;
  for (const auto& p : r.paths) out.push_back(p.cost());
  return out;
}

void ExpectWellFormed(const SearchReport& r, const KnowledgeGraph& g, const SearchConfig& cfg,
                      EntityId start, EntityId goal) {
  EXPECT_LE(r.paths.size(), cfg.max_paths);
  for (std::size_t i = 0; i < r.paths.size(); ++i) {
    const auto& p = r.paths[i];
    EXPECT_TRUE(is_loopless(p));
    EXPECT_TRUE(follows_graph(p, g, cfg.traversal));
    EXPECT_LE(p.cost(), cfg.max_depth);
    EXPECT_EQ(p.start, start);
    if (p.complete) EXPECT_EQ(p.end, goal);
    if (i > 0) EXPECT_LE(r.paths[i - 1].cost(), p.cost());
    for (std::size_t j = 0; j < i; ++j) EXPECT_NE(r.paths[j].steps, p.steps);
  }
}

KnowledgeGraph PathFromLetters() {
  return load_graph_text("a\tr\tb\nb\tr\tc\nc\tr\td\nd\tr\te\ne\tr\tf\n");
}

KnowledgeGraph Diamond() { return load_graph_text("a\tr\tb\nb\tr\td\na\tr\tc\nc\tr\td\na\tr\td\n"); }

TEST(FindPathsTest, SunExample) {
  const auto g = load_graph_file(kData / "sun.tsv");
  const auto sun = Id(g, "the Sun");
  const auto white = Id(g, "white light");
  SearchConfig cfg;
  cfg.max_paths = 1;
  const auto table = make_landmarks(g, white, {});
  cfg.heuristic = &table;
  const auto r = find_paths(g, sun, white, cfg);
  ASSERT_EQ(r.paths.size(), 1u);
  const auto& p = r.paths[0];
  EXPECT_EQ(p.cost(), 2u);
  EXPECT_TRUE(p.complete);
  EXPECT_EQ(g.relation_label(p.steps[0].relation), "emits");
  EXPECT_EQ(p.steps[0].entity, Id(g, "full-spectrum light"));
  EXPECT_EQ(p.steps[1].entity, white);
  EXPECT_EQ(p.steps[1].direction, Direction::kForward);
}

TEST(FindPathsTest, StartEqualsGoal) {
  const auto g = Diamond();
  const auto a = Id(g, "a");
  const auto r = find_paths(g, a, a, {});
  ASSERT_EQ(r.paths.size(), 1u);
  EXPECT_EQ(r.paths[0].cost(), 0u);
  EXPECT_TRUE(r.paths[0].complete);
}

TEST(FindPathsTest, DiamondCosts) {
  const auto g = Diamond();
  SearchConfig cfg;
  cfg.traversal = Traversal::kOutgoing;
  const auto r = find_paths(g, Id(g, "a"), Id(g, "d"), cfg);
  EXPECT_EQ(Costs(r), (std::vector<std::uint32_t>{1, 2, 2}));
  EXPECT_EQ(Costs(find_paths_bfs_oracle(g, Id(g, "a"), Id(g, "d"), cfg)),
            (std::vector<std::uint32_t>{1, 2, 2}));
  ExpectWellFormed(r, g, cfg, Id(g, "a"), Id(g, "d"));
}

TEST(FindPathsTest, NoPathWithinDepth) {
  const auto g = gen::chain(6);
  SearchConfig cfg;
  const auto s = Id(g, "n0");
  const auto t = Id(g, "n6");
  EXPECT_TRUE(find_paths(g, s, t, cfg).paths.empty());
  EXPECT_TRUE(find_paths_bfs_oracle(g, s, t, cfg).paths.empty());
}

TEST(FindPathsTest, RejectsBadInput) {
  const auto g = Diamond();
  SearchConfig cfg;
  EXPECT_THROW(find_paths(g, EntityId(50), Id(g, "a"), cfg), LookupError);
  cfg.max_paths = 0;
  EXPECT_THROW(find_paths(g, Id(g, "a"), Id(g, "d"), cfg), ConfigError);
  SearchConfig wrong_goal;
  const auto table = make_landmarks(g, Id(g, "b"), {});
  wrong_goal.heuristic = &table;
  EXPECT_THROW(find_paths(g, Id(g, "a"), Id(g, "d"), wrong_goal), ConfigError);
}

TEST(FindPathsTest, ParallelRelationsAreDistinctPaths) {
  const auto g = load_graph_text("a\tr1\tb\na\tr2\tb\n");
  const auto r = find_paths(g, Id(g, "a"), Id(g, "b"), {});
  EXPECT_EQ(Costs(r), (std::vector<std::uint32_t>{1, 1}));
}

TEST(FindPathsTest, ZeroHeuristicMatchesOracleOnRandomGraphs) {
  for (const auto& c : testing::bounded_degree_graphs(21, 100, 20, 5)) {
    const auto& g = c.graph;
    SearchConfig cfg;
    cfg.max_paths = 4;
    cfg.max_depth = 4;
    const EntityId s(0);
    const EntityId t(static_cast<std::uint32_t>(g.entity_count() - 1));
    const auto expected = oracle::cheapest(
        oracle::all_simple_path_costs(g, s.value(), t.value(), cfg.max_depth, cfg.traversal),
        cfg.max_paths);
    const auto r = find_paths(g, s, t, cfg);
    EXPECT_EQ(Costs(r), expected) << c.name;
    EXPECT_EQ(Costs(find_paths_bfs_oracle(g, s, t, cfg)), expected) << c.name;
    ExpectWellFormed(r, g, cfg, s, t);
  }
}

TEST(FindPathsTest, LandmarkMatchesOracleAndDominates) {
  for (const auto& c : testing::bounded_degree_graphs(22, 60, 30, 5)) {
    const auto& g = c.graph;
    for (std::uint32_t goal = 1; goal < g.entity_count(); goal += 4) {
      SearchConfig cfg;
      cfg.max_paths = 1 + goal % 5;
      cfg.max_depth = 1 + goal % 6;
      const auto table = make_landmarks(g, EntityId(goal), {});
      const auto zero = find_paths(g, EntityId(0), EntityId(goal), cfg);
      cfg.heuristic = &table;
      const auto guided = find_paths(g, EntityId(0), EntityId(goal), cfg);
      const auto expected = oracle::cheapest(
          oracle::all_simple_path_costs(g, 0, goal, cfg.max_depth, cfg.traversal),
          cfg.max_paths);
      EXPECT_EQ(Costs(guided), expected) << c.name << " goal " << goal;
      EXPECT_LE(guided.nodes_expanded, zero.nodes_expanded) << c.name << " goal " << goal;
      ExpectWellFormed(guided, g, cfg, EntityId(0), EntityId(goal));
      if (!guided.paths.empty()) {
        const auto dist = oracle::bfs(g, 0, cfg.traversal);
        EXPECT_EQ(guided.paths[0].cost(), dist[goal]);
      }
    }
  }
}

TEST(FrontierFallbackTest, PartialPathOnLongChain) {
  const auto g = PathFromLetters();
  SearchConfig cfg;
  const auto a = Id(g, "a");
  const auto f = Id(g, "f");
  const auto table = make_landmarks(g, f, {});
  cfg.heuristic = &table;
  const auto r = find_paths_or_frontier(g, a, f, cfg);
  ASSERT_EQ(r.paths.size(), 1u);
  const auto& p = r.paths[0];
  EXPECT_FALSE(p.complete);
  EXPECT_EQ(p.cost(), 3u);
  EXPECT_EQ(p.end, Id(g, "d"));
}

TEST(FrontierFallbackTest, ShortComponentGivesLongestPrefix) {
  const auto g = load_graph_text("a\tr\tb\nb\tr\tc\nx\tr\ty\n");
  SearchConfig cfg;
  const auto r = find_paths_or_frontier(g, Id(g, "a"), Id(g, "y"), cfg);
  ASSERT_EQ(r.paths.size(), 1u);
  EXPECT_EQ(r.paths[0].cost(), 2u);
  EXPECT_FALSE(r.paths[0].complete);
}

TEST(FrontierFallbackTest, RanksByHeuristicDecrease) {
  const auto g = load_graph_text(
      "s\tr\tx1\nx1\tr\tx2\nx2\tr\tx3\nx2\tr\tx4\n"
      "s\tr\ty1\ny1\tr\ty2\ny2\tr\ty3\ny3\tr\tg\n");
  SearchConfig cfg;
  cfg.max_paths = 3;
  const auto goal = Id(g, "g");
  const auto s = Id(g, "s");
  const auto table = make_landmarks(g, goal, {});
  cfg.heuristic = &table;
  const auto r = find_paths_or_frontier(g, s, goal, cfg);
  ASSERT_EQ(r.paths.size(), 3u);
  auto decrease = [&](const ReasoningPath& p) {
    return static_cast<int>(table.h(s)) - static_cast<int>(table.h(p.end));
  };
  for (std::size_t i = 0; i < r.paths.size(); ++i) {
    EXPECT_EQ(r.paths[i].cost(), 3u);
    EXPECT_FALSE(r.paths[i].complete);
    if (i > 0) {
      EXPECT_GE(decrease(r.paths[i - 1]), decrease(r.paths[i]));
      if (decrease(r.paths[i - 1]) == decrease(r.paths[i])) {
        EXPECT_LT(r.paths[i - 1].steps, r.paths[i].steps);
      }
    }
  }
}

TEST(FrontierFallbackTest, NotUsedWhenGoalReachable) {
  const auto g = Diamond();
  const auto r = find_paths_or_frontier(g, Id(g, "a"), Id(g, "d"), {});
  for (const auto& p : r.paths) EXPECT_TRUE(p.complete);
}

TEST(ReportJsonTest, Shape) {
  const auto g = load_graph_file(kData / "sun.tsv");
  const auto r = find_paths(g, Id(g, "the Sun"), Id(g, "white light"), {});
  const auto j = report_to_json(r, g);
  EXPECT_TRUE(j.contains("nodes_expanded"));
  EXPECT_TRUE(j.contains("queue_pushes"));
  EXPECT_TRUE(j.contains("wall_time_ms"));
  const auto& p = j["paths"][0];
  EXPECT_EQ(p["cost"], 2);
  EXPECT_EQ(p["complete"], true);
  EXPECT_EQ(p["steps"][0].dump(), R"(["emits","→","full-spectrum light"])");
  EXPECT_EQ(path_from_json(p, g), r.paths[0]);
}

}  // namespace
}  // namespace kgrat
