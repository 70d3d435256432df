#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "job2vec/evalkit.hpp"
#include "support.hpp"

namespace job2vec {
namespace {

// `edges` distinct edges of weight 6 over `nodes` nodes, plus light edges.
JobGraph split_graph(std::size_t nodes, std::size_t edges, std::uint64_t seed) {
  JobGraph g;
  for (std::size_t i = 0; i < nodes; ++i) g.add_node(testing::key("t" + std::to_string(i), "c"));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeId> pick(0, NodeId(nodes - 1));
  while (g.edge_count() < edges) {
    NodeId a = pick(rng), b = pick(rng);
    if (a != b && !g.edge(a, b)) g.set_edge(a, b, {6.0, 1.0, 1});
  }
  for (int extra = 0; extra < 30; ++extra) {
    NodeId a = pick(rng), b = pick(rng);
    if (a != b && !g.edge(a, b)) g.set_edge(a, b, {5.0, 1.0, 1});
  }
  return g;
}

std::multiset<EdgeRef> all_parts(const EvalSplit& s) {
  std::multiset<EdgeRef> out;
  for (const auto* part : {&s.train, &s.valid, &s.test, &s.cold_start_dropped})
    out.insert(part->begin(), part->end());
  return out;
}

std::multiset<EdgeRef> heavy_edges(const JobGraph& g, double threshold) {
  std::multiset<EdgeRef> out;
  for (const auto& [ij, stats] : g.edges())
    if (stats.w > threshold) out.insert({ij.first, ij.second});
  return out;
}

TEST(ThresholdAndSplit, EightyTenTen) {
  auto g = split_graph(15, 100, 1);
  auto s = threshold_and_split(g, 5.0, 7);
  EXPECT_EQ(s.train.size(), 80u);
  EXPECT_EQ(s.valid.size() + s.test.size() + s.cold_start_dropped.size(), 20u);
  EXPECT_EQ(all_parts(s), heavy_edges(g, 5.0));
}

TEST(ThresholdAndSplit, StrictThreshold) {
  auto g = split_graph(15, 100, 1);
  // The weight-5 edges never enter the split.
  for (const auto& e : all_parts(threshold_and_split(g, 5.0, 1))) EXPECT_EQ(g.edge(e.src, e.dst)->w, 6.0);
  EXPECT_THROW(threshold_and_split(g, 6.0, 1), SplitError);
  EXPECT_THROW(threshold_and_split(split_graph(10, 9, 1), 5.0, 1), SplitError);
}

TEST(ThresholdAndSplit, ExcludesExtendedEdges) {
  auto g = split_graph(15, 20, 3);
  for (NodeId a = 0; a < 15; ++a)
    for (NodeId b = 0; b < 15; ++b)
      if (a != b && !g.edge(a, b)) g.set_edge(a, b, {9.0, {}, 2});
  auto s = threshold_and_split(g, 5.0, 1);
  EXPECT_EQ(all_parts(s).size(), 20u);
  for (const auto& e : all_parts(s)) EXPECT_EQ(g.edge(e.src, e.dst)->order, 1);
}

TEST(ThresholdAndSplit, PartitionAndColdStartInvariants) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> nodes(4, 60), edges(10, 150);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = nodes(rng);
    std::size_t m = std::min(edges(rng), n * (n - 1));
    if (m < 10) continue;
    auto g = split_graph(n, m, rng());
    auto s = threshold_and_split(g, 5.0, rng());
    ASSERT_EQ(all_parts(s), heavy_edges(g, 5.0));
    std::set<NodeId> cand(s.candidates.begin(), s.candidates.end());
    ASSERT_TRUE(std::is_sorted(s.candidates.begin(), s.candidates.end()));
    for (const auto* part : {&s.valid, &s.test})
      for (const auto& e : *part) ASSERT_TRUE(cand.contains(e.src) && cand.contains(e.dst));
    for (const auto& e : s.cold_start_dropped)
      ASSERT_FALSE(cand.contains(e.src) && cand.contains(e.dst));
  }
}

TEST(ThresholdAndSplit, SeedDeterminesSplit) {
  auto g = split_graph(30, 120, 2);
  auto a = threshold_and_split(g, 5.0, 4);
  auto b = threshold_and_split(g, 5.0, 4);
  auto c = threshold_and_split(g, 5.0, 5);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.test, c.test);
}

EmbeddingTable table(std::vector<std::vector<double>> rows) {
  EmbeddingTable t(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), t.row(i).begin());
  return t;
}

TEST(RankCandidates, OrderingAndTies) {
  auto t = table({{1, 0}, {0, 1}, {1, 0.1}, {2, 0}, {-1, 0}, {1, 0}});
  std::vector<NodeId> cands{0, 1, 2, 3, 4, 5};
  auto ranked = rank_candidates(0, t, cands);
  // 3 and 5 are both parallel to the query: the lower id wins the tie.
  EXPECT_EQ(ranked, (std::vector<NodeId>{3, 5, 2, 1, 4}));
  EXPECT_EQ(rank_of(0, 5, t, cands), 2u);
  EXPECT_EQ(rank_of(0, 4, t, cands), 5u);
}

TEST(RankCandidates, ZeroQueryFallsBackToIdOrder) {
  auto t = table({{0, 0}, {0, 1}, {1, 0}, {3, 3}});
  std::vector<NodeId> cands{3, 1, 2, 0};
  EXPECT_EQ(rank_candidates(0, t, cands), (std::vector<NodeId>{1, 2, 3}));
  EXPECT_THROW(rank_candidates(9, t, cands), std::invalid_argument);
}

TEST(RankCandidates, ScaleInvariance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> v;
  EmbeddingTable t(40, 6);
  for (auto& x : t.data()) x = v(rng);
  auto scaled = t;
  for (auto& x : scaled.data()) x *= 3.0;
  std::vector<NodeId> cands(40);
  std::iota(cands.begin(), cands.end(), 0);
  for (NodeId q = 0; q < 40; ++q) EXPECT_EQ(rank_candidates(q, t, cands), rank_candidates(q, scaled, cands));
}

TEST(RankCandidates, RejectsNonFiniteVectors) {
  auto t = table({{1, 0}, {0, NAN}});
  std::vector<NodeId> cands{0, 1};
  EXPECT_THROW(rank_candidates(0, t, cands), std::invalid_argument);
}

TEST(Mrr, Values) {
  std::vector<std::size_t> one{1}, three{1, 2, 4}, ten{10};
  EXPECT_EQ(mrr(one), 1.0);
  EXPECT_NEAR(mrr(three), 0.5833333333333334, 1e-12);
  EXPECT_NEAR(mrr(ten), 0.1, 1e-12);
  EXPECT_THROW(mrr({}), std::invalid_argument);
  std::vector<std::size_t> zero{0};
  EXPECT_THROW(mrr(zero), std::invalid_argument);
}

TEST(Mrr, InUnitIntervalAndOneOnlyForPerfectRanks) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> rank(1, 5), len(1, 10);
  for (int t = 0; t < 500; ++t) {
    std::vector<std::size_t> ranks(len(rng));
    for (auto& r : ranks) r = rank(rng);
    double m = mrr(ranks);
    EXPECT_GT(m, 0.0);
    EXPECT_LE(m, 1.0);
    bool perfect = std::all_of(ranks.begin(), ranks.end(), [](auto r) { return r == 1; });
    EXPECT_EQ(m == 1.0, perfect);
  }
}

TEST(MpAtK, Values) {
  std::vector<std::size_t> three{3}, six{6}, mixed{1, 7, 3};
  EXPECT_EQ(mp_at_k(three, 5), 1.0);
  EXPECT_EQ(mp_at_k(six, 5), 0.0);
  EXPECT_NEAR(mp_at_k(mixed, 5), 2.0 / 3.0, 1e-12);
  EXPECT_THROW(mp_at_k({}, 5), std::invalid_argument);
  EXPECT_THROW(mp_at_k(three, 0), std::invalid_argument);
}

EvalSplit manual_split(std::vector<EdgeRef> test, std::vector<NodeId> candidates) {
  EvalSplit s;
  s.test = std::move(test);
  s.candidates = std::move(candidates);
  return s;
}

TEST(Evaluate, PerfectVectorsScoreOne) {
  // Node 2k and 2k+1 share a direction no other pair uses.
  EmbeddingTable t(20, 10);
  for (std::size_t i = 0; i < 20; ++i) t.row(i)[i / 2] = 1.0 + 0.01 * double(i % 2);
  std::vector<EdgeRef> test;
  for (NodeId k = 0; k < 10; ++k) test.push_back({2 * k, 2 * k + 1});
  std::vector<NodeId> cands(20);
  std::iota(cands.begin(), cands.end(), 0);
  auto r = evaluate("perfect", t, manual_split(test, cands));
  EXPECT_EQ(r.mrr, 1.0);
  EXPECT_EQ(r.queries, 10u);
  for (double mp : r.mp) EXPECT_EQ(mp, 1.0);
}

TEST(Evaluate, RandomVectorsMatchHarmonicBaseline) {
  const std::size_t nodes = 2001, queries = 4000;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> v;
  EmbeddingTable t(nodes, 16);
  for (auto& x : t.data()) x = v(rng);
  std::uniform_int_distribution<NodeId> pick(0, nodes - 1);
  std::vector<EdgeRef> test;
  while (test.size() < queries) {
    NodeId a = pick(rng), b = pick(rng);
    if (a != b) test.push_back({a, b});
  }
  std::vector<NodeId> cands(nodes);
  std::iota(cands.begin(), cands.end(), 0);
  auto split = manual_split(test, cands);

  // A uniform rank over n = nodes - 1 positions has E[1/R] = H_n / n.
  const double n = double(nodes - 1);
  double h1 = 0, h2 = 0;
  for (std::size_t r = 1; r <= nodes - 1; ++r) h1 += 1.0 / double(r), h2 += 1.0 / double(r * r);
  const double mean = h1 / n;
  const double sigma = std::sqrt((h2 / n - mean * mean) / double(queries));

  auto report = evaluate("random", t, split);
  EXPECT_NEAR(report.mrr, mean, 3 * sigma);

  auto mc = random_ranking_baseline(split, 2000, 3);
  EXPECT_NEAR(mc.mean, mean, 3 * sigma / std::sqrt(2000.0));
  EXPECT_NEAR(mc.stddev, sigma, 0.1 * sigma);
}

TEST(Evaluate, PrecisionMonotoneInK) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> v;
  for (int trial = 0; trial < 50; ++trial) {
    auto g = split_graph(40, 150, rng());
    auto split = threshold_and_split(g, 5.0, rng());
    EmbeddingTable t(40, 4);
    for (auto& x : t.data()) x = v(rng);
    auto r = evaluate("m", t, split);
    ASSERT_TRUE(std::is_sorted(r.mp.begin(), r.mp.end()));
    ASSERT_GT(r.mrr, 0.0);
  }
}

TEST(Evaluate, RejectsNonFiniteAndShortTables) {
  auto g = split_graph(20, 60, 1);
  auto split = threshold_and_split(g, 5.0, 1);
  EmbeddingTable t(20, 3);
  for (auto& x : t.data()) x = 1.0;
  t.row(split.candidates.front())[1] = NAN;
  EXPECT_THROW(evaluate("nan", t, split), std::invalid_argument);
  EXPECT_THROW(evaluate("short", EmbeddingTable(5, 3), split), std::invalid_argument);
}

TEST(SubsampleEdges, CountsAndDeterminism) {
  std::vector<EdgeRef> train;
  for (NodeId i = 0; i < 100; ++i) train.push_back({i, i + 1});
  EXPECT_EQ(subsample_edges(train, 0.6, 1).size(), 60u);
  EXPECT_EQ(subsample_edges(train, 0.7, 1).size(), 70u);
  EXPECT_EQ(subsample_edges(train, 1.0, 1), train);
  EXPECT_EQ(subsample_edges(train, 0.8, 5), subsample_edges(train, 0.8, 5));
  EXPECT_NE(subsample_edges(train, 0.8, 5), subsample_edges(train, 0.8, 6));
  std::vector<EdgeRef> ten(train.begin(), train.begin() + 10);
  EXPECT_EQ(subsample_edges(ten, 0.7, 3).size(), 7u);
  EXPECT_THROW(subsample_edges(train, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(subsample_edges(train, 1.5, 1), std::invalid_argument);
  auto kept = subsample_edges(train, 0.6, 2);
  for (const auto& e : kept) EXPECT_NE(std::find(train.begin(), train.end(), e), train.end());
}

TEST(RobustnessSweep, RetrainsPerRateOnUntouchedTest) {
  auto g = split_graph(30, 100, 8);
  auto split = threshold_and_split(g, 5.0, 2);
  std::vector<std::size_t> seen_edges;
  ModelTrainer trainer = [&](const JobGraph& train) {
    seen_edges.push_back(train.edge_count());
    EmbeddingTable t(train.node_count(), 2);
    for (NodeId i = 0; i < train.node_count(); ++i) t.row(i)[0] = 1.0 + i, t.row(i)[1] = 1.0;
    return std::vector<std::pair<std::string, EmbeddingTable>>{{"fixed", t}};
  };
  std::vector<double> rates{1.0, 0.9, 0.6};
  auto reports = robustness_sweep(g, split, rates, trainer, 3);
  ASSERT_EQ(reports.size(), 3u);
  EXPECT_EQ(seen_edges, (std::vector<std::size_t>{80, 72, 48}));
  EXPECT_EQ(reports[2].rate, 0.6);
  EXPECT_EQ(reports[0].queries, split.test.size());
  // The model ignores the training graph, so every rate scores the same.
  EXPECT_EQ(reports[0].mrr, reports[2].mrr);
}

TEST(Report, Format) {
  EvalReport r;
  r.model = "job2vec";
  r.rate = 0.9;
  r.mrr = 0.25;
  r.mp = {0.5, 0.5, 0.75, 1.0};
  std::ostringstream out;
  write_report(out, std::span<const EvalReport>(&r, 1));
  EXPECT_EQ(out.str(),
            "model\trate\tMRR\tMP@5\tMP@10\tMP@15\tMP@20\n"
            "job2vec\t0.9\t0.250000\t0.500000\t0.500000\t0.750000\t1.000000\n");
}

TEST(SplitFile, RoundTrip) {
  auto g = split_graph(40, 200, 4);
  auto split = threshold_and_split(g, 5.0, 9);
  testing::TempDir dir;
  save_split(dir / "split.tsv", split);
  auto back = load_split(dir / "split.tsv");
  EXPECT_EQ(back.train, split.train);
  EXPECT_EQ(back.valid, split.valid);
  EXPECT_EQ(back.test, split.test);
  EXPECT_EQ(back.cold_start_dropped, split.cold_start_dropped);
  EXPECT_EQ(back.candidates, split.candidates);
  std::istringstream bad("train\t1\n");
  EXPECT_THROW(read_split(bad), std::runtime_error);
  std::istringstream unknown("holdout\t1\t2\n");
  EXPECT_THROW(read_split(unknown), std::runtime_error);
}

}  // namespace
}  // namespace job2vec
