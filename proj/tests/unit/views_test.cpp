#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "job2vec/views.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace job2vec {

std::string view_label(View view) {
  static const char* const names[] = {"topology", "semantic", "balance", "duration"};
  return names[static_cast<int>(view)];
}

void PrintTo(View view, std::ostream* os) { *os << view_label(view); }

namespace {

TEST(TransitionBalance, Values) {
  EXPECT_EQ(transition_balance(3, 3), 1.0);
  EXPECT_NEAR(transition_balance(1, 2), std::exp(-0.5), 1e-12);
  EXPECT_NEAR(transition_balance(10, 10.000001), 1.0, 1e-6);
}

TEST(TransitionBalance, RejectsNonPositive) {
  EXPECT_THROW(transition_balance(0, 2), std::invalid_argument);
  EXPECT_THROW(transition_balance(2, -1), std::invalid_argument);
}

TEST(TransitionBalance, SymmetricAndOneOnlyWhenEqual) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> w(0.01, 50.0);
  for (int i = 0; i < 1000; ++i) {
    double a = w(rng), b = w(rng);
    double tb = transition_balance(a, b);
    EXPECT_EQ(tb, transition_balance(b, a));
    EXPECT_GT(tb, 0.0);
    EXPECT_LT(tb, 1.0);
    EXPECT_EQ(transition_balance(a, a), 1.0);
  }
}

TEST(TransitionDuration, Values) {
  EXPECT_EQ(transition_duration_score(0.0), 1.0);
  EXPECT_NEAR(transition_duration_score(1.0), std::exp(-1.0), 1e-12);
  EXPECT_GT(transition_duration_score(0.5), transition_duration_score(2.0));
  EXPECT_THROW(transition_duration_score(-0.1), std::invalid_argument);
}

TEST(TransitionDuration, RangeAndStrictDecrease) {
  double prev = transition_duration_score(0.0);
  for (double t = 0.01; t < 20.0; t += 0.01) {
    double td = transition_duration_score(t);
    EXPECT_GT(td, 0.0);
    EXPECT_LT(td, 1.0);
    EXPECT_LT(td, prev);
    prev = td;
  }
}

TEST(JointProb, Values) {
  std::vector<double> x{1, 0, 0}, y{0, 1, 0};
  EXPECT_EQ(joint_prob(x, y), 0.5);
  std::vector<double> a{std::log(3.0)}, b{1.0};
  EXPECT_NEAR(joint_prob(a, b), 0.75, 1e-12);
  std::vector<double> p{0.3, -1.2, 2.0}, q{1.1, 0.4, -0.7};
  EXPECT_EQ(joint_prob(p, q), joint_prob(q, p));
  EXPECT_THROW(joint_prob(p, a), std::invalid_argument);
}

TEST(Sigmoid, StableAtExtremes) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_NEAR(sigmoid(2.0) + sigmoid(-2.0), 1.0, 1e-15);
}

ViewEmbeddings zero_embeddings(std::size_t nodes, std::size_t dim) {
  ViewEmbeddings emb;
  for (auto* t : {&emb.e, &emb.e_ctx, &emb.s, &emb.b, &emb.d}) *t = EmbeddingTable(nodes, dim);
  emb.s_word = EmbeddingTable(nodes, dim);
  return emb;
}

TEST(NeighborProb, UniformForZeroEmbeddings) {
  auto emb = zero_embeddings(4, 3);
  std::vector<NodeId> all{0, 1, 2, 3};
  EXPECT_DOUBLE_EQ(neighbor_prob(0, 2, emb, all), 0.25);
}

TEST(NeighborProb, HandComputedSoftmax) {
  auto emb = zero_embeddings(3, 2);
  emb.e.row(0)[0] = 1.0;
  emb.e_ctx.row(0)[0] = 2.0;  // logits {2, 0, 0}
  std::vector<NodeId> cands{0, 1, 2};
  double e2 = std::exp(2.0);
  EXPECT_NEAR(neighbor_prob(0, 0, emb, cands), e2 / (e2 + 2.0), 1e-12);
  EXPECT_NEAR(neighbor_prob(0, 0, emb, cands), 0.78699, 1e-5);
}

TEST(NeighborProb, NormalizesAndRejectsOutsiders) {
  std::mt19937_64 rng(3);
  ViewDims dims{6, 6, 6, 6};
  auto emb = ViewEmbeddings::initialize(10, 4, dims, rng);
  std::uniform_real_distribution<double> v(-3, 3);
  for (auto& x : emb.e.data()) x = v(rng);
  for (auto& x : emb.e_ctx.data()) x = v(rng);
  std::vector<NodeId> cands{1, 3, 4, 7, 9};
  for (NodeId i = 0; i < 10; ++i) {
    double sum = 0.0;
    for (NodeId j : cands) sum += neighbor_prob(i, j, emb, cands);
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  EXPECT_THROW(neighbor_prob(0, 2, emb, cands), std::invalid_argument);
  EXPECT_THROW(neighbor_prob(0, 1, emb, {}), std::invalid_argument);
}

TEST(ViewEmbeddings, InitializeShapesAndRange) {
  Rng rng(9);
  ViewDims dims{4, 5, 6, 7};
  auto emb = ViewEmbeddings::initialize(10, 13, dims, rng);
  EXPECT_EQ(emb.e.rows(), 10u);
  EXPECT_EQ(emb.e_ctx.dim(), 4u);
  EXPECT_EQ(emb.s.dim(), 5u);
  EXPECT_EQ(emb.s_word.rows(), 13u);
  EXPECT_EQ(emb.b.dim(), 6u);
  EXPECT_EQ(emb.d.dim(), 7u);
  EXPECT_TRUE(emb.all_finite());
  for (double x : emb.d.data()) {
    EXPECT_GT(x, -0.5 / 7);
    EXPECT_LT(x, 0.5 / 7);
  }
}

constexpr View kViews[] = {View::topology, View::semantic, View::balance, View::duration};

class ViewStep : public ::testing::TestWithParam<View> {};

TEST_P(ViewStep, ZeroLearningRateLeavesTablesUnchanged) {
  Rng rng(5);
  auto emb = ViewEmbeddings::initialize(6, 6, ViewDims{5, 5, 5, 5}, rng);
  auto before = emb;
  auto s = testing::view_sample_shape(GetParam());
  s.query = 1;
  s.positive = 2;
  s.negatives = {3, 4, 0};
  double loss = testing::view_step(GetParam(), emb, s, 0.0);
  EXPECT_EQ(emb, before);
  EXPECT_NEAR(loss, testing::ns_reference_loss(before, s), 1e-12);
  EXPECT_GT(loss, 0.0);
}

TEST_P(ViewStep, PositiveDotIncreases) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    auto emb = ViewEmbeddings::initialize(6, 6, ViewDims{8, 8, 8, 8}, rng);
    auto s = testing::view_sample_shape(GetParam());
    s.query = 0;
    s.positive = 5;
    s.negatives = {1, 2, 3};
    auto pos_dot = [&] {
      return dot(table_of(emb, s.query_table).row(s.query), table_of(emb, s.context_table).row(s.positive));
    };
    double before = pos_dot();
    testing::view_step(GetParam(), emb, s, 0.1);
    EXPECT_GT(pos_dot(), before);
  }
}

TEST_P(ViewStep, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(100 + static_cast<int>(GetParam()));
  for (int config = 0; config < 150; ++config) {
    auto check = testing::check_view_gradient(GetParam(), rng);
    ASSERT_LT(check.max_error, testing::kGradientTolerance) << "config " << config;
    ASSERT_LT(check.max_step_error, 1e-12) << "config " << config;
    ASSERT_LT(check.loss_error, 1e-12) << "config " << config;
  }
}

TEST_P(ViewStep, TouchesOnlyItsOwnTables) {
  Rng rng(2);
  auto emb = ViewEmbeddings::initialize(6, 6, ViewDims{5, 5, 5, 5}, rng);
  auto before = emb;
  auto s = testing::view_sample_shape(GetParam());
  s.query = 1;
  s.positive = 2;
  s.negatives = {3};
  testing::view_step(GetParam(), emb, s, 0.5);
  for (Table t : {Table::e, Table::e_ctx, Table::s, Table::s_word, Table::b, Table::d}) {
    bool own = t == s.query_table || t == s.context_table;
    EXPECT_EQ(table_of(emb, t) == table_of(before, t), !own);
  }
}

std::string view_name(const ::testing::TestParamInfo<View>& info) { return view_label(info.param); }

INSTANTIATE_TEST_SUITE_P(AllViews, ViewStep, ::testing::ValuesIn(kViews), view_name);

TEST(NsStep, RepeatedNegativeGetsSummedGradient) {
  std::vector<double> u{0.3, -0.2}, v{0.1, 0.4}, n{0.5, 0.5};
  auto u0 = u, n0 = n;
  std::vector<std::span<double>> negs{n, n};
  ns_step(u, v, negs, 1.0, 0.1);
  double c = sigmoid(u0[0] * n0[0] + u0[1] * n0[1]);
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(n[k], n0[k] - 0.1 * 2 * c * u0[k], 1e-15);
}

// A 20-node graph: four levels of five titles, lateral moves both ways inside
// a level, promotions upward.
JobGraph small_graph() {
  JobGraph g;
  for (int level = 0; level < 4; ++level)
    for (int c = 0; c < 5; ++c)
      g.add_node(testing::key("level" + std::to_string(level) + " engineer", "c" + std::to_string(c)));
  auto id = [](int level, int c) { return NodeId(level * 5 + c); };
  for (int level = 0; level < 4; ++level)
    for (int c = 0; c < 5; ++c) {
      g.set_edge(id(level, c), id(level, (c + 1) % 5), {6.0, 0.8, 1});
      g.set_edge(id(level, (c + 1) % 5), id(level, c), {5.0, 1.0, 1});
      if (level < 3) g.set_edge(id(level, c), id(level + 1, c), {3.0, 2.5, 1});
    }
  return g;
}

TEST(TrainViews, ZeroEpochsIsInitialization) {
  auto g = small_graph();
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.dims = {8, 8, 8, 8};
  auto emb = train_views(g, cfg, Schedule::automatic(g, cfg));
  Rng rng(cfg.seed);
  EXPECT_EQ(emb, ViewEmbeddings::initialize(g.node_count(), g.vocabulary_size(), cfg.dims, rng));
}

TEST(TrainViews, LossFallsForEveryView) {
  auto g = small_graph();
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.dims = {16, 16, 16, 16};
  std::vector<EpochLoss> history;
  train_views(g, cfg, Schedule::automatic(g, cfg, 20.0), &history);
  ASSERT_EQ(history.size(), 10u);
  for (std::size_t v = 0; v < kViewCount; ++v) {
    EXPECT_GT(history[0][v].samples, 0u) << "view " << v;
    EXPECT_LT(history[9][v].mean_loss, history[0][v].mean_loss) << "view " << v;
  }
}

TEST(TrainViews, SameSeedIsBitIdentical) {
  auto g = small_graph();
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.dims = {8, 8, 8, 8};
  auto schedule = Schedule::automatic(g, cfg);
  EXPECT_EQ(train_views(g, cfg, schedule), train_views(g, cfg, schedule));
  auto other = cfg;
  other.seed = 2;
  EXPECT_NE(train_views(g, cfg, schedule), train_views(g, other, schedule));
}

TEST(TrainViews, ThreadedModeStaysFinite) {
  auto g = small_graph();
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.threads = 3;
  cfg.dims = {8, 8, 8, 8};
  auto emb = train_views(g, cfg, Schedule::automatic(g, cfg));
  EXPECT_TRUE(emb.all_finite());
}

TEST(TrainViews, ZeroLossWeightFreezesView) {
  auto g = small_graph();
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.dims = {8, 8, 8, 8};
  cfg.loss_weights = {1.0, 0.0, 1.0, 1.0};
  auto emb = train_views(g, cfg, Schedule::automatic(g, cfg));
  Rng rng(cfg.seed);
  auto init = ViewEmbeddings::initialize(g.node_count(), g.vocabulary_size(), cfg.dims, rng);
  EXPECT_EQ(emb.s, init.s);
  EXPECT_EQ(emb.s_word, init.s_word);
  EXPECT_NE(emb.e, init.e);
}

TEST(TrainViews, ViewsTrainIndependently) {
  // Without end-to-end fusion each view owns its tables and its sampler, so a
  // topology-only run reproduces the topology tables of a full run.
  auto g = small_graph();
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.dims = {8, 8, 8, 8};
  auto schedule = Schedule::automatic(g, cfg);
  auto full = train_views(g, cfg, schedule);
  cfg.loss_weights = {1.0, 0.0, 0.0, 0.0};
  auto topology_only = train_views(g, cfg, schedule);
  EXPECT_EQ(full.e, topology_only.e);
  EXPECT_EQ(full.e_ctx, topology_only.e_ctx);
  EXPECT_NE(full.s, topology_only.s);
}

TEST(ViewTrainer, PositiveItemsPerView) {
  auto g = small_graph();
  TrainConfig cfg;
  cfg.dims = {4, 4, 4, 4};
  ViewTrainer trainer(g, cfg, Schedule{});
  auto items = trainer.positive_items();
  // 55 base edges plus their 2-step extensions.
  EXPECT_GT(items[0], g.edge_count());
  EXPECT_EQ(items[1], 40u);  // two words per title
  EXPECT_EQ(items[2], 40u);  // every lateral edge has its reverse
  EXPECT_EQ(items[3], g.edge_count());
}

TEST(Schedule, AutomaticScalesWithPasses) {
  auto g = small_graph();
  TrainConfig cfg;
  auto one = Schedule::automatic(g, cfg, 1.0);
  auto ten = Schedule::automatic(g, cfg, 10.0);
  for (std::size_t v = 0; v < kViewCount; ++v) {
    EXPECT_GE(one.samples[v], g.node_count());
    EXPECT_EQ(ten.samples[v], 10 * one.samples[v]);
  }
}

}  // namespace
}  // namespace job2vec
