#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "job2vec/embedding.hpp"
#include "job2vec/jobgraph.hpp"
#include "job2vec/types.hpp"

namespace job2vec {

// exp(-|w_ij - w_ji| / (w_ij * w_ji)). Both weights must be positive.
double transition_balance(double w_ij, double w_ji);
// exp(-t) for a mean source tenure t in years, t >= 0.
double transition_duration_score(double t_years);

double sigmoid(double x);
// sigmoid(x . y); the dims must agree.
double joint_prob(std::span<const double> x, std::span<const double> y);

struct ViewDims {
  std::size_t topology = 128;
  std::size_t semantic = 128;
  std::size_t balance = 128;
  std::size_t duration = 128;

  std::size_t total() const { return topology + semantic + balance + duration; }
};

// The six learnable tables: topology self/neighbor rows, semantic title and
// word rows, balance rows and duration rows.
struct ViewEmbeddings {
  EmbeddingTable e;
  EmbeddingTable e_ctx;
  EmbeddingTable s;
  EmbeddingTable s_word;
  EmbeddingTable b;
  EmbeddingTable d;

  static ViewEmbeddings initialize(std::size_t nodes, std::size_t words, const ViewDims& dims,
                                   Rng& rng);
  bool all_finite() const;

  friend bool operator==(const ViewEmbeddings&, const ViewEmbeddings&) = default;
};

// Exact softmax probability of j among `candidates` given i's self row.
double neighbor_prob(NodeId i, NodeId j, const ViewEmbeddings& emb,
                     std::span<const NodeId> candidates);

// Negative-sampling loss for one positive pair:
//   -weight * log sigmoid(u . v) - sum_n log sigmoid(-u . v_n)
// where u is the query row, v the positive row and v_n the negative rows.
double ns_loss(std::span<const double> query, std::span<const double> positive,
               std::span<const std::span<double>> negatives, double weight);

// One gradient-descent step on ns_loss with every partial derivative taken at
// the pre-step values, so aliased or repeated rows receive the exact summed
// gradient. Returns the pre-step loss.
double ns_step(std::span<double> query, std::span<double> positive,
               std::span<const std::span<double>> negatives, double weight, double lr);

enum class Table : std::uint8_t { e, e_ctx, s, s_word, b, d };

EmbeddingTable& table_of(ViewEmbeddings& emb, Table t);
const EmbeddingTable& table_of(const ViewEmbeddings& emb, Table t);

// Gradient of one sample's loss, one entry per distinct (table, row) touched.
struct SampleGradient {
  struct Entry {
    Table table;
    std::size_t row;
    std::vector<double> grad;
  };
  double loss = 0.0;
  std::vector<Entry> entries;
};

// Each view's sample: the positive pair, its noise rows, and the weight on the
// positive term. Steps return the sample loss before the update.
double step_topology(ViewEmbeddings& emb, NodeId i, NodeId j, std::span<const NodeId> negatives,
                     double lr, double weight = 1.0);
double step_semantic(ViewEmbeddings& emb, NodeId i, WordId word, std::span<const WordId> negatives,
                     double lr, double weight = 1.0);
double step_balance(ViewEmbeddings& emb, NodeId i, NodeId j, std::span<const NodeId> negatives,
                    double lr, double weight = 1.0);
double step_duration(ViewEmbeddings& emb, NodeId i, NodeId j, std::span<const NodeId> negatives,
                     double lr, double weight = 1.0);

SampleGradient topology_gradient(const ViewEmbeddings& emb, NodeId i, NodeId j,
                                 std::span<const NodeId> negatives, double weight = 1.0);
SampleGradient semantic_gradient(const ViewEmbeddings& emb, NodeId i, WordId word,
                                 std::span<const WordId> negatives, double weight = 1.0);
SampleGradient balance_gradient(const ViewEmbeddings& emb, NodeId i, NodeId j,
                                std::span<const NodeId> negatives, double weight = 1.0);
SampleGradient duration_gradient(const ViewEmbeddings& emb, NodeId i, NodeId j,
                                 std::span<const NodeId> negatives, double weight = 1.0);

enum class View : std::uint8_t { topology = 0, semantic = 1, balance = 2, duration = 3 };
inline constexpr std::size_t kViewCount = 4;

struct TrainConfig {
  double learning_rate = 0.025;
  double min_learning_rate = 0.0001;
  int negatives = 5;
  // Planned number of epochs; the learning rate decays linearly over them.
  int epochs = 10;
  std::uint64_t seed = 1;
  double noise_power = 0.75;
  // 1 is the deterministic mode; more workers apply lock-free racy updates.
  int threads = 1;
  int extension_steps = kDefaultExtensionSteps;
  double extension_discount = kDefaultExtensionDiscount;
  ViewDims dims;
  // Multiplies each view's step size; 0 switches a view off.
  std::array<double, kViewCount> loss_weights{1.0, 1.0, 1.0, 1.0};
};

// Samples drawn per epoch for each view.
struct Schedule {
  std::array<std::size_t, kViewCount> samples{};

  // `passes` samples per positive item of each view (edges, title words,
  // bidirectional pairs, duration edges).
  static Schedule automatic(const JobGraph& graph, const TrainConfig& cfg, double passes = 10.0);
};

struct ViewLoss {
  double mean_loss = 0.0;
  std::size_t samples = 0;
};
using EpochLoss = std::array<ViewLoss, kViewCount>;

// Per-view negative-sampling trainer. Sampling is proportional to the edge
// weight (topology), word count (semantic), transition balance (balance) and
// transition duration score (duration).
class ViewTrainer {
 public:
  ViewTrainer(const JobGraph& graph, TrainConfig cfg, Schedule schedule);
  ~ViewTrainer();
  ViewTrainer(ViewTrainer&&) noexcept;
  ViewTrainer& operator=(ViewTrainer&&) noexcept;

  ViewEmbeddings& embeddings();
  const ViewEmbeddings& embeddings() const;
  const TrainConfig& config() const;
  const Schedule& schedule() const;

  EpochLoss run_epoch();
  int epochs_done() const;

  // Positive items per view, for inspection and schedules.
  std::array<std::size_t, kViewCount> positive_items() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ViewEmbeddings train_views(const JobGraph& graph, const TrainConfig& cfg, const Schedule& schedule,
                           std::vector<EpochLoss>* history = nullptr);

}  // namespace job2vec
