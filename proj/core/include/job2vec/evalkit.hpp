#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "job2vec/embedding.hpp"
#include "job2vec/jobgraph.hpp"

namespace job2vec {

inline constexpr double kDefaultWeightThreshold = 5.0;
inline constexpr std::array<std::size_t, 4> kPrecisionCutoffs{5, 10, 15, 20};
inline constexpr std::array<double, 4> kRobustnessRates{0.9, 0.8, 0.7, 0.6};

struct EvalSplit {
  std::vector<EdgeRef> train;
  std::vector<EdgeRef> valid;
  std::vector<EdgeRef> test;
  // Valid/test edges removed because an endpoint never occurs in train.
  std::vector<EdgeRef> cold_start_dropped;
  // Endpoints of train edges, ascending.
  std::vector<NodeId> candidates;
};

class SplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Keeps base edges with w > threshold, shuffles them with `seed` and cuts
// them 8/1/1 into train/valid/test, then applies the cold-start rule.
EvalSplit threshold_and_split(const JobGraph& graph, double weight_threshold, std::uint64_t seed);

// Candidates by descending cosine similarity to the query, ties by node id.
// The query itself is skipped. A zero query vector scores 0 against all.
std::vector<NodeId> rank_candidates(NodeId query, const EmbeddingTable& vectors,
                                    std::span<const NodeId> candidates);
// 1-based position `target` would take in rank_candidates' output.
std::size_t rank_of(NodeId query, NodeId target, const EmbeddingTable& vectors,
                    std::span<const NodeId> candidates);

double mrr(std::span<const std::size_t> ranks);
double mp_at_k(std::span<const std::size_t> ranks, std::size_t k);

struct EvalReport {
  std::string model;
  double rate = 1.0;
  double mrr = 0.0;
  std::array<double, kPrecisionCutoffs.size()> mp{};
  std::size_t queries = 0;
};

// Ranks of each test target among the candidates ranked against its source.
std::vector<std::size_t> test_ranks(const EmbeddingTable& vectors, const EvalSplit& split);
EvalReport evaluate(std::string model, const EmbeddingTable& vectors, const EvalSplit& split,
                    double rate = 1.0);

// MRR of uniformly random rankings of the split's test queries, estimated by
// Monte-Carlo simulation.
struct RandomBaseline {
  double mean = 0.0;
  double stddev = 0.0;
};
RandomBaseline random_ranking_baseline(const EvalSplit& split, std::size_t trials,
                                       std::uint64_t seed);

// The first floor(rate * |train|) edges of a seeded shuffle of `train`.
std::vector<EdgeRef> subsample_edges(std::span<const EdgeRef> train, double rate,
                                     std::uint64_t seed);

// Trains on the given training graph and returns one vector table per model.
using ModelTrainer =
    std::function<std::vector<std::pair<std::string, EmbeddingTable>>(const JobGraph& train_graph)>;

// For each rate, retrains on a subsample of the split's train edges and
// evaluates every returned model on the untouched test edges.
std::vector<EvalReport> robustness_sweep(const JobGraph& graph, const EvalSplit& split,
                                         std::span<const double> rates, const ModelTrainer& trainer,
                                         std::uint64_t seed);

// `model rate MRR MP@5 MP@10 MP@15 MP@20`, tab separated, with a header row.
void write_report(std::ostream& out, std::span<const EvalReport> reports);

void write_split(std::ostream& out, const EvalSplit& split);
EvalSplit read_split(std::istream& in);
void save_split(const std::filesystem::path& path, const EvalSplit& split);
EvalSplit load_split(const std::filesystem::path& path);

}  // namespace job2vec
