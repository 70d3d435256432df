#include <numeric>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "job2vec/cmvae.hpp"
#include "job2vec/evalkit.hpp"
#include "job2vec/views.hpp"

namespace job2vec {
namespace {

void BM_NsStep(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  auto table = EmbeddingTable::uniform(8, dim, rng);
  std::vector<std::span<double>> negatives;
  for (std::size_t r = 2; r < 7; ++r) negatives.push_back(table.row(r));
  for (auto _ : state) benchmark::DoNotOptimize(ns_step(table.row(0), table.row(1), negatives, 1.0, 1e-4));
}
BENCHMARK(BM_NsStep)->Arg(32)->Arg(128);

void BM_CmvaeForward(benchmark::State& state) {
  FusionConfig cfg;
  Rng rng(2);
  auto net = FusionNet::initialize(cfg, rng);
  std::vector<double> x(cfg.input_dim);
  std::uniform_real_distribution<double> value(-0.1, 0.1);
  for (double& v : x) v = value(rng);
  for (auto _ : state) benchmark::DoNotOptimize(cmvae_forward(net, x).loss);
}
BENCHMARK(BM_CmvaeForward);

void BM_CmvaeBackward(benchmark::State& state) {
  FusionConfig cfg;
  Rng rng(3);
  auto net = FusionNet::initialize(cfg, rng);
  Eigen::MatrixXd batch = Eigen::MatrixXd::Random(cfg.input_dim, state.range(0)) * 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(cmvae_backward(net, batch).loss);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CmvaeBackward)->Arg(16)->Arg(64);

void BM_RankCandidates(benchmark::State& state) {
  const auto nodes = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  auto table = EmbeddingTable::uniform(nodes, 248, rng);
  std::vector<NodeId> candidates(nodes);
  std::iota(candidates.begin(), candidates.end(), NodeId{0});
  for (auto _ : state) benchmark::DoNotOptimize(rank_candidates(0, table, candidates));
}
BENCHMARK(BM_RankCandidates)->Arg(500)->Arg(5000);

}  // namespace
}  // namespace job2vec

BENCHMARK_MAIN();
