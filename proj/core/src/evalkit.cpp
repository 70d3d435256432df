#include "job2vec/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "job2vec/textio.hpp"

namespace job2vec {

EvalSplit threshold_and_split(const JobGraph& graph, double weight_threshold, std::uint64_t seed) {
  std::vector<EdgeRef> kept;
  for (const auto& [key, stats] : graph.edges())
    if (stats.order == 1 && stats.w > weight_threshold) kept.push_back({key.first, key.second});
  if (kept.size() < 10)
    throw SplitError(fmt::format("only {} edges have weight > {}; at least 10 are needed to split",
                                 kept.size(), format_double(weight_threshold)));

  Rng rng(seed);
  std::shuffle(kept.begin(), kept.end(), rng);
  const std::size_t tenth = kept.size() / 10;
  const std::size_t n_train = kept.size() - 2 * tenth;

  EvalSplit split;
  split.train.assign(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::set<NodeId> seen;
  for (const auto& e : split.train) {
    seen.insert(e.src);
    seen.insert(e.dst);
  }
  split.candidates.assign(seen.begin(), seen.end());

  auto take = [&](std::size_t begin, std::size_t end, std::vector<EdgeRef>& into) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto& e = kept[k];
      if (seen.contains(e.src) && seen.contains(e.dst))
        into.push_back(e);
      else
        split.cold_start_dropped.push_back(e);
    }
  };
  take(n_train, n_train + tenth, split.valid);
  take(n_train + tenth, kept.size(), split.test);
  return split;
}

namespace {

struct Scored {
  double sim;
  NodeId id;
};

bool ranks_before(const Scored& a, const Scored& b) {
  return a.sim > b.sim || (a.sim == b.sim && a.id < b.id);
}

std::vector<double> row_norms(const EmbeddingTable& vectors) {
  std::vector<double> norms(vectors.rows());
  for (std::size_t i = 0; i < vectors.rows(); ++i) norms[i] = norm(vectors.row(i));
  return norms;
}

double similarity(const EmbeddingTable& vectors, const std::vector<double>& norms, NodeId a,
                  NodeId b) {
  if (norms[a] == 0.0 || norms[b] == 0.0) return 0.0;
  return dot(vectors.row(a), vectors.row(b)) / (norms[a] * norms[b]);
}

std::size_t rank_with_norms(NodeId query, NodeId target, const EmbeddingTable& vectors,
                            const std::vector<double>& norms, std::span<const NodeId> candidates) {
  const Scored t{similarity(vectors, norms, query, target), target};
  std::size_t rank = 1;
  for (NodeId c : candidates) {
    if (c == query || c == target) continue;
    if (ranks_before({similarity(vectors, norms, query, c), c}, t)) ++rank;
  }
  return rank;
}

}  // namespace

std::vector<NodeId> rank_candidates(NodeId query, const EmbeddingTable& vectors,
                                    std::span<const NodeId> candidates) {
  if (query >= vectors.rows()) throw std::invalid_argument("query has no vector");
  if (!vectors.all_finite()) throw std::invalid_argument("vector table has non-finite entries");
  auto norms = row_norms(vectors);
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (NodeId c : candidates) {
    if (c == query) continue;
    if (c >= vectors.rows()) throw std::invalid_argument("candidate has no vector");
    scored.push_back({similarity(vectors, norms, query, c), c});
  }
  std::sort(scored.begin(), scored.end(), ranks_before);
  std::vector<NodeId> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(s.id);
  return out;
}

std::size_t rank_of(NodeId query, NodeId target, const EmbeddingTable& vectors,
                    std::span<const NodeId> candidates) {
  return rank_with_norms(query, target, vectors, row_norms(vectors), candidates);
}

double mrr(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw std::invalid_argument("mrr of an empty rank list");
  double sum = 0.0;
  for (auto r : ranks) {
    if (r == 0) throw std::invalid_argument("ranks are 1-based");
    sum += 1.0 / static_cast<double>(r);
  }
  return sum / static_cast<double>(ranks.size());
}

double mp_at_k(std::span<const std::size_t> ranks, std::size_t k) {
  if (ranks.empty()) throw std::invalid_argument("mp_at_k of an empty rank list");
  if (k == 0) throw std::invalid_argument("K must be >= 1");
  auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r <= k; });
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

std::vector<std::size_t> test_ranks(const EmbeddingTable& vectors, const EvalSplit& split) {
  for (NodeId c : split.candidates)
    if (c >= vectors.rows()) throw std::invalid_argument("vector table does not cover candidates");
  if (!vectors.all_finite()) throw std::invalid_argument("vector table has non-finite entries");
  auto norms = row_norms(vectors);
  std::vector<std::size_t> ranks;
  ranks.reserve(split.test.size());
  for (const auto& e : split.test)
    ranks.push_back(rank_with_norms(e.src, e.dst, vectors, norms, split.candidates));
  return ranks;
}

EvalReport evaluate(std::string model, const EmbeddingTable& vectors, const EvalSplit& split,
                    double rate) {
  EvalReport report;
  report.model = std::move(model);
  report.rate = rate;
  auto ranks = test_ranks(vectors, split);
  report.queries = ranks.size();
  if (ranks.empty()) return report;
  report.mrr = mrr(ranks);
  for (std::size_t k = 0; k < kPrecisionCutoffs.size(); ++k)
    report.mp[k] = mp_at_k(ranks, kPrecisionCutoffs[k]);
  return report;
}

RandomBaseline random_ranking_baseline(const EvalSplit& split, std::size_t trials,
                                       std::uint64_t seed) {
  RandomBaseline out;
  if (split.test.empty() || trials == 0) return out;
  // Each query ranks its target among every candidate except itself.
  const std::size_t pool = split.candidates.size() - 1;
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> uniform(1, std::max<std::size_t>(pool, 1));
  std::vector<double> samples;
  samples.reserve(trials);
  std::vector<std::size_t> ranks(split.test.size());
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& r : ranks) r = uniform(rng);
    samples.push_back(mrr(ranks));
  }
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= static_cast<double>(std::max<std::size_t>(samples.size() - 1, 1));
  out.mean = mean;
  out.stddev = std::sqrt(var);
  return out;
}

std::vector<EdgeRef> subsample_edges(std::span<const EdgeRef> train, double rate,
                                     std::uint64_t seed) {
  if (!(rate > 0.0 && rate <= 1.0)) throw std::invalid_argument("subsample rate must lie in (0, 1]");
  std::vector<EdgeRef> edges(train.begin(), train.end());
  if (rate == 1.0) return edges;
  Rng rng(seed);
  std::shuffle(edges.begin(), edges.end(), rng);
  // The epsilon keeps rate * n from landing just below an integer (0.7 * 10).
  auto keep = static_cast<std::size_t>(std::floor(rate * static_cast<double>(edges.size()) + 1e-9));
  edges.resize(keep);
  std::sort(edges.begin(), edges.end());
  return edges;
}

std::vector<EvalReport> robustness_sweep(const JobGraph& graph, const EvalSplit& split,
                                         std::span<const double> rates, const ModelTrainer& trainer,
                                         std::uint64_t seed) {
  std::vector<EvalReport> reports;
  for (double rate : rates) {
    auto edges = subsample_edges(split.train, rate, seed);
    auto models = trainer(graph.with_edges(edges));
    for (auto& [name, vectors] : models) reports.push_back(evaluate(name, vectors, split, rate));
  }
  return reports;
}

void write_report(std::ostream& out, std::span<const EvalReport> reports) {
  out << "model\trate\tMRR";
  for (auto k : kPrecisionCutoffs) out << "\tMP@" << k;
  out << '\n';
  for (const auto& r : reports) {
    out << r.model << '\t' << format_double(r.rate) << '\t' << fmt::format("{:.6f}", r.mrr);
    for (double mp : r.mp) out << '\t' << fmt::format("{:.6f}", mp);
    out << '\n';
  }
}

void write_split(std::ostream& out, const EvalSplit& split) {
  auto section = [&](const char* name, const std::vector<EdgeRef>& edges) {
    for (const auto& e : edges) out << name << '\t' << e.src << '\t' << e.dst << '\n';
  };
  section("train", split.train);
  section("valid", split.valid);
  section("test", split.test);
  section("dropped", split.cold_start_dropped);
}

EvalSplit read_split(std::istream& in) {
  EvalSplit split;
  std::set<NodeId> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = split_fields(trim(line), '\t');
    auto src = f.size() == 3 ? parse_int(f[1]) : std::nullopt;
    auto dst = f.size() == 3 ? parse_int(f[2]) : std::nullopt;
    if (!src || !dst || *src < 0 || *dst < 0)
      throw std::runtime_error(fmt::format("split file line {}: malformed", line_no));
    EdgeRef e{static_cast<NodeId>(*src), static_cast<NodeId>(*dst)};
    if (f[0] == "train") {
      split.train.push_back(e);
      seen.insert(e.src);
      seen.insert(e.dst);
    } else if (f[0] == "valid") {
      split.valid.push_back(e);
    } else if (f[0] == "test") {
      split.test.push_back(e);
    } else if (f[0] == "dropped") {
      split.cold_start_dropped.push_back(e);
    } else {
      throw std::runtime_error(fmt::format("split file line {}: unknown part '{}'", line_no, f[0]));
    }
  }
  split.candidates.assign(seen.begin(), seen.end());
  return split;
}

void save_split(const std::filesystem::path& path, const EvalSplit& split) {
  write_atomically(path, [&](std::ostream& out) { write_split(out, split); });
}

EvalSplit load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open split file " + path.string());
  return read_split(in);
}

}  // namespace job2vec
