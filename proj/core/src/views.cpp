#include "job2vec/views.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

namespace job2vec {

double transition_balance(double w_ij, double w_ji) {
  if (!(w_ij > 0.0) || !(w_ji > 0.0))
    throw std::invalid_argument("transition balance needs positive weights in both directions");
  return std::exp(-std::abs(w_ij - w_ji) / (w_ij * w_ji));
}

double transition_duration_score(double t_years) {
  if (!(t_years >= 0.0)) throw std::invalid_argument("transition duration must be >= 0");
  return std::exp(-t_years);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double z = std::exp(x);
  return z / (1.0 + z);
}

namespace {

// log(sigmoid(x)) without overflow for large |x|.
double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

}  // namespace

double joint_prob(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("joint_prob: dimension mismatch");
  return sigmoid(dot(x, y));
}

ViewEmbeddings ViewEmbeddings::initialize(std::size_t nodes, std::size_t words,
                                          const ViewDims& dims, Rng& rng) {
  ViewEmbeddings emb;
  emb.e = EmbeddingTable::uniform(nodes, dims.topology, rng);
  emb.e_ctx = EmbeddingTable::uniform(nodes, dims.topology, rng);
  emb.s = EmbeddingTable::uniform(nodes, dims.semantic, rng);
  emb.s_word = EmbeddingTable::uniform(words, dims.semantic, rng);
  emb.b = EmbeddingTable::uniform(nodes, dims.balance, rng);
  emb.d = EmbeddingTable::uniform(nodes, dims.duration, rng);
  return emb;
}

bool ViewEmbeddings::all_finite() const {
  return e.all_finite() && e_ctx.all_finite() && s.all_finite() && s_word.all_finite() &&
         b.all_finite() && d.all_finite();
}

double neighbor_prob(NodeId i, NodeId j, const ViewEmbeddings& emb,
                     std::span<const NodeId> candidates) {
  if (std::find(candidates.begin(), candidates.end(), j) == candidates.end())
    throw std::invalid_argument("neighbor_prob: target is not in the candidate set");
  auto self = emb.e.row(i);
  double max_logit = -std::numeric_limits<double>::infinity();
  for (NodeId c : candidates) max_logit = std::max(max_logit, dot(emb.e_ctx.row(c), self));
  double denom = 0.0;
  for (NodeId c : candidates) denom += std::exp(dot(emb.e_ctx.row(c), self) - max_logit);
  return std::exp(dot(emb.e_ctx.row(j), self) - max_logit) / denom;
}

double ns_loss(std::span<const double> query, std::span<const double> positive,
               std::span<const std::span<double>> negatives, double weight) {
  double loss = -weight * log_sigmoid(dot(query, positive));
  for (auto neg : negatives) loss -= log_sigmoid(-dot(query, neg));
  return loss;
}

namespace {

struct Scratch {
  std::vector<double> query0;
  std::vector<double> query_grad;
  std::vector<double> neg_coef;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

}  // namespace

double ns_step(std::span<double> query, std::span<double> positive,
               std::span<const std::span<double>> negatives, double weight, double lr) {
  const std::size_t dim = query.size();
  auto& sc = scratch();
  sc.query0.assign(query.begin(), query.end());
  sc.query_grad.assign(dim, 0.0);
  sc.neg_coef.resize(negatives.size());

  double pos_dot = dot(query, positive);
  double loss = -weight * log_sigmoid(pos_dot);
  // d loss / d(u.v) for the positive and each negative pair.
  const double pos_coef = -weight * (1.0 - sigmoid(pos_dot));
  for (std::size_t n = 0; n < negatives.size(); ++n) {
    double neg_dot = dot(query, negatives[n]);
    loss -= log_sigmoid(-neg_dot);
    sc.neg_coef[n] = sigmoid(neg_dot);
  }

  for (std::size_t k = 0; k < dim; ++k) sc.query_grad[k] = pos_coef * positive[k];
  for (std::size_t n = 0; n < negatives.size(); ++n) {
    const double c = sc.neg_coef[n];
    auto neg = negatives[n];
    for (std::size_t k = 0; k < dim; ++k) sc.query_grad[k] += c * neg[k];
  }

  if (lr == 0.0) return loss;
  for (std::size_t k = 0; k < dim; ++k) positive[k] -= lr * pos_coef * sc.query0[k];
  for (std::size_t n = 0; n < negatives.size(); ++n) {
    const double c = sc.neg_coef[n];
    auto neg = negatives[n];
    for (std::size_t k = 0; k < dim; ++k) neg[k] -= lr * c * sc.query0[k];
  }
  for (std::size_t k = 0; k < dim; ++k) query[k] -= lr * sc.query_grad[k];
  return loss;
}

EmbeddingTable& table_of(ViewEmbeddings& emb, Table t) {
  switch (t) {
    case Table::e: return emb.e;
    case Table::e_ctx: return emb.e_ctx;
    case Table::s: return emb.s;
    case Table::s_word: return emb.s_word;
    case Table::b: return emb.b;
    case Table::d: return emb.d;
  }
  throw std::logic_error("unknown table");
}

const EmbeddingTable& table_of(const ViewEmbeddings& emb, Table t) {
  return table_of(const_cast<ViewEmbeddings&>(emb), t);
}

namespace {

// Rows of one sample: the query row, the positive row, and the negative rows,
// each located by table and index.
struct SampleRows {
  Table query_table;
  std::size_t query;
  Table context_table;
  std::size_t positive;
  std::vector<std::size_t> negatives;
};

template <typename Id>
SampleRows make_rows(Table q, std::size_t query, Table c, std::size_t positive,
                     std::span<const Id> negatives) {
  return {q, query, c, positive, std::vector<std::size_t>(negatives.begin(), negatives.end())};
}

double apply_step(ViewEmbeddings& emb, const SampleRows& rows, double lr, double weight) {
  auto& ctx = table_of(emb, rows.context_table);
  thread_local std::vector<std::span<double>> neg_rows;
  neg_rows.clear();
  for (auto n : rows.negatives) neg_rows.push_back(ctx.row(n));
  return ns_step(table_of(emb, rows.query_table).row(rows.query), ctx.row(rows.positive), neg_rows,
                 weight, lr);
}

SampleGradient gradient_of(const ViewEmbeddings& emb, const SampleRows& rows, double weight) {
  const auto& qt = table_of(emb, rows.query_table);
  const auto& ct = table_of(emb, rows.context_table);
  auto u = qt.row(rows.query);
  auto v = ct.row(rows.positive);
  const std::size_t dim = u.size();

  std::map<std::pair<Table, std::size_t>, std::vector<double>> acc;
  auto add = [&](Table t, std::size_t r, std::span<const double> x, double c) {
    auto& g = acc[{t, r}];
    g.resize(dim, 0.0);
    for (std::size_t k = 0; k < dim; ++k) g[k] += c * x[k];
  };

  SampleGradient out;
  double pos_dot = dot(u, v);
  out.loss = -weight * log_sigmoid(pos_dot);
  double pos_coef = -weight * (1.0 - sigmoid(pos_dot));
  add(rows.query_table, rows.query, v, pos_coef);
  add(rows.context_table, rows.positive, u, pos_coef);
  for (auto n : rows.negatives) {
    auto vn = ct.row(n);
    double neg_dot = dot(u, vn);
    out.loss -= log_sigmoid(-neg_dot);
    double c = sigmoid(neg_dot);
    add(rows.query_table, rows.query, vn, c);
    add(rows.context_table, n, u, c);
  }
  for (auto& [key, grad] : acc) out.entries.push_back({key.first, key.second, std::move(grad)});
  return out;
}

}  // namespace

double step_topology(ViewEmbeddings& emb, NodeId i, NodeId j, std::span<const NodeId> negatives,
                     double lr, double weight) {
  return apply_step(emb, make_rows(Table::e, i, Table::e_ctx, j, negatives), lr, weight);
}

double step_semantic(ViewEmbeddings& emb, NodeId i, WordId word, std::span<const WordId> negatives,
                     double lr, double weight) {
  return apply_step(emb, make_rows(Table::s, i, Table::s_word, word, negatives), lr, weight);
}

double step_balance(ViewEmbeddings& emb, NodeId i, NodeId j, std::span<const NodeId> negatives,
                    double lr, double weight) {
  return apply_step(emb, make_rows(Table::b, i, Table::b, j, negatives), lr, weight);
}

double step_duration(ViewEmbeddings& emb, NodeId i, NodeId j, std::span<const NodeId> negatives,
                     double lr, double weight) {
  return apply_step(emb, make_rows(Table::d, i, Table::d, j, negatives), lr, weight);
}

SampleGradient topology_gradient(const ViewEmbeddings& emb, NodeId i, NodeId j,
                                 std::span<const NodeId> negatives, double weight) {
  return gradient_of(emb, make_rows(Table::e, i, Table::e_ctx, j, negatives), weight);
}

SampleGradient semantic_gradient(const ViewEmbeddings& emb, NodeId i, WordId word,
                                 std::span<const WordId> negatives, double weight) {
  return gradient_of(emb, make_rows(Table::s, i, Table::s_word, word, negatives), weight);
}

SampleGradient balance_gradient(const ViewEmbeddings& emb, NodeId i, NodeId j,
                                std::span<const NodeId> negatives, double weight) {
  return gradient_of(emb, make_rows(Table::b, i, Table::b, j, negatives), weight);
}

SampleGradient duration_gradient(const ViewEmbeddings& emb, NodeId i, NodeId j,
                                 std::span<const NodeId> negatives, double weight) {
  return gradient_of(emb, make_rows(Table::d, i, Table::d, j, negatives), weight);
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Pair {
  std::uint32_t a;
  std::uint32_t b;
};

// Positive pairs of one view with their sampling distribution and noise.
struct ViewSampler {
  std::vector<Pair> pairs;
  std::discrete_distribution<std::size_t> pick;
  // Empty noise weights mean uniform noise over `noise_size` rows.
  std::discrete_distribution<std::uint32_t> noise;
  bool uniform_noise = false;
  std::uint32_t noise_size = 0;
  // Shared tables must not draw the query row as a negative.
  bool shared_table = false;

  void set_pairs(std::vector<Pair> p, const std::vector<double>& weights) {
    pairs = std::move(p);
    if (!pairs.empty()) pick = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
  }

  std::uint32_t draw_noise(Rng& rng) {
    if (uniform_noise) return std::uniform_int_distribution<std::uint32_t>(0, noise_size - 1)(rng);
    return noise(rng);
  }
};

constexpr int kNoiseRedraws = 8;

}  // namespace

struct ViewTrainer::Impl {
  TrainConfig cfg;
  Schedule schedule;
  ViewEmbeddings emb;
  std::array<ViewSampler, kViewCount> samplers;
  std::array<Rng, kViewCount> rngs;
  std::array<std::size_t, kViewCount> steps_done{};
  int epochs_done = 0;

  Impl(const JobGraph& graph, TrainConfig c, Schedule s) : cfg(c), schedule(s) {
    if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (cfg.negatives < 1) throw std::invalid_argument("negatives_per_positive must be >= 1");
    if (cfg.threads < 1) throw std::invalid_argument("threads must be >= 1");

    Rng init_rng(cfg.seed);
    emb = ViewEmbeddings::initialize(graph.node_count(), graph.vocabulary_size(), cfg.dims, init_rng);
    for (std::size_t v = 0; v < kViewCount; ++v) {
      std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(v + 1)};
      rngs[v].seed(seq);
    }
    build_topology(graph);
    build_semantic(graph);
    build_balance(graph);
    build_duration(graph);
  }

  void build_topology(const JobGraph& graph) {
    auto edges = extend_k_steps(graph, cfg.extension_steps, cfg.extension_discount).merged();
    std::vector<Pair> pairs;
    std::vector<double> weights;
    std::vector<double> in_weight(graph.node_count(), 0.0);
    for (const auto& e : edges) {
      pairs.push_back({e.src, e.dst});
      weights.push_back(e.w);
      in_weight[e.dst] += e.w;
    }
    auto& s = samplers[0];
    s.set_pairs(std::move(pairs), weights);
    for (auto& w : in_weight) w = std::pow(w, cfg.noise_power);
    if (!s.pairs.empty()) s.noise = std::discrete_distribution<std::uint32_t>(in_weight.begin(), in_weight.end());
  }

  void build_semantic(const JobGraph& graph) {
    std::vector<Pair> pairs;
    std::vector<double> weights;
    std::vector<double> word_count(graph.vocabulary_size(), 0.0);
    for (NodeId i = 0; i < graph.node_count(); ++i) {
      std::map<WordId, double> f;
      for (WordId w : graph.title_words(i)) f[w] += 1.0;
      for (auto [w, c] : f) {
        pairs.push_back({i, w});
        weights.push_back(c);
        word_count[w] += c;
      }
    }
    auto& s = samplers[1];
    s.set_pairs(std::move(pairs), weights);
    for (auto& w : word_count) w = std::pow(w, cfg.noise_power);
    if (!s.pairs.empty()) s.noise = std::discrete_distribution<std::uint32_t>(word_count.begin(), word_count.end());
  }

  void build_balance(const JobGraph& graph) {
    std::vector<Pair> pairs;
    std::vector<double> weights;
    for (const auto& [key, stats] : graph.edges()) {
      const auto* reverse = graph.edge(key.second, key.first);
      if (reverse == nullptr) continue;
      pairs.push_back({key.first, key.second});
      weights.push_back(transition_balance(stats.w, reverse->w));
    }
    auto& s = samplers[2];
    s.set_pairs(std::move(pairs), weights);
    s.uniform_noise = true;
    s.shared_table = true;
    s.noise_size = static_cast<std::uint32_t>(graph.node_count());
  }

  void build_duration(const JobGraph& graph) {
    std::vector<Pair> pairs;
    std::vector<double> weights;
    for (const auto& [key, stats] : graph.edges()) {
      if (!stats.t_avg_years) continue;
      pairs.push_back({key.first, key.second});
      weights.push_back(transition_duration_score(*stats.t_avg_years));
    }
    auto& s = samplers[3];
    s.set_pairs(std::move(pairs), weights);
    s.uniform_noise = true;
    s.shared_table = true;
    s.noise_size = static_cast<std::uint32_t>(graph.node_count());
  }

  double learning_rate(std::size_t view, std::size_t step) const {
    double total = static_cast<double>(schedule.samples[view]) * std::max(cfg.epochs, 1);
    double progress = total > 0 ? static_cast<double>(step) / total : 1.0;
    double lr = cfg.learning_rate * (1.0 - progress);
    return std::max(lr, cfg.min_learning_rate) * cfg.loss_weights[view];
  }

  // Runs `count` samples of one view with its own generator.
  ViewLoss run_samples(std::size_t view, std::size_t count, std::size_t first_step, Rng& rng) {
    auto& s = samplers[view];
    ViewLoss out;
    std::vector<std::uint32_t> negs;
    negs.reserve(static_cast<std::size_t>(cfg.negatives));
    double loss_sum = 0.0;
    for (std::size_t t = 0; t < count; ++t) {
      const Pair& p = s.pairs[s.pick(rng)];
      negs.clear();
      for (int n = 0; n < cfg.negatives; ++n) {
        for (int attempt = 0; attempt < kNoiseRedraws; ++attempt) {
          std::uint32_t cand = s.draw_noise(rng);
          if (cand == p.b || (s.shared_table && cand == p.a)) continue;
          negs.push_back(cand);
          break;
        }
      }
      const double lr = learning_rate(view, first_step + t);
      switch (static_cast<View>(view)) {
        case View::topology: loss_sum += step_topology(emb, p.a, p.b, negs, lr); break;
        case View::semantic: loss_sum += step_semantic(emb, p.a, p.b, negs, lr); break;
        case View::balance: loss_sum += step_balance(emb, p.a, p.b, negs, lr); break;
        case View::duration: loss_sum += step_duration(emb, p.a, p.b, negs, lr); break;
      }
    }
    out.samples = count;
    out.mean_loss = count > 0 ? loss_sum / static_cast<double>(count) : 0.0;
    return out;
  }

  ViewLoss run_view(std::size_t view) {
    const std::size_t count = samplers[view].pairs.empty() || cfg.loss_weights[view] == 0.0
                                  ? 0
                                  : schedule.samples[view];
    const std::size_t first = steps_done[view];
    steps_done[view] += count;
    if (count == 0) return {};
    if (cfg.threads == 1) return run_samples(view, count, first, rngs[view]);

    // Throughput mode: workers share the tables without synchronization.
    const auto workers = static_cast<std::size_t>(cfg.threads);
    std::vector<ViewLoss> partial(workers);
    std::vector<Rng> worker_rngs;
    for (std::size_t w = 0; w < workers; ++w) worker_rngs.emplace_back(rngs[view]());
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        std::size_t begin = count * w / workers;
        std::size_t end = count * (w + 1) / workers;
        pool.emplace_back([&, w, begin, end] {
          partial[w] = run_samples(view, end - begin, first + begin, worker_rngs[w]);
        });
      }
    }
    ViewLoss out;
    double sum = 0.0;
    for (const auto& p : partial) {
      sum += p.mean_loss * static_cast<double>(p.samples);
      out.samples += p.samples;
    }
    out.mean_loss = out.samples > 0 ? sum / static_cast<double>(out.samples) : 0.0;
    return out;
  }
};

ViewTrainer::ViewTrainer(const JobGraph& graph, TrainConfig cfg, Schedule schedule)
    : impl_(std::make_unique<Impl>(graph, cfg, schedule)) {}
ViewTrainer::~ViewTrainer() = default;
ViewTrainer::ViewTrainer(ViewTrainer&&) noexcept = default;
ViewTrainer& ViewTrainer::operator=(ViewTrainer&&) noexcept = default;

ViewEmbeddings& ViewTrainer::embeddings() { return impl_->emb; }
const ViewEmbeddings& ViewTrainer::embeddings() const { return impl_->emb; }
const TrainConfig& ViewTrainer::config() const { return impl_->cfg; }
const Schedule& ViewTrainer::schedule() const { return impl_->schedule; }
int ViewTrainer::epochs_done() const { return impl_->epochs_done; }

std::array<std::size_t, kViewCount> ViewTrainer::positive_items() const {
  std::array<std::size_t, kViewCount> out{};
  for (std::size_t v = 0; v < kViewCount; ++v) out[v] = impl_->samplers[v].pairs.size();
  return out;
}

EpochLoss ViewTrainer::run_epoch() {
  EpochLoss out;
  for (std::size_t v = 0; v < kViewCount; ++v) out[v] = impl_->run_view(v);
  ++impl_->epochs_done;
  return out;
}

Schedule Schedule::automatic(const JobGraph& graph, const TrainConfig& cfg, double passes) {
  Schedule s;
  std::size_t topology =
      extend_k_steps(graph, cfg.extension_steps, cfg.extension_discount).merged().size();
  std::size_t semantic = 0;
  for (NodeId i = 0; i < graph.node_count(); ++i) semantic += graph.title_words(i).size();
  std::size_t balance = 0;
  std::size_t duration = 0;
  for (const auto& [key, stats] : graph.edges()) {
    if (graph.edge(key.second, key.first) != nullptr) ++balance;
    if (stats.t_avg_years) ++duration;
  }
  const std::array<std::size_t, kViewCount> items{topology, semantic, balance, duration};
  // Views with few positives still get enough steps to move every node row.
  for (std::size_t v = 0; v < kViewCount; ++v) {
    if (items[v] == 0) continue;
    const auto base = std::max(items[v], graph.node_count());
    s.samples[v] = static_cast<std::size_t>(std::ceil(passes * static_cast<double>(base)));
  }
  return s;
}

ViewEmbeddings train_views(const JobGraph& graph, const TrainConfig& cfg, const Schedule& schedule,
                           std::vector<EpochLoss>* history) {
  ViewTrainer trainer(graph, cfg, schedule);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto loss = trainer.run_epoch();
    if (history) history->push_back(loss);
  }
  return std::move(trainer.embeddings());
}

}  // namespace job2vec
