#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "job2vec/cmvae.hpp"
#include "job2vec/evalkit.hpp"
#include "job2vec/ingest.hpp"
#include "job2vec/jobgraph.hpp"
#include "job2vec/pipeline.hpp"
#include "job2vec/synthgen.hpp"
#include "job2vec/textio.hpp"
#include "job2vec/titlenorm.hpp"

namespace job2vec::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string records;
  std::string truth;
  std::string graph;
  std::string model;
  std::string out;
  std::string query;
  std::size_t top_k = 10;
  std::string snapshot;
  std::size_t min_freq = kDefaultMinWordFrequency;
  double weight_threshold = kDefaultWeightThreshold;
  std::uint64_t split_seed = 1;
  std::vector<double> rates;
  bool deterministic = false;
  JointConfig joint;
  SynthConfig synth;
};

// File names inside a model directory.
constexpr const char* kCheckpointFile = "cmvae.ckpt";
constexpr const char* kSplitFile = "split.tsv";
constexpr const char* kNodesFile = "nodes.tsv";
constexpr const char* kHistoryFile = "history.tsv";
constexpr const char* kFusedFile = "fused.emb";

void log(std::ostream& err, const std::string& message) { err << "job2vec: " << message << '\n'; }

fs::path required_path(const std::string& value, const char* flag, const char* command) {
  if (value.empty()) throw UsageError(fmt::format("{} needs {}", command, flag));
  return value;
}

fs::path existing_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw DataError("missing file: " + path.string());
  return path;
}

// Runs a loader, reporting any failure as a data error about `path`.
template <typename Fn>
auto load(const fs::path& path, Fn&& fn) {
  existing_file(path);
  try {
    return fn(path);
  } catch (const std::runtime_error& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<CareerRecord> read_records(const RunConfig& cfg, const char* command, std::ostream& err) {
  auto path = existing_file(required_path(cfg.records, "--records", command));
  ParseOptions opts;
  if (!cfg.snapshot.empty()) {
    opts.snapshot = YearMonth::parse(cfg.snapshot);
    if (!opts.snapshot) throw UsageError("--snapshot must look like YYYY/MM");
  }
  auto result = read_records_file(path, opts);
  constexpr std::size_t kShown = 10;
  for (std::size_t i = 0; i < std::min(kShown, result.diagnostics.size()); ++i)
    log(err, "skipped " + result.diagnostics[i]);
  if (result.diagnostics.size() > kShown)
    log(err, fmt::format("... {} more skipped lines", result.diagnostics.size() - kShown));
  log(err, fmt::format("read {} records from {} ({} lines skipped)", result.records.size(),
                       path.string(), result.skipped_lines));
  return std::move(result.records);
}

JointConfig joint_config(const RunConfig& cfg) {
  JointConfig joint = cfg.joint;
  if (cfg.deterministic) joint.views.threads = 1;
  return joint;
}

void write_labels(const fs::path& path, const JobGraph& graph) {
  write_atomically(path, [&](std::ostream& out) {
    for (NodeId i = 0; i < graph.node_count(); ++i)
      out << i << '\t' << graph.node(i).title_text() << '\t' << graph.node(i).company << '\n';
  });
}

std::vector<NodeKey> read_labels(const fs::path& path) {
  std::ifstream in(path);
  std::vector<NodeKey> keys;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = split_fields(line, '\t');
    auto id = f.size() == 3 ? parse_int(f[0]) : std::nullopt;
    if (!id || *id != static_cast<long long>(keys.size()))
      throw std::runtime_error(fmt::format("line {}: malformed node line", line_no));
    keys.push_back(NodeKey{split_words(std::string(f[1])), std::string(f[2])});
  }
  return keys;
}

int gen_synth(const RunConfig& cfg, std::ostream& err) {
  auto out_path = required_path(cfg.out, "--out", "gen-synth");
  auto synth = generate(cfg.synth);
  write_atomically(out_path, [&](std::ostream& out) { write_records(out, synth.records); });
  log(err, fmt::format("wrote {} records for {} persons to {}", synth.records.size(),
                       cfg.synth.n_persons, out_path.string()));
  if (!cfg.truth.empty()) {
    write_atomically(cfg.truth, [&](std::ostream& out) { write_ground_truth(out, synth.truth); });
    log(err, fmt::format("wrote {} ground-truth titles to {}", synth.truth.entries().size(), cfg.truth));
  }
  return kOk;
}

int aggregate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto records = read_records(cfg, "aggregate", err);
  auto aggregator = TitleAggregator::from_records(records, cfg.min_freq);
  std::map<std::string, std::string> mapping;
  for (const auto& r : records) mapping.emplace(r.title_raw, join_words(aggregator.aggregate(r.title_raw)));
  auto write = [&](std::ostream& os) {
    for (const auto& [raw, normalized] : mapping) os << raw << '\t' << normalized << '\n';
  };
  if (cfg.out.empty()) {
    write(out);
  } else {
    write_atomically(cfg.out, write);
    log(err, fmt::format("wrote {} title mappings to {}", mapping.size(), cfg.out));
  }
  return kOk;
}

int build(const RunConfig& cfg, std::ostream& err) {
  auto graph_path = required_path(cfg.graph, "--graph", "build-graph");
  auto records = read_records(cfg, "build-graph", err);
  auto graph = graph_from_records(records, cfg.min_freq);
  save_graph(graph, graph_path);
  log(err, fmt::format("{} transitions ({} self-loops dropped): {} nodes, {} edges, {} words -> {}",
                       graph.diagnostics().transitions, graph.diagnostics().self_loops_dropped,
                       graph.node_count(), graph.edge_count(), graph.vocabulary_size(),
                       graph_path.string()));
  return kOk;
}

int train(const RunConfig& cfg, std::ostream& err) {
  auto graph_path = required_path(cfg.graph, "--graph", "train");
  auto model_dir = required_path(cfg.model, "--model", "train");
  auto graph = load(graph_path, [](const fs::path& p) { return load_graph(p); });
  auto split = threshold_and_split(graph, cfg.weight_threshold, cfg.split_seed);
  log(err, fmt::format("split: {} train, {} valid, {} test, {} cold-start dropped, {} candidates",
                       split.train.size(), split.valid.size(), split.test.size(),
                       split.cold_start_dropped.size(), split.candidates.size()));

  auto joint = joint_config(cfg);
  auto result = joint_train(graph.with_edges(split.train), joint);
  for (std::size_t e = 0; e < result.history.size(); ++e) {
    const auto& h = result.history[e];
    log(err, fmt::format("epoch {}/{}: topology {:.4f} semantic {:.4f} balance {:.4f} duration {:.4f} "
                         "reconstruction {:.4f}",
                         e + 1, result.history.size(), h.views[0].mean_loss, h.views[1].mean_loss,
                         h.views[2].mean_loss, h.views[3].mean_loss, h.reconstruction));
  }

  fs::create_directories(model_dir);
  std::vector<std::string> node_keys, word_keys;
  for (NodeId i = 0; i < graph.node_count(); ++i) node_keys.push_back(graph.node(i).label());
  for (WordId w = 0; w < graph.vocabulary_size(); ++w) word_keys.push_back(graph.word(w));
  save_embeddings(model_dir / "e.emb", result.views.e, node_keys);
  save_embeddings(model_dir / "e_ctx.emb", result.views.e_ctx, node_keys);
  save_embeddings(model_dir / "s.emb", result.views.s, node_keys);
  save_embeddings(model_dir / "s_word.emb", result.views.s_word, word_keys);
  save_embeddings(model_dir / "b.emb", result.views.b, node_keys);
  save_embeddings(model_dir / "d.emb", result.views.d, node_keys);
  save_embeddings(model_dir / kFusedFile, result.fused, node_keys);
  save_checkpoint(model_dir / kCheckpointFile, result.net);
  save_split(model_dir / kSplitFile, split);
  write_labels(model_dir / kNodesFile, graph);
  write_atomically(model_dir / kHistoryFile, [&](std::ostream& out) {
    out << "epoch\ttopology\tsemantic\tbalance\tduration\treconstruction\n";
    for (std::size_t e = 0; e < result.history.size(); ++e) {
      const auto& h = result.history[e];
      out << e + 1;
      for (const auto& v : h.views) out << '\t' << format_double(v.mean_loss);
      out << '\t' << format_double(h.reconstruction) << '\n';
    }
  });
  log(err, "wrote model to " + model_dir.string());
  return kOk;
}

int eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto model_dir = required_path(cfg.model, "--model", "eval");
  auto table = [&](const char* name) {
    return load(model_dir / name, [](const fs::path& p) { return load_embeddings(p); });
  };
  auto net = load(model_dir / kCheckpointFile, [](const fs::path& p) { return load_checkpoint(p); });
  auto split = load(model_dir / kSplitFile, [](const fs::path& p) { return load_split(p); });
  ViewEmbeddings views;
  views.e = table("e.emb");
  views.s = table("s.emb");
  views.b = table("b.emb");
  views.d = table("d.emb");
  EmbeddingTable fused;
  try {
    fused = fuse(views, net);
  } catch (const std::invalid_argument& e) {
    throw DataError(fmt::format("{}: {}", (model_dir / kCheckpointFile).string(), e.what()));
  }

  std::vector<EvalReport> reports;
  try {
    reports.push_back(evaluate("job2vec", fused, split));
    reports.push_back(evaluate("topology", views.e, split));
    reports.push_back(evaluate("semantic", views.s, split));
  } catch (const std::invalid_argument& e) {
    throw DataError(fmt::format("model in {} does not fit its split: {}", model_dir.string(), e.what()));
  }
  if (split.test.empty()) log(err, "warning: the test split is empty; scores are zero");

  if (!cfg.rates.empty()) {
    auto graph_path = required_path(cfg.graph, "--graph", "eval --rates");
    auto graph = load(graph_path, [](const fs::path& p) { return load_graph(p); });
    auto joint = joint_config(cfg);
    ModelTrainer trainer = [&](const JobGraph& train_graph) {
      log(err, fmt::format("retraining on {} of {} train edges", train_graph.edge_count(), split.train.size()));
      return model_variants(joint_train(train_graph, joint));
    };
    auto sweep = robustness_sweep(graph, split, cfg.rates, trainer, cfg.split_seed);
    reports.insert(reports.end(), sweep.begin(), sweep.end());
  }

  if (cfg.out.empty()) {
    write_report(out, reports);
  } else {
    write_atomically(cfg.out, [&](std::ostream& os) { write_report(os, reports); });
    log(err, "wrote report to " + cfg.out);
  }
  return kOk;
}

int predict(const RunConfig& cfg, std::ostream& out) {
  auto model_dir = required_path(cfg.model, "--model", "predict");
  if (cfg.query.empty()) throw UsageError("predict needs --query \"title@company\"");
  if (cfg.top_k == 0) throw UsageError("--k must be at least 1");
  auto keys = load(model_dir / kNodesFile, [](const fs::path& p) { return read_labels(p); });
  auto fused = load(model_dir / kFusedFile, [](const fs::path& p) { return load_embeddings(p); });
  if (fused.rows() != keys.size())
    throw DataError(fmt::format("{} and {} disagree on the node count", kFusedFile, kNodesFile));

  auto at = cfg.query.rfind('@');
  if (at == std::string::npos) throw UsageError("--query must look like \"title@company\"");
  NodeKey wanted{tokenize(std::string_view(cfg.query).substr(0, at)),
                 std::string(trim(std::string_view(cfg.query).substr(at + 1)))};
  auto it = std::find(keys.begin(), keys.end(), wanted);
  if (it == keys.end()) throw DataError("unknown job title: " + wanted.label());
  const auto query = static_cast<NodeId>(it - keys.begin());

  std::vector<NodeId> all(keys.size());
  for (NodeId i = 0; i < all.size(); ++i) all[i] = i;
  auto ranked = rank_candidates(query, fused, all);
  if (ranked.size() > cfg.top_k) ranked.resize(cfg.top_k);
  for (NodeId id : ranked)
    out << keys[id].label() << '\t' << fmt::format("{:.6f}", cosine(fused.row(query), fused.row(id))) << '\n';
  return kOk;
}

void add_options(CLI::App& app, RunConfig& cfg) {
  const char* paths = "Paths";
  app.add_option("--records", cfg.records, "Career records TSV (input)")->group(paths);
  app.add_option("--truth", cfg.truth, "Ground-truth TSV written by gen-synth")->group(paths);
  app.add_option("--graph", cfg.graph, "Job-Graph file")->group(paths);
  app.add_option("--model", cfg.model, "Model directory")->group(paths);
  app.add_option("--out", cfg.out, "Output file (records, title map or report)")->group(paths);

  const char* graph = "Graph";
  app.add_option("--snapshot", cfg.snapshot, "Month substituted for 'present' (YYYY/MM)")->group(graph);
  app.add_option("--min-freq", cfg.min_freq, "Minimum corpus frequency of a kept title word")
      ->capture_default_str()->group(graph);
  app.add_option("--extension-steps", cfg.joint.views.extension_steps, "Longest walk added to the topology edges")
      ->capture_default_str()->group(graph);
  app.add_option("--lambda", cfg.joint.views.extension_discount, "Discount per extra walk step")
      ->capture_default_str()->group(graph);

  const char* views = "View training";
  auto& v = cfg.joint.views;
  app.add_option("--epochs", cfg.joint.epochs, "Outer training epochs")->capture_default_str()->group(views);
  app.add_option("--passes", cfg.joint.passes, "Samples per positive item and epoch")
      ->capture_default_str()->group(views);
  app.add_option("--lr", v.learning_rate, "Initial view learning rate")->capture_default_str()->group(views);
  app.add_option("--min-lr", v.min_learning_rate, "Learning rate floor")->capture_default_str()->group(views);
  app.add_option("--negatives", v.negatives, "Negative samples per positive")->capture_default_str()->group(views);
  app.add_option("--noise-power", v.noise_power, "Exponent of the noise distribution")
      ->capture_default_str()->group(views);
  app.add_option("--dim-topology", v.dims.topology)->capture_default_str()->group(views);
  app.add_option("--dim-semantic", v.dims.semantic)->capture_default_str()->group(views);
  app.add_option("--dim-balance", v.dims.balance)->capture_default_str()->group(views);
  app.add_option("--dim-duration", v.dims.duration)->capture_default_str()->group(views);
  app.add_option("--weight-topology", v.loss_weights[0], "Loss weight of the topology view")
      ->capture_default_str()->group(views);
  app.add_option("--weight-semantic", v.loss_weights[1])->capture_default_str()->group(views);
  app.add_option("--weight-balance", v.loss_weights[2])->capture_default_str()->group(views);
  app.add_option("--weight-duration", v.loss_weights[3])->capture_default_str()->group(views);
  app.add_option("--seed", v.seed, "Training seed")->capture_default_str()->group(views);
  app.add_option("--threads", v.threads, "Training workers (more than 1 is not reproducible)")
      ->capture_default_str()->group(views);
  app.add_flag("--deterministic", cfg.deterministic, "Force single-threaded, reproducible training")
      ->group(views);

  const char* fusion = "Fusion";
  auto& f = cfg.joint.fusion;
  app.add_option("--hidden", f.hidden_dim, "CMVAE hidden width")->capture_default_str()->group(fusion);
  app.add_option("--bottleneck", f.bottleneck_dim, "CMVAE bottleneck width")->capture_default_str()->group(fusion);
  app.add_option("--slope", f.negative_slope, "LeakyReLU negative slope")->capture_default_str()->group(fusion);
  app.add_option("--fusion-lr", f.learning_rate, "CMVAE learning rate")->capture_default_str()->group(fusion);
  app.add_option("--batch", f.batch_size, "CMVAE batch size")->capture_default_str()->group(fusion);
  app.add_option("--weight-fusion", cfg.joint.fusion_loss_weight, "Loss weight of the reconstruction")
      ->capture_default_str()->group(fusion);
  app.add_flag("--e2e", cfg.joint.end_to_end, "Back-propagate the reconstruction into the view tables")
      ->group(fusion);

  const char* evaluation = "Evaluation";
  app.add_option("--weight-threshold", cfg.weight_threshold, "Edges need a weight above this to be evaluated")
      ->capture_default_str()->group(evaluation);
  app.add_option("--split-seed", cfg.split_seed, "Seed of the train/valid/test split")
      ->capture_default_str()->group(evaluation);
  app.add_option("--rates", cfg.rates, "Train-edge subsampling rates for the robustness sweep")
      ->delimiter(',')->group(evaluation);
  app.add_option("--query", cfg.query, "Title to match, as \"title@company\"")->group(evaluation);
  app.add_option("--k", cfg.top_k, "Number of matches printed by predict")->capture_default_str()->group(evaluation);

  const char* synthetic = "Synthetic data";
  auto& s = cfg.synth;
  app.add_option("--companies", s.n_companies)->capture_default_str()->group(synthetic);
  app.add_option("--levels", s.n_levels)->capture_default_str()->group(synthetic);
  app.add_option("--functions", s.n_functions)->capture_default_str()->group(synthetic);
  app.add_option("--persons", s.n_persons)->capture_default_str()->group(synthetic);
  app.add_option("--mean-tenure", s.mean_tenure_years, "Mean tenure in years")->capture_default_str()->group(synthetic);
  app.add_option("--lateral-prob", s.lateral_move_prob, "Chance a move keeps the level")
      ->capture_default_str()->group(synthetic);
  app.add_option("--promote-factor", s.promote_tenure_factor, "Tenure multiplier before promotions")
      ->capture_default_str()->group(synthetic);
  app.add_option("--noise-prob", s.noise_word_prob, "Chance a title gets a rare decorator word")
      ->capture_default_str()->group(synthetic);
  app.add_option("--function-switch-prob", s.function_switch_prob)->capture_default_str()->group(synthetic);
  app.add_option("--peer-group-size", s.peer_group_size)->capture_default_str()->group(synthetic);
  app.add_option("--peer-prob", s.peer_move_prob, "Chance a lateral move stays in the peer group")
      ->capture_default_str()->group(synthetic);
  app.add_option("--min-records", s.min_records)->capture_default_str()->group(synthetic);
  app.add_option("--max-records", s.max_records)->capture_default_str()->group(synthetic);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Job-title benchmarking with multi-view job embeddings", "job2vec"};
  app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();
  add_options(app, cfg);

  auto* gen = app.add_subcommand("gen-synth", "Generate synthetic career records (--out, --truth)");
  auto* agg = app.add_subcommand("aggregate", "Print the raw -> aggregated title map (--records, --out)");
  auto* bld = app.add_subcommand("build-graph", "Build the Job-Graph (--records, --graph)");
  auto* trn = app.add_subcommand("train", "Train views and fusion on the train split (--graph, --model)");
  auto* evl = app.add_subcommand("eval", "Score a trained model on its test split (--model, --rates, --graph)");
  auto* prd = app.add_subcommand("predict", "Closest titles to a query (--model, --query, --k)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (cfg.synth.n_persons < 1) throw UsageError("--persons must be at least 1");
    cfg.synth.seed = cfg.joint.views.seed;
    if (gen->parsed()) return gen_synth(cfg, err);
    if (agg->parsed()) return aggregate(cfg, out, err);
    if (bld->parsed()) return build(cfg, err);
    if (trn->parsed()) return train(cfg, err);
    if (evl->parsed()) return eval(cfg, out, err);
    if (prd->parsed()) return predict(cfg, out);
    return kUsage;
  } catch (const UsageError& e) {
    log(err, std::string("error: ") + e.what());
    return kUsage;
  } catch (const std::invalid_argument& e) {
    log(err, std::string("error: ") + e.what());
    return kUsage;
  } catch (const DataError& e) {
    log(err, std::string("error: ") + e.what());
    return kDataError;
  } catch (const IngestError& e) {
    log(err, std::string("error: ") + e.what());
    return kDataError;
  } catch (const SplitError& e) {
    log(err, std::string("error: ") + e.what());
    return kDataError;
  } catch (const std::exception& e) {
    log(err, std::string("internal error: ") + e.what());
    return kInternal;
  }
}

}  // namespace job2vec::cli
