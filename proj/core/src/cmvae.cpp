#include "job2vec/cmvae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "job2vec/textio.hpp"

namespace job2vec {

namespace {

constexpr const char* kCheckpointMagic = "job2vec-cmvae";
constexpr int kCheckpointVersion = 1;

AffineLayer glorot(std::size_t out, std::size_t in, Rng& rng) {
  AffineLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))};
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  // Row-major fill keeps the draw order independent of Eigen's storage order.
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
  return layer;
}

AffineLayer zero_layer(std::size_t out, std::size_t in) {
  return {Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)),
          Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))};
}

Eigen::MatrixXd affine(const AffineLayer& layer, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = layer.weight * x;
  out.colwise() += layer.bias;
  return out;
}

Eigen::MatrixXd leaky(const Eigen::MatrixXd& a, double slope) {
  return a.unaryExpr([slope](double v) { return leaky_relu(v, slope); });
}

Eigen::MatrixXd leaky_grad(const Eigen::MatrixXd& a, double slope) {
  return a.unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; });
}

struct Activations {
  Eigen::MatrixXd a1, h1, a2, z, a3, h3, y;
};

Activations forward_all(const FusionNet& net, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.rows()) != net.input_dim())
    throw std::invalid_argument(fmt::format("CMVAE input has dim {}, expected {}", x.rows(),
                                            net.input_dim()));
  Activations act;
  act.a1 = affine(net.layers[0], x);
  act.h1 = leaky(act.a1, net.negative_slope);
  act.a2 = affine(net.layers[1], act.h1);
  act.z = act.a2.array().tanh().matrix();
  act.a3 = affine(net.layers[2], act.z);
  act.h3 = leaky(act.a3, net.negative_slope);
  act.y = affine(net.layers[3], act.h3);
  return act;
}

}  // namespace

double leaky_relu(double x, double negative_slope) { return x > 0.0 ? x : negative_slope * x; }

FusionNet FusionNet::initialize(const FusionConfig& cfg, Rng& rng) {
  FusionNet net;
  net.negative_slope = cfg.negative_slope;
  net.layers[0] = glorot(cfg.hidden_dim, cfg.input_dim, rng);
  net.layers[1] = glorot(cfg.bottleneck_dim, cfg.hidden_dim, rng);
  net.layers[2] = glorot(cfg.hidden_dim, cfg.bottleneck_dim, rng);
  net.layers[3] = glorot(cfg.input_dim, cfg.hidden_dim, rng);
  return net;
}

FusionNet FusionNet::zeros(const FusionConfig& cfg) {
  FusionNet net;
  net.negative_slope = cfg.negative_slope;
  net.layers[0] = zero_layer(cfg.hidden_dim, cfg.input_dim);
  net.layers[1] = zero_layer(cfg.bottleneck_dim, cfg.hidden_dim);
  net.layers[2] = zero_layer(cfg.hidden_dim, cfg.bottleneck_dim);
  net.layers[3] = zero_layer(cfg.input_dim, cfg.hidden_dim);
  return net;
}

bool FusionNet::all_finite() const {
  return std::all_of(layers.begin(), layers.end(), [](const AffineLayer& l) {
    return l.weight.allFinite() && l.bias.allFinite();
  });
}

ForwardResult cmvae_forward(const FusionNet& net, std::span<const double> x) {
  Eigen::Map<const Eigen::VectorXd> input(x.data(), static_cast<Eigen::Index>(x.size()));
  auto act = forward_all(net, Eigen::MatrixXd(input));
  ForwardResult out;
  out.bottleneck = act.z.col(0);
  out.reconstruction = act.y.col(0);
  out.loss = (input - out.reconstruction).squaredNorm();
  return out;
}

Eigen::MatrixXd encode(const FusionNet& net, const Eigen::MatrixXd& inputs) {
  if (static_cast<std::size_t>(inputs.rows()) != net.input_dim())
    throw std::invalid_argument("CMVAE encode: input dimension mismatch");
  Eigen::MatrixXd h1 = leaky(affine(net.layers[0], inputs), net.negative_slope);
  return affine(net.layers[1], h1).array().tanh().matrix();
}

FusionGradients cmvae_backward(const FusionNet& net, const Eigen::MatrixXd& batch) {
  auto act = forward_all(net, batch);
  const double n = static_cast<double>(std::max<Eigen::Index>(batch.cols(), 1));
  FusionGradients g;

  Eigen::MatrixXd diff = act.y - batch;
  g.loss = diff.squaredNorm() / n;
  Eigen::MatrixXd dy = (2.0 / n) * diff;

  g.layers[3] = {dy * act.h3.transpose(), dy.rowwise().sum()};
  Eigen::MatrixXd da3 = (net.layers[3].weight.transpose() * dy).cwiseProduct(
      leaky_grad(act.a3, net.negative_slope));
  g.layers[2] = {da3 * act.z.transpose(), da3.rowwise().sum()};
  Eigen::MatrixXd da2 = (net.layers[2].weight.transpose() * da3)
                            .cwiseProduct((1.0 - act.z.array().square()).matrix());
  g.layers[1] = {da2 * act.h1.transpose(), da2.rowwise().sum()};
  Eigen::MatrixXd da1 = (net.layers[1].weight.transpose() * da2).cwiseProduct(
      leaky_grad(act.a1, net.negative_slope));
  g.layers[0] = {da1 * batch.transpose(), da1.rowwise().sum()};
  g.input = net.layers[0].weight.transpose() * da1 - dy;
  return g;
}

void sgd_update(FusionNet& net, const FusionGradients& grads, double lr) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    net.layers[l].weight -= lr * grads.layers[l].weight;
    net.layers[l].bias -= lr * grads.layers[l].bias;
  }
}

std::vector<double> assemble_input(const ViewEmbeddings& emb, NodeId i) {
  const EmbeddingTable* tables[] = {&emb.e, &emb.s, &emb.b, &emb.d};
  std::vector<double> x;
  for (const auto* t : tables) {
    if (i >= t->rows()) throw std::invalid_argument(fmt::format("node {} has no view row", i));
    auto row = t->row(i);
    x.insert(x.end(), row.begin(), row.end());
  }
  return x;
}

Eigen::MatrixXd assemble_inputs(const ViewEmbeddings& emb) {
  const EmbeddingTable* tables[] = {&emb.e, &emb.s, &emb.b, &emb.d};
  Eigen::Index dim = 0;
  for (const auto* t : tables) dim += static_cast<Eigen::Index>(t->dim());
  const auto nodes = static_cast<Eigen::Index>(emb.e.rows());
  Eigen::MatrixXd x(dim, nodes);
  for (Eigen::Index i = 0; i < nodes; ++i) {
    Eigen::Index offset = 0;
    for (const auto* t : tables) {
      auto row = t->row(static_cast<std::size_t>(i));
      for (std::size_t k = 0; k < row.size(); ++k) x(offset + static_cast<Eigen::Index>(k), i) = row[k];
      offset += static_cast<Eigen::Index>(t->dim());
    }
  }
  return x;
}

namespace {

// Pushes d loss / d X_i back into the four view rows of node i.
void apply_input_gradient(ViewEmbeddings& emb, NodeId i, const Eigen::VectorXd& grad, double lr) {
  EmbeddingTable* tables[] = {&emb.e, &emb.s, &emb.b, &emb.d};
  Eigen::Index offset = 0;
  for (auto* t : tables) {
    auto row = t->row(i);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] -= lr * grad(offset + static_cast<Eigen::Index>(k));
    offset += static_cast<Eigen::Index>(t->dim());
  }
}

EmbeddingTable to_table(const Eigen::MatrixXd& columns) {
  EmbeddingTable table(static_cast<std::size_t>(columns.cols()), static_cast<std::size_t>(columns.rows()));
  for (Eigen::Index i = 0; i < columns.cols(); ++i) {
    auto row = table.row(static_cast<std::size_t>(i));
    for (Eigen::Index k = 0; k < columns.rows(); ++k) row[static_cast<std::size_t>(k)] = columns(k, i);
  }
  return table;
}

}  // namespace

JointResult joint_train(const JobGraph& graph, const JointConfig& cfg) {
  TrainConfig view_cfg = cfg.views;
  view_cfg.epochs = cfg.epochs;
  Schedule schedule = cfg.schedule;
  if (std::all_of(schedule.samples.begin(), schedule.samples.end(), [](auto s) { return s == 0; }))
    schedule = Schedule::automatic(graph, view_cfg, cfg.passes);

  FusionConfig fusion = cfg.fusion;
  fusion.input_dim = view_cfg.dims.total();
  if (fusion.batch_size == 0) throw std::invalid_argument("CMVAE batch size must be >= 1");

  ViewTrainer trainer(graph, view_cfg, schedule);
  Rng rng(view_cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  JointResult result;
  result.net = FusionNet::initialize(fusion, rng);

  const double lr = fusion.learning_rate * cfg.fusion_loss_weight;
  const std::size_t nodes = graph.node_count();
  std::vector<NodeId> order(nodes);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    JointEpochStats stats;
    stats.views = trainer.run_epoch();

    Eigen::MatrixXd snapshot = assemble_inputs(trainer.embeddings());
    std::shuffle(order.begin(), order.end(), rng);
    if (lr > 0.0) {
      for (std::size_t begin = 0; begin < nodes; begin += fusion.batch_size) {
        std::size_t end = std::min(nodes, begin + fusion.batch_size);
        Eigen::MatrixXd batch(snapshot.rows(), static_cast<Eigen::Index>(end - begin));
        for (std::size_t b = begin; b < end; ++b)
          batch.col(static_cast<Eigen::Index>(b - begin)) = snapshot.col(order[b]);
        auto grads = cmvae_backward(result.net, batch);
        sgd_update(result.net, grads, lr);
        if (cfg.end_to_end) {
          for (std::size_t b = begin; b < end; ++b)
            apply_input_gradient(trainer.embeddings(), order[b],
                                 grads.input.col(static_cast<Eigen::Index>(b - begin)), lr);
        }
      }
    }
    if (!result.net.all_finite() || !trainer.embeddings().all_finite())
      throw std::runtime_error(fmt::format("training diverged in epoch {}", epoch + 1));
    if (nodes > 0) {
      auto act = forward_all(result.net, snapshot);
      stats.reconstruction = (act.y - snapshot).squaredNorm() / static_cast<double>(nodes);
    }
    result.history.push_back(stats);
    if (cfg.on_epoch) cfg.on_epoch(epoch + 1, trainer.embeddings(), result.net);
  }

  result.views = std::move(trainer.embeddings());
  result.fused = to_table(encode(result.net, assemble_inputs(result.views)));
  return result;
}

void write_checkpoint(std::ostream& out, const FusionNet& net) {
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "negative_slope " << format_double(net.negative_slope) << '\n';
  out << "layers " << net.layers.size() << '\n';
  for (const auto& layer : net.layers) {
    out << "layer " << layer.weight.rows() << ' ' << layer.weight.cols() << '\n';
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        out << (c > 0 ? " " : "") << format_double(layer.weight(r, c));
      out << '\n';
    }
    out << "bias";
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out << ' ' << format_double(layer.bias(r));
    out << '\n';
  }
}

FusionNet read_checkpoint(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::vector<std::string_view> {
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint truncated");
    ++line_no;
    return split_fields(trim(line), ' ');
  };
  auto fail = [&](const char* what) {
    return std::runtime_error(fmt::format("checkpoint line {}: {}", line_no, what));
  };

  auto header = next();
  if (header.size() != 2 || header[0] != kCheckpointMagic) throw fail("not a CMVAE checkpoint");
  if (parse_int(header[1]) != kCheckpointVersion) throw fail("unsupported checkpoint version");
  FusionNet net;
  auto slope = next();
  if (slope.size() != 2 || slope[0] != "negative_slope" || !parse_double(slope[1]))
    throw fail("expected negative_slope");
  net.negative_slope = *parse_double(slope[1]);
  auto layers = next();
  if (layers.size() != 2 || layers[0] != "layers" ||
      parse_int(layers[1]) != static_cast<long long>(net.layers.size()))
    throw fail("expected 4 layers");

  for (auto& layer : net.layers) {
    auto dims = next();
    long long rows = -1;
    long long cols = -1;
    if (dims.size() == 3 && dims[0] == "layer") {
      rows = parse_int(dims[1]).value_or(-1);
      cols = parse_int(dims[2]).value_or(-1);
    }
    if (rows < 0 || cols < 0) throw fail("expected 'layer rows cols'");
    layer.weight.resize(rows, cols);
    layer.bias.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      auto values = next();
      if (static_cast<long long>(values.size()) != cols) throw fail("weight row has wrong length");
      for (Eigen::Index c = 0; c < cols; ++c) {
        auto v = parse_double(values[static_cast<std::size_t>(c)]);
        if (!v) throw fail("bad weight value");
        layer.weight(r, c) = *v;
      }
    }
    auto bias = next();
    if (bias.empty() || bias[0] != "bias" || static_cast<long long>(bias.size()) != rows + 1)
      throw fail("bias line has wrong length");
    for (Eigen::Index r = 0; r < rows; ++r) {
      auto v = parse_double(bias[static_cast<std::size_t>(r) + 1]);
      if (!v) throw fail("bad bias value");
      layer.bias(r) = *v;
    }
  }
  const auto& l = net.layers;
  if (l[1].weight.cols() != l[0].weight.rows() || l[2].weight.cols() != l[1].weight.rows() ||
      l[3].weight.cols() != l[2].weight.rows() || l[3].weight.rows() != l[0].weight.cols())
    throw std::runtime_error("checkpoint layer shapes are inconsistent");
  return net;
}

void save_checkpoint(const std::filesystem::path& path, const FusionNet& net) {
  write_atomically(path, [&](std::ostream& out) { write_checkpoint(out, net); });
}

FusionNet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace job2vec
