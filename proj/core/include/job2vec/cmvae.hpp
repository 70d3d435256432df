#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "job2vec/embedding.hpp"
#include "job2vec/jobgraph.hpp"
#include "job2vec/views.hpp"

namespace job2vec {

struct FusionConfig {
  std::size_t input_dim = 512;
  std::size_t hidden_dim = 512;
  std::size_t bottleneck_dim = 248;
  double negative_slope = 0.7;
  double learning_rate = 0.01;
  std::size_t batch_size = 64;
};

struct AffineLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out

  friend bool operator==(const AffineLayer& a, const AffineLayer& b) {
    return a.weight.rows() == b.weight.rows() && a.weight.cols() == b.weight.cols() &&
           a.weight == b.weight && a.bias == b.bias;
  }
};

// Encoder: affine, LeakyReLU, affine, Tanh.
// Decoder: affine, LeakyReLU, affine.
struct FusionNet {
  std::array<AffineLayer, 4> layers;  // enc1, enc2, dec1, dec2
  double negative_slope = 0.7;

  // Glorot-uniform weights, zero biases.
  static FusionNet initialize(const FusionConfig& cfg, Rng& rng);
  static FusionNet zeros(const FusionConfig& cfg);

  std::size_t input_dim() const { return static_cast<std::size_t>(layers[0].weight.cols()); }
  std::size_t bottleneck_dim() const { return static_cast<std::size_t>(layers[1].weight.rows()); }
  bool all_finite() const;

  friend bool operator==(const FusionNet&, const FusionNet&) = default;
};

double leaky_relu(double x, double negative_slope);

struct ForwardResult {
  Eigen::VectorXd bottleneck;
  Eigen::VectorXd reconstruction;
  double loss = 0.0;  // squared reconstruction error
};

ForwardResult cmvae_forward(const FusionNet& net, std::span<const double> x);

// Bottleneck codes for every column of `inputs` (input_dim x N).
Eigen::MatrixXd encode(const FusionNet& net, const Eigen::MatrixXd& inputs);

struct FusionGradients {
  std::array<AffineLayer, 4> layers;
  Eigen::MatrixXd input;  // d loss / d X, same shape as the batch
  double loss = 0.0;      // mean squared reconstruction error over the batch
};

// Exact gradients of the mean batch loss; each column of `batch` is a sample.
FusionGradients cmvae_backward(const FusionNet& net, const Eigen::MatrixXd& batch);

void sgd_update(FusionNet& net, const FusionGradients& grads, double lr);

// X_i = [e_i; s_i; b_i; d_i].
std::vector<double> assemble_input(const ViewEmbeddings& emb, NodeId i);
Eigen::MatrixXd assemble_inputs(const ViewEmbeddings& emb);

struct JointConfig {
  int epochs = 20;
  TrainConfig views;
  // Per-view samples per epoch; zeros mean Schedule::automatic with `passes`.
  Schedule schedule;
  double passes = 10.0;
  FusionConfig fusion;
  double fusion_loss_weight = 1.0;
  // Let the reconstruction gradient flow back into the view tables.
  bool end_to_end = false;
  // Called after each outer epoch's CMVAE pass (epochs count from 1).
  std::function<void(int epoch, const ViewEmbeddings&, const FusionNet&)> on_epoch;
};

struct JointEpochStats {
  EpochLoss views;
  double reconstruction = 0.0;  // mean loss over the epoch's snapshot after the pass
};

struct JointResult {
  ViewEmbeddings views;
  FusionNet net;
  EmbeddingTable fused;
  std::vector<JointEpochStats> history;
};

// Alternates one sampling pass per view with one CMVAE pass over snapshots of
// every node's X_i, then encodes the final X_i. Throws std::runtime_error if
// any parameter stops being finite.
JointResult joint_train(const JobGraph& graph, const JointConfig& cfg);

void write_checkpoint(std::ostream& out, const FusionNet& net);
FusionNet read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const FusionNet& net);
FusionNet load_checkpoint(const std::filesystem::path& path);

}  // namespace job2vec
