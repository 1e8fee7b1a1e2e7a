#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "retarget/rng.hpp"

namespace retarget {

enum class Activation : std::uint8_t { kIdentity = 0, kTanh = 1, kElu = 2 };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct ForwardCache;

/// Fully connected network over column batches (one sample per column).
///
/// All weights and biases live in one flat vector: for each layer the weight
/// matrix (out x in, column-major) followed by the bias. Gradients use the
/// same layout, so optimizers work on flat vectors.
class DenseNet {
 public:
  DenseNet() = default;
  // Glorot-uniform weights, zero biases.
  DenseNet(std::vector<int> sizes, std::vector<Activation> activations, Rng& rng);
  DenseNet(std::vector<int> sizes, std::vector<Activation> activations, Eigen::VectorXd params);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  std::size_t layer_count() const { return activations_.size(); }
  const std::vector<int>& sizes() const { return sizes_; }
  const std::vector<Activation>& activations() const { return activations_; }

  Eigen::Map<const Eigen::MatrixXd> weight(std::size_t layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;

  const Eigen::VectorXd& params() const { return params_; }
  // Any mutable access invalidates outstanding forward caches.
  Eigen::VectorXd& mutable_params() {
    ++version_;
    return params_;
  }
  Eigen::Index parameter_count() const { return params_.size(); }
  std::uint64_t version() const { return version_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, ForwardCache& cache) const;

 private:
  void layout();

  std::vector<int> sizes_;
  std::vector<Activation> activations_;
  std::vector<Eigen::Index> weight_offset_, bias_offset_;
  Eigen::VectorXd params_;
  std::uint64_t version_ = 0;
};

struct ForwardCache {
  const DenseNet* net = nullptr;
  std::uint64_t version = 0;
  std::vector<Eigen::MatrixXd> inputs;          // layer inputs
  std::vector<Eigen::MatrixXd> preactivations;  // W x + b
};

struct BackwardResult {
  Eigen::VectorXd param_grad;  // flat, same layout as DenseNet::params()
  Eigen::MatrixXd input_grad;  // d loss / d input, one column per sample
};

// Reverse-mode gradients given d loss / d output. Throws ValidationError if
// the cache came from another network or the parameters changed since.
BackwardResult net_backward(const DenseNet& net, const ForwardCache& cache, const Eigen::MatrixXd& output_grad);

// Binary checkpoint, layout in docs/formats.md.
std::string serialize_net(const DenseNet& net);
DenseNet deserialize_net(const std::string& bytes);
void save_net(const DenseNet& net, const std::filesystem::path& path);
DenseNet load_net(const std::filesystem::path& path);

}  // namespace retarget
