#include "retarget/dense_net.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "retarget/error.hpp"
#include "retarget/text_io.hpp"

namespace retarget {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kTanh:
      return "tanh";
    case Activation::kElu:
      return "elu";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::kIdentity;
  if (s == "tanh") return Activation::kTanh;
  if (s == "elu") return Activation::kElu;
  throw ValidationError("unknown activation '" + s + "'");
}

namespace {

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::kIdentity:
      return z;
    case Activation::kTanh:
      return z.array().tanh().matrix();
    case Activation::kElu:
      // Branch-free so the exponential vectorizes.
      return (z.array().min(0.0).exp() - 1.0 + z.array().max(0.0)).matrix();
  }
  return z;
}

// Elementwise derivative of the activation at z.
Eigen::MatrixXd activation_slope(Activation a, const Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::kIdentity:
      return Eigen::MatrixXd::Ones(z.rows(), z.cols());
    case Activation::kTanh:
      return (1.0 - z.array().tanh().square()).matrix();
    case Activation::kElu:
      return z.array().min(0.0).exp().matrix();
  }
  return z;
}

}  // namespace

void DenseNet::layout() {
  if (sizes_.size() < 2) throw ValidationError("DenseNet: need at least input and output sizes");
  if (activations_.size() != sizes_.size() - 1) throw ValidationError("DenseNet: one activation per layer required");
  for (int s : sizes_)
    if (s <= 0) throw ValidationError("DenseNet: layer sizes must be positive");
  weight_offset_.clear();
  bias_offset_.clear();
  Eigen::Index off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weight_offset_.push_back(off);
    off += static_cast<Eigen::Index>(sizes_[l]) * sizes_[l + 1];
    bias_offset_.push_back(off);
    off += sizes_[l + 1];
  }
  if (params_.size() == 0) params_ = Eigen::VectorXd::Zero(off);
  if (params_.size() != off) throw ValidationError("DenseNet: parameter vector has wrong length");
}

DenseNet::DenseNet(std::vector<int> sizes, std::vector<Activation> activations, Rng& rng)
    : sizes_(std::move(sizes)), activations_(std::move(activations)) {
  layout();
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const double limit = std::sqrt(6.0 / (sizes_[l] + sizes_[l + 1]));
    const Eigen::Index n = static_cast<Eigen::Index>(sizes_[l]) * sizes_[l + 1];
    for (Eigen::Index i = 0; i < n; ++i) params_[weight_offset_[l] + i] = rng.uniform(-limit, limit);
  }
}

DenseNet::DenseNet(std::vector<int> sizes, std::vector<Activation> activations, Eigen::VectorXd params)
    : sizes_(std::move(sizes)), activations_(std::move(activations)), params_(std::move(params)) {
  if (params_.size() == 0) throw ValidationError("DenseNet: empty parameter vector");
  layout();
  if (!params_.allFinite()) throw ValidationError("DenseNet: non-finite parameters");
}

Eigen::Map<const Eigen::MatrixXd> DenseNet::weight(std::size_t l) const {
  return {params_.data() + weight_offset_[l], sizes_[l + 1], sizes_[l]};
}

Eigen::Map<const Eigen::VectorXd> DenseNet::bias(std::size_t l) const {
  return {params_.data() + bias_offset_[l], sizes_[l + 1]};
}

Eigen::MatrixXd DenseNet::forward(const Eigen::MatrixXd& input) const {
  if (input.rows() != input_dim())
    throw ValidationError("DenseNet::forward: expected input dim " + std::to_string(input_dim()) + ", got " +
                          std::to_string(input.rows()));
  Eigen::MatrixXd a = input;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    Eigen::MatrixXd z = weight(l) * a;
    z.colwise() += bias(l);
    a = activate(activations_[l], z);
  }
  return a;
}

Eigen::MatrixXd DenseNet::forward(const Eigen::MatrixXd& input, ForwardCache& cache) const {
  if (input.rows() != input_dim())
    throw ValidationError("DenseNet::forward: expected input dim " + std::to_string(input_dim()) + ", got " +
                          std::to_string(input.rows()));
  cache.net = this;
  cache.version = version_;
  cache.inputs.resize(layer_count());
  cache.preactivations.resize(layer_count());
  Eigen::MatrixXd a = input;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    Eigen::MatrixXd z = weight(l) * a;
    z.colwise() += bias(l);
    cache.inputs[l] = std::move(a);
    a = activate(activations_[l], z);
    cache.preactivations[l] = std::move(z);
  }
  return a;
}

BackwardResult net_backward(const DenseNet& net, const ForwardCache& cache, const Eigen::MatrixXd& output_grad) {
  if (cache.net != &net || cache.version != net.version())
    throw ValidationError("net_backward: stale forward cache");
  if (cache.inputs.size() != net.layer_count()) throw ValidationError("net_backward: incomplete forward cache");
  const Eigen::Index batch = cache.inputs.front().cols();
  if (output_grad.rows() != net.output_dim() || output_grad.cols() != batch)
    throw ValidationError("net_backward: output gradient shape mismatch");

  BackwardResult r;
  r.param_grad = Eigen::VectorXd::Zero(net.parameter_count());
  Eigen::MatrixXd g = output_grad;
  Eigen::Index off = net.parameter_count();
  for (std::size_t l = net.layer_count(); l-- > 0;) {
    const int in = net.sizes()[l], out = net.sizes()[l + 1];
    Eigen::MatrixXd dz = g.cwiseProduct(activation_slope(net.activations()[l], cache.preactivations[l]));
    off -= out;
    r.param_grad.segment(off, out) = dz.rowwise().sum();
    off -= static_cast<Eigen::Index>(in) * out;
    Eigen::Map<Eigen::MatrixXd>(r.param_grad.data() + off, out, in).noalias() = dz * cache.inputs[l].transpose();
    g = net.weight(l).transpose() * dz;
  }
  r.input_grad = std::move(g);
  return r;
}

namespace {

constexpr char kNetMagic[8] = {'R', 'T', 'N', 'E', 'T', '\0', '\0', '\0'};
constexpr std::uint32_t kNetVersion = 1;

template <class T>
void put(std::string& out, T v) {
  static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw ValidationError("network checkpoint truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string serialize_net(const DenseNet& net) {
  std::string out(kNetMagic, sizeof kNetMagic);
  put<std::uint32_t>(out, kNetVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.layer_count()));
  for (int s : net.sizes()) put<std::uint32_t>(out, static_cast<std::uint32_t>(s));
  for (auto a : net.activations()) put<std::uint8_t>(out, static_cast<std::uint8_t>(a));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(net.parameter_count()));
  for (Eigen::Index i = 0; i < net.parameter_count(); ++i) put<double>(out, net.params()[i]);
  return out;
}

DenseNet deserialize_net(const std::string& bytes) {
  if (bytes.size() < sizeof kNetMagic || std::memcmp(bytes.data(), kNetMagic, sizeof kNetMagic) != 0)
    throw ValidationError("not a network checkpoint (bad magic)");
  std::size_t pos = sizeof kNetMagic;
  const auto version = take<std::uint32_t>(bytes, pos);
  if (version != kNetVersion) throw ValidationError("unsupported network checkpoint version " + std::to_string(version));
  const auto layers = take<std::uint32_t>(bytes, pos);
  if (layers == 0 || layers > 1024) throw ValidationError("network checkpoint: bad layer count");
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i <= layers; ++i) sizes.push_back(static_cast<int>(take<std::uint32_t>(bytes, pos)));
  std::vector<Activation> acts;
  for (std::uint32_t i = 0; i < layers; ++i) {
    const auto a = take<std::uint8_t>(bytes, pos);
    if (a > 2) throw ValidationError("network checkpoint: unknown activation tag");
    acts.push_back(static_cast<Activation>(a));
  }
  const auto n = take<std::uint64_t>(bytes, pos);
  if (n > (bytes.size() - pos) / sizeof(double)) throw ValidationError("network checkpoint truncated");
  Eigen::VectorXd p(static_cast<Eigen::Index>(n));
  for (std::uint64_t i = 0; i < n; ++i) p[static_cast<Eigen::Index>(i)] = take<double>(bytes, pos);
  if (pos != bytes.size()) throw ValidationError("network checkpoint has trailing bytes");
  return DenseNet(std::move(sizes), std::move(acts), std::move(p));
}

void save_net(const DenseNet& net, const std::filesystem::path& path) { write_text_file(path, serialize_net(net)); }

DenseNet load_net(const std::filesystem::path& path) { return deserialize_net(read_text_file(path)); }

}  // namespace retarget
