#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rrl/error.hpp"

namespace rrl {

using Vec = Eigen::VectorXd;
using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Tanh MLP with a linear output head. `weights` stores each affine layer as
// its row-major (out x in) matrix followed by its bias; `log_std` is the
// state-independent Gaussian head (empty for value networks).
struct MlpParameters {
  std::vector<int> layer_dims;
  Vec weights;
  Vec log_std;

  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
  int num_layers() const { return static_cast<int>(layer_dims.size()) - 1; }
  bool has_log_std() const { return log_std.size() > 0; }

  static Eigen::Index weight_count(const std::vector<int>& dims) {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += static_cast<Eigen::Index>(dims[l + 1]) * (dims[l] + 1);
    return n;
  }

  // Offset of layer l's weight matrix; its bias follows immediately.
  Eigen::Index layer_offset(int l) const {
    Eigen::Index off = 0;
    for (int k = 0; k < l; ++k) off += static_cast<Eigen::Index>(layer_dims[k + 1]) * (layer_dims[k] + 1);
    return off;
  }

  Eigen::Map<const RowMajorMat> W(int l) const {
    return {weights.data() + layer_offset(l), layer_dims[l + 1], layer_dims[l]};
  }
  Eigen::Map<const Vec> b(int l) const {
    return {weights.data() + layer_offset(l) + static_cast<Eigen::Index>(layer_dims[l + 1]) * layer_dims[l],
            layer_dims[l + 1]};
  }

  Eigen::Index size() const { return weights.size() + log_std.size(); }

  Vec flat() const {
    Vec v(size());
    v << weights, log_std;
    return v;
  }

  void set_flat(const Vec& v) {
    if (v.size() != size()) throw ContractError("set_flat: size mismatch");
    weights = v.head(weights.size());
    log_std = v.tail(log_std.size());
  }

  void validate() const {
    if (layer_dims.size() < 2) throw FormatError("mlp: need at least input and output dims");
    for (int d : layer_dims) {
      if (d <= 0) throw FormatError("mlp: layer dims must be positive");
    }
    if (weights.size() != weight_count(layer_dims)) throw FormatError("mlp: weight count mismatch");
    if (log_std.size() != 0 && log_std.size() != output_dim()) throw FormatError("mlp: log_std size mismatch");
    if (!weights.allFinite() || !log_std.allFinite()) throw FormatError("mlp: non-finite parameter");
  }

  bool operator==(const MlpParameters& o) const {
    return layer_dims == o.layer_dims && weights.size() == o.weights.size() &&
           log_std.size() == o.log_std.size() && weights == o.weights && log_std == o.log_std;
  }
};

// Uniform fan-in initialization; the output layer is additionally scaled by
// `output_scale`. Biases start at zero, log_std at `initial_log_std`.
template <typename Rng>
MlpParameters init_mlp(const std::vector<int>& dims, bool gaussian_head, Rng& rng,
                       double output_scale = 1.0, double initial_log_std = 0.0) {
  MlpParameters p;
  p.layer_dims = dims;
  p.weights = Vec::Zero(MlpParameters::weight_count(dims));
  for (int l = 0; l < p.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l])) *
                         (l + 1 == p.num_layers() ? output_scale : 1.0);
    std::uniform_real_distribution<double> u(-bound, bound);
    const Eigen::Index off = p.layer_offset(l);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(dims[l + 1]) * dims[l]; ++i) p.weights[off + i] = u(rng);
  }
  if (gaussian_head) p.log_std = Vec::Constant(dims.back(), initial_log_std);
  return p;
}

// Per-layer activations; [0] is the input, back() the linear output.
struct ForwardCache {
  std::vector<Vec> activations;
};

inline Vec mlp_forward(const MlpParameters& p, const Vec& x, ForwardCache* cache = nullptr) {
  if (x.size() != p.input_dim()) {
    throw ContractError("mlp_forward: input has " + std::to_string(x.size()) + " elements, expected " +
                        std::to_string(p.input_dim()));
  }
  if (cache != nullptr) {
    cache->activations.clear();
    cache->activations.push_back(x);
  }
  Vec h = x;
  for (int l = 0; l < p.num_layers(); ++l) {
    Vec z = p.W(l) * h + p.b(l);
    h = l + 1 < p.num_layers() ? Vec(z.array().tanh()) : z;
    if (cache != nullptr) cache->activations.push_back(h);
  }
  return h;
}

// Accumulates d(loss)/d(weights) into grad.head(weights.size()) given
// d(loss)/d(output).
inline void mlp_backward(const MlpParameters& p, const ForwardCache& cache, const Vec& grad_out, Vec& grad) {
  Vec g = grad_out;
  for (int l = p.num_layers() - 1; l >= 0; --l) {
    const Vec& in = cache.activations[l];
    const Eigen::Index off = p.layer_offset(l);
    const int rows = p.layer_dims[l + 1];
    const int cols = p.layer_dims[l];
    Eigen::Map<RowMajorMat> gW(grad.data() + off, rows, cols);
    Eigen::Map<Vec> gb(grad.data() + off + static_cast<Eigen::Index>(rows) * cols, rows);
    gW.noalias() += g * in.transpose();
    gb += g;
    if (l > 0) {
      Vec back = p.W(l).transpose() * g;
      g = back.array() * (1.0 - in.array().square());
    }
  }
}

struct GaussianPolicyOutput {
  Vec mean;
  Vec std;
};

inline GaussianPolicyOutput forward(const MlpParameters& p, const Vec& obs, ForwardCache* cache = nullptr) {
  if (!obs.allFinite()) throw ContractError("forward: non-finite observation");
  GaussianPolicyOutput out;
  out.mean = mlp_forward(p, obs, cache);
  out.std = p.has_log_std() ? Vec(p.log_std.array().exp()) : Vec::Ones(out.mean.size());
  return out;
}

inline double log_prob(const GaussianPolicyOutput& out, const Vec& action) {
  if (action.size() != out.mean.size()) throw ContractError("log_prob: dimension mismatch");
  const Eigen::ArrayXd z = (action - out.mean).array() / out.std.array();
  return -0.5 * z.square().sum() - out.std.array().log().sum() -
         0.5 * static_cast<double>(action.size()) * std::log(2.0 * std::numbers::pi);
}

inline double entropy(const GaussianPolicyOutput& out) {
  return out.std.array().log().sum() +
         0.5 * static_cast<double>(out.std.size()) * std::log(2.0 * std::numbers::pi * std::numbers::e);
}

template <typename Rng>
Vec sample_action(const GaussianPolicyOutput& out, Rng& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  Vec a(out.mean.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = out.mean[i] + out.std[i] * unit(rng);
  return a;
}

// Gradient of log_prob(forward(p, obs), action) with respect to p.flat(),
// scaled by `scale` and added into `grad`.
inline void accumulate_log_prob_gradient(const MlpParameters& p, const ForwardCache& cache,
                                         const GaussianPolicyOutput& out, const Vec& action, double scale,
                                         Vec& grad) {
  const Eigen::ArrayXd var = out.std.array().square();
  const Eigen::ArrayXd diff = (action - out.mean).array();
  Vec g_mean = scale * (diff / var).matrix();
  mlp_backward(p, cache, g_mean, grad);
  if (p.has_log_std()) {
    grad.tail(p.log_std.size()) += scale * (diff.square() / var - 1.0).matrix();
  }
}

inline Vec log_prob_gradient(const MlpParameters& p, const Vec& obs, const Vec& action) {
  ForwardCache cache;
  const auto out = forward(p, obs, &cache);
  Vec grad = Vec::Zero(p.size());
  accumulate_log_prob_gradient(p, cache, out, action, 1.0, grad);
  return grad;
}

// Gradient of sum_i weights[i] * output[i] with respect to the MLP weights.
inline Vec output_gradient(const MlpParameters& p, const Vec& obs, const Vec& output_weights) {
  ForwardCache cache;
  mlp_forward(p, obs, &cache);
  Vec grad = Vec::Zero(p.size());
  mlp_backward(p, cache, output_weights, grad);
  return grad;
}

// Weight file layout (little endian):
//   char[4]  magic "RRLW"
//   uint32   format version (1)
//   uint32   number of layer dims K, then K x uint32 dims
//   uint32   1 if a log_std head follows, else 0
//   float64  per affine layer: weight matrix row-major (out x in), then bias
//   float64  log_std (output dim values) when present
//   uint64   FNV-1a hash of every preceding byte
inline constexpr char kWeightMagic[4] = {'R', 'R', 'L', 'W'};
inline constexpr std::uint32_t kWeightFormatVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little, "weight files assume a little-endian host");

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

template <typename T>
void put(std::string& buf, const T& v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& buf, std::size_t limit) : buf_(buf), limit_(limit) {}
  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > limit_) throw FormatError("weight file truncated");
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::string& buf_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_weights(const MlpParameters& p) {
  p.validate();
  std::string buf(kWeightMagic, 4);
  detail::put(buf, kWeightFormatVersion);
  detail::put(buf, static_cast<std::uint32_t>(p.layer_dims.size()));
  for (int d : p.layer_dims) detail::put(buf, static_cast<std::uint32_t>(d));
  detail::put(buf, static_cast<std::uint32_t>(p.has_log_std() ? 1 : 0));
  for (Eigen::Index i = 0; i < p.weights.size(); ++i) detail::put(buf, p.weights[i]);
  for (Eigen::Index i = 0; i < p.log_std.size(); ++i) detail::put(buf, p.log_std[i]);
  detail::put(buf, detail::fnv1a(buf));
  return buf;
}

inline MlpParameters deserialize_weights(const std::string& buf) {
  if (buf.size() < 4 + sizeof(std::uint64_t) || std::memcmp(buf.data(), kWeightMagic, 4) != 0) {
    throw FormatError("not a weight file (bad magic)");
  }
  const std::size_t body = buf.size() - sizeof(std::uint64_t);
  detail::Reader r(buf, body);
  r.get<std::uint32_t>();  // magic
  const auto version = r.get<std::uint32_t>();
  if (version != kWeightFormatVersion) {
    throw FormatError("unsupported weight format version " + std::to_string(version));
  }
  const auto k = r.get<std::uint32_t>();
  if (k < 2 || k > 64) throw FormatError("weight file: implausible layer count");
  MlpParameters p;
  for (std::uint32_t i = 0; i < k; ++i) {
    const auto d = r.get<std::uint32_t>();
    if (d == 0 || d > (1u << 20)) throw FormatError("weight file: implausible layer dim");
    p.layer_dims.push_back(static_cast<int>(d));
  }
  const auto has_log_std = r.get<std::uint32_t>();
  if (has_log_std > 1) throw FormatError("weight file: bad log_std flag");
  const Eigen::Index nw = MlpParameters::weight_count(p.layer_dims);
  const Eigen::Index ns = has_log_std ? p.layer_dims.back() : 0;
  if (r.pos() + static_cast<std::size_t>(nw + ns) * sizeof(double) != body) {
    throw FormatError("weight file: size does not match layer dims (truncated or corrupt)");
  }
  p.weights.resize(nw);
  for (Eigen::Index i = 0; i < nw; ++i) p.weights[i] = r.get<double>();
  p.log_std.resize(ns);
  for (Eigen::Index i = 0; i < ns; ++i) p.log_std[i] = r.get<double>();
  std::uint64_t stored;
  std::memcpy(&stored, buf.data() + body, sizeof(stored));
  if (stored != detail::fnv1a(buf.substr(0, body))) throw FormatError("weight file: checksum mismatch");
  p.validate();
  return p;
}

inline void save_weights(const MlpParameters& p, const std::string& path) {
  const std::string buf = serialize_weights(p);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open '" + path + "' for writing");
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw FormatError("failed writing '" + path + "'");
}

inline MlpParameters load_weights(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open weight file '" + path + "'");
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_weights(buf);
}

}  // namespace rrl
