#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "posestream/tensorize.hpp"

namespace posestream {

/// Layer widths of the pose network. Input channels are fixed at 3.
struct Architecture {
  Eigen::Index conv1 = 32;
  Eigen::Index conv2 = 64;
  Eigen::Index pool_window = 2;
  Eigen::Index pool_stride = 2;
  Eigen::Index hidden = 256;
};

inline constexpr Eigen::Index kKernelRows = 3;
inline constexpr Eigen::Index kKernelCols = 2;
inline constexpr Eigen::Index kInputChannels = 3;

/// Input geometry plus every derived feature-map size.
struct NetShape {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index classes = 0;
  Architecture arch;

  Eigen::Index rows1() const { return rows - kKernelRows + 1; }
  Eigen::Index cols1() const { return cols - kKernelCols + 1; }
  Eigen::Index rows2() const { return rows1() - kKernelRows + 1; }
  Eigen::Index cols2() const { return cols1() - kKernelCols + 1; }
  Eigen::Index pooled_rows() const { return (rows2() - arch.pool_window) / arch.pool_stride + 1; }
  Eigen::Index pooled_cols() const { return (cols2() - arch.pool_window) / arch.pool_stride + 1; }
  Eigen::Index flat() const { return pooled_rows() * pooled_cols() * arch.conv2; }

  /// Throws when two valid 3x2 convolutions and the pooling window do not fit.
  void validate() const {
    if (classes < 2) throw std::invalid_argument("network needs at least two classes");
    if (arch.conv1 < 1 || arch.conv2 < 1 || arch.hidden < 1) {
      throw std::invalid_argument("layer widths must be positive");
    }
    if (arch.pool_window < 1 || arch.pool_stride < 1) throw std::invalid_argument("bad pooling spec");
    if (rows2() < arch.pool_window || cols2() < arch.pool_window) {
      throw std::invalid_argument("input " + std::to_string(rows) + "x" + std::to_string(cols) +
                                  " is too small for two 3x2 convolutions and " +
                                  std::to_string(arch.pool_window) + "x" + std::to_string(arch.pool_window) +
                                  " pooling");
    }
  }
  bool operator==(const NetShape& o) const {
    return rows == o.rows && cols == o.cols && classes == o.classes && arch.conv1 == o.arch.conv1 &&
           arch.conv2 == o.arch.conv2 && arch.pool_window == o.arch.pool_window &&
           arch.pool_stride == o.arch.pool_stride && arch.hidden == o.arch.hidden;
  }
};

/// Weights and biases. Also used as the gradient container.
///
/// Convolution weights are (6 * in_channels) x out_channels with patch rows
/// ordered (kernel_row, kernel_col, in_channel). Fully connected weights are
/// out x in.
template <typename Scalar>
struct NetParams {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix conv1_w;
  Vector conv1_b;
  Matrix conv2_w;
  Vector conv2_b;
  Matrix fc1_w;
  Vector fc1_b;
  Matrix fc2_w;
  Vector fc2_b;

  static NetParams zeros(const NetShape& s) {
    NetParams p;
    p.conv1_w = Matrix::Zero(kKernelRows * kKernelCols * kInputChannels, s.arch.conv1);
    p.conv1_b = Vector::Zero(s.arch.conv1);
    p.conv2_w = Matrix::Zero(kKernelRows * kKernelCols * s.arch.conv1, s.arch.conv2);
    p.conv2_b = Vector::Zero(s.arch.conv2);
    p.fc1_w = Matrix::Zero(s.arch.hidden, s.flat());
    p.fc1_b = Vector::Zero(s.arch.hidden);
    p.fc2_w = Matrix::Zero(s.classes, s.arch.hidden);
    p.fc2_b = Vector::Zero(s.classes);
    return p;
  }

  /// Visits (name, matrix-or-vector) in checkpoint order.
  template <typename F>
  void for_each(F&& f) {
    f("conv1.weight", conv1_w);
    f("conv1.bias", conv1_b);
    f("conv2.weight", conv2_w);
    f("conv2.bias", conv2_b);
    f("fc1.weight", fc1_w);
    f("fc1.bias", fc1_b);
    f("fc_out.weight", fc2_w);
    f("fc_out.bias", fc2_b);
  }
  template <typename F>
  void for_each(F&& f) const {
    const_cast<NetParams*>(this)->for_each([&](const char* name, auto& m) { f(name, std::as_const(m)); });
  }

  NetParams& operator+=(const NetParams& o) {
    conv1_w += o.conv1_w;
    conv1_b += o.conv1_b;
    conv2_w += o.conv2_w;
    conv2_b += o.conv2_b;
    fc1_w += o.fc1_w;
    fc1_b += o.fc1_b;
    fc2_w += o.fc2_w;
    fc2_b += o.fc2_b;
    return *this;
  }
  NetParams& operator*=(Scalar s) {
    for_each([s](const char*, auto& m) { m *= s; });
    return *this;
  }
  void set_zero() {
    for_each([](const char*, auto& m) { m.setZero(); });
  }
  Scalar squared_norm() const {
    Scalar acc = 0;
    for_each([&](const char*, const auto& m) { acc += m.squaredNorm(); });
    return acc;
  }
  bool all_finite() const {
    bool ok = true;
    for_each([&](const char*, const auto& m) { ok = ok && m.allFinite(); });
    return ok;
  }
  template <typename To>
  NetParams<To> cast() const {
    NetParams<To> p;
    p.conv1_w = conv1_w.template cast<To>();
    p.conv1_b = conv1_b.template cast<To>();
    p.conv2_w = conv2_w.template cast<To>();
    p.conv2_b = conv2_b.template cast<To>();
    p.fc1_w = fc1_w.template cast<To>();
    p.fc1_b = fc1_b.template cast<To>();
    p.fc2_w = fc2_w.template cast<To>();
    p.fc2_b = fc2_b.template cast<To>();
    return p;
  }
};

/// Class scores of one video.
template <typename Scalar>
struct BasicScoreVector {
  enum class Kind { logits, probabilities };
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;
  Kind kind = Kind::probabilities;

  Eigen::Index size() const { return values.size(); }
  /// Lowest index wins ties.
  Eigen::Index argmax() const {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < values.size(); ++i) {
      if (values(i) > values(best)) best = i;
    }
    return best;
  }
};

using ScoreVector = BasicScoreVector<double>;

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  const Scalar shift = logits.maxCoeff();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e = (logits.array() - shift).exp().matrix();
  return e / e.sum();
}

inline constexpr double kProbabilityFloor = 1e-12;

/// Categorical cross-entropy -log(max(p_label, 1e-12)).
template <typename Scalar>
Scalar cross_entropy(const BasicScoreVector<Scalar>& scores, Eigen::Index label) {
  if (scores.kind != BasicScoreVector<Scalar>::Kind::probabilities) {
    throw std::invalid_argument("cross_entropy expects probabilities");
  }
  if (label < 0 || label >= scores.size()) {
    throw std::invalid_argument("label " + std::to_string(label) + " outside [0, " +
                                std::to_string(scores.size()) + ")");
  }
  return -std::log(std::max<Scalar>(scores.values(label), Scalar(kProbabilityFloor)));
}

/// Intermediate activations of one forward pass; reused across calls.
template <typename Scalar>
struct ForwardCache {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix input;     // (rows*cols) x 3
  Matrix patches1;  // (rows1*cols1) x (6*3)
  Matrix act1;      // post-ReLU, (rows1*cols1) x conv1
  Matrix patches2;  // (rows2*cols2) x (6*conv1)
  Matrix act2;      // post-ReLU, (rows2*cols2) x conv2
  Vector pooled;    // flat
  std::vector<Eigen::Index> pool_source;  // flat -> row of act2 feeding it
  Vector hidden;    // post-ReLU
  Vector logits;
  Vector probs;
};

/// Shallow pose network: conv(3x2) -> ReLU -> conv(3x2) -> ReLU -> max-pool
/// -> fc -> ReLU -> fc -> softmax.
template <typename Scalar>
class PoseConvNet {
 public:
  using Matrix = typename NetParams<Scalar>::Matrix;
  using Vector = typename NetParams<Scalar>::Vector;
  using Params = NetParams<Scalar>;

  PoseConvNet() = default;
  PoseConvNet(NetShape shape, Params params) : shape_(shape), params_(std::move(params)) { shape_.validate(); }

  /// Glorot-uniform weights in (-a, a), a = sqrt(6 / (fan_in + fan_out));
  /// zero biases. Convolution fans count the 3x2 receptive field.
  static PoseConvNet xavier(const NetShape& shape, std::uint64_t seed) {
    shape.validate();
    Params p = Params::zeros(shape);
    std::mt19937_64 rng(seed);
    auto fill = [&rng](Matrix& w, double fan_in, double fan_out) {
      const double a = std::sqrt(6.0 / (fan_in + fan_out));
      std::uniform_real_distribution<double> u(-a, a);
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = static_cast<Scalar>(u(rng));
      }
    };
    const double k = kKernelRows * kKernelCols;
    fill(p.conv1_w, k * kInputChannels, k * shape.arch.conv1);
    fill(p.conv2_w, k * shape.arch.conv1, k * shape.arch.conv2);
    fill(p.fc1_w, shape.flat(), shape.arch.hidden);
    fill(p.fc2_w, shape.arch.hidden, shape.classes);
    return PoseConvNet(shape, std::move(p));
  }

  const NetShape& shape() const { return shape_; }
  const Params& params() const { return params_; }
  Params& params() { return params_; }

  template <typename To>
  PoseConvNet<To> cast() const {
    return PoseConvNet<To>(shape_, params_.template cast<To>());
  }

  void check_input(const PoseTensor& tensor) const {
    if (tensor.rows() != shape_.rows || tensor.cols() != shape_.cols) {
      throw std::invalid_argument("tensor " + tensor.video + " is " + std::to_string(tensor.rows()) + "x" +
                                  std::to_string(tensor.cols()) + ", network expects " +
                                  std::to_string(shape_.rows) + "x" + std::to_string(shape_.cols));
    }
  }

  /// Runs the network and leaves every activation in `cache`.
  void forward(const PoseTensor& tensor, ForwardCache<Scalar>& cache) const {
    check_input(tensor);
    const auto& s = shape_;
    cache.input.resize(s.rows * s.cols, kInputChannels);
    for (int ch = 0; ch < kInputChannels; ++ch) {
      for (Eigen::Index r = 0; r < s.rows; ++r) {
        for (Eigen::Index c = 0; c < s.cols; ++c) {
          cache.input(r * s.cols + c, ch) = static_cast<Scalar>(tensor.channels[ch](r, c));
        }
      }
    }

    im2col(cache.input, s.rows, s.cols, cache.patches1);
    cache.act1.noalias() = cache.patches1 * params_.conv1_w;
    cache.act1.rowwise() += params_.conv1_b.transpose();
    cache.act1 = cache.act1.cwiseMax(Scalar(0));

    im2col(cache.act1, s.rows1(), s.cols1(), cache.patches2);
    cache.act2.noalias() = cache.patches2 * params_.conv2_w;
    cache.act2.rowwise() += params_.conv2_b.transpose();
    cache.act2 = cache.act2.cwiseMax(Scalar(0));

    max_pool(cache);

    cache.hidden.noalias() = params_.fc1_w * cache.pooled;
    cache.hidden += params_.fc1_b;
    cache.hidden = cache.hidden.cwiseMax(Scalar(0));

    cache.logits.noalias() = params_.fc2_w * cache.hidden;
    cache.logits += params_.fc2_b;
    cache.probs = softmax(cache.logits);
  }

  BasicScoreVector<Scalar> forward(const PoseTensor& tensor) const {
    ForwardCache<Scalar> cache;
    forward(tensor, cache);
    return {cache.probs, BasicScoreVector<Scalar>::Kind::probabilities};
  }

  /// Adds d(loss)/d(params) for one sample to `grad` and returns the loss.
  /// The gradient is that of -log softmax(logits)[label]; the probability
  /// floor only affects the reported loss value.
  Scalar accumulate_gradient(const PoseTensor& tensor, Eigen::Index label, ForwardCache<Scalar>& cache,
                             Params& grad) const {
    if (label < 0 || label >= shape_.classes) throw std::invalid_argument("label out of range");
    forward(tensor, cache);
    const auto& s = shape_;
    const Scalar loss = -std::log(std::max<Scalar>(cache.probs(label), Scalar(kProbabilityFloor)));

    Vector d_logits = cache.probs;
    d_logits(label) -= Scalar(1);
    grad.fc2_w.noalias() += d_logits * cache.hidden.transpose();
    grad.fc2_b += d_logits;

    Vector d_hidden = params_.fc2_w.transpose() * d_logits;
    d_hidden = (cache.hidden.array() > Scalar(0)).select(d_hidden, Scalar(0));
    grad.fc1_w.noalias() += d_hidden * cache.pooled.transpose();
    grad.fc1_b += d_hidden;

    const Vector d_pooled = params_.fc1_w.transpose() * d_hidden;
    Matrix d_act2 = Matrix::Zero(cache.act2.rows(), cache.act2.cols());
    const Eigen::Index c2 = s.arch.conv2;
    for (Eigen::Index i = 0; i < d_pooled.size(); ++i) {
      d_act2(cache.pool_source[static_cast<std::size_t>(i)], i % c2) += d_pooled(i);
    }
    d_act2 = (cache.act2.array() > Scalar(0)).select(d_act2, Scalar(0));
    grad.conv2_w.noalias() += cache.patches2.transpose() * d_act2;
    grad.conv2_b += d_act2.colwise().sum().transpose();

    const Matrix d_patches2 = d_act2 * params_.conv2_w.transpose();
    Matrix d_act1 = Matrix::Zero(cache.act1.rows(), cache.act1.cols());
    col2im(d_patches2, s.rows1(), s.cols1(), d_act1);
    d_act1 = (cache.act1.array() > Scalar(0)).select(d_act1, Scalar(0));
    grad.conv1_w.noalias() += cache.patches1.transpose() * d_act1;
    grad.conv1_b += d_act1.colwise().sum().transpose();
    return loss;
  }

  Params gradient(const PoseTensor& tensor, Eigen::Index label) const {
    Params grad = Params::zeros(shape_);
    ForwardCache<Scalar> cache;
    accumulate_gradient(tensor, label, cache, grad);
    return grad;
  }

 private:
  // Rows of `map` are spatial positions r*cols + c; columns are channels.
  static void im2col(const Matrix& map, Eigen::Index rows, Eigen::Index cols, Matrix& patches) {
    const Eigen::Index ch = map.cols();
    const Eigen::Index out_rows = rows - kKernelRows + 1;
    const Eigen::Index out_cols = cols - kKernelCols + 1;
    patches.resize(out_rows * out_cols, kKernelRows * kKernelCols * ch);
    for (Eigen::Index dr = 0; dr < kKernelRows; ++dr) {
      for (Eigen::Index dc = 0; dc < kKernelCols; ++dc) {
        const Eigen::Index block = (dr * kKernelCols + dc) * ch;
        for (Eigen::Index r = 0; r < out_rows; ++r) {
          patches.block(r * out_cols, block, out_cols, ch) = map.block((r + dr) * cols + dc, 0, out_cols, ch);
        }
      }
    }
  }

  static void col2im(const Matrix& d_patches, Eigen::Index rows, Eigen::Index cols, Matrix& d_map) {
    const Eigen::Index ch = d_map.cols();
    const Eigen::Index out_rows = rows - kKernelRows + 1;
    const Eigen::Index out_cols = cols - kKernelCols + 1;
    for (Eigen::Index dr = 0; dr < kKernelRows; ++dr) {
      for (Eigen::Index dc = 0; dc < kKernelCols; ++dc) {
        const Eigen::Index block = (dr * kKernelCols + dc) * ch;
        for (Eigen::Index r = 0; r < out_rows; ++r) {
          d_map.block((r + dr) * cols + dc, 0, out_cols, ch) += d_patches.block(r * out_cols, block, out_cols, ch);
        }
      }
    }
  }

  // Flattened index is (pooled_row * pooled_cols + pooled_col) * conv2 + channel.
  // The first maximum in row-major window order wins.
  void max_pool(ForwardCache<Scalar>& cache) const {
    const auto& s = shape_;
    const Eigen::Index pr = s.pooled_rows(), pc = s.pooled_cols(), c2 = s.arch.conv2, w2 = s.cols2();
    cache.pooled.resize(s.flat());
    cache.pool_source.resize(static_cast<std::size_t>(s.flat()));
    for (Eigen::Index r = 0; r < pr; ++r) {
      for (Eigen::Index c = 0; c < pc; ++c) {
        for (Eigen::Index ch = 0; ch < c2; ++ch) {
          Eigen::Index best = (r * s.arch.pool_stride) * w2 + c * s.arch.pool_stride;
          Scalar best_v = cache.act2(best, ch);
          for (Eigen::Index wr = 0; wr < s.arch.pool_window; ++wr) {
            for (Eigen::Index wc = 0; wc < s.arch.pool_window; ++wc) {
              const Eigen::Index src = (r * s.arch.pool_stride + wr) * w2 + c * s.arch.pool_stride + wc;
              if (cache.act2(src, ch) > best_v) {
                best_v = cache.act2(src, ch);
                best = src;
              }
            }
          }
          const Eigen::Index out = (r * pc + c) * c2 + ch;
          cache.pooled(out) = best_v;
          cache.pool_source[static_cast<std::size_t>(out)] = best;
        }
      }
    }
  }

  NetShape shape_;
  Params params_;
};

using PoseConvNetd = PoseConvNet<double>;
using PoseConvNetf = PoseConvNet<float>;

/// Argmax class (lowest index on ties) together with the probabilities.
template <typename Scalar>
std::pair<Eigen::Index, BasicScoreVector<Scalar>> predict(const PoseConvNet<Scalar>& net, const PoseTensor& tensor) {
  auto scores = net.forward(tensor);
  return {scores.argmax(), std::move(scores)};
}

}  // namespace posestream
