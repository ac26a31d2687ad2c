#include <doctest.h>

#include <cmath>
#include <random>

#include "posestream/convnet.hpp"

using namespace posestream;

namespace {

PoseTensor random_tensor(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  PoseTensor t;
  for (auto& ch : t.channels) {
    ch.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) ch(r, c) = g(rng);
    }
  }
  return t;
}

PoseTensor zero_tensor(Eigen::Index rows, Eigen::Index cols) {
  PoseTensor t;
  for (auto& ch : t.channels) ch = PoseTensor::Channel::Zero(rows, cols);
  return t;
}

NetShape small_shape() {
  NetShape s;
  s.rows = 8;
  s.cols = 7;
  s.classes = 3;
  s.arch = {2, 3, 2, 2, 5};
  return s;
}

// Direct nested-loop evaluation, written independently of the im2col path.
// 3-D maps are indexed [channel][row][col].
using Map = std::vector<std::vector<std::vector<double>>>;

Map conv_relu(const Map& in, const Eigen::MatrixXd& w, const Eigen::VectorXd& b) {
  const std::size_t cin = in.size(), rows = in[0].size() - 2, cols = in[0][0].size() - 1;
  Map out(static_cast<std::size_t>(w.cols()), std::vector<std::vector<double>>(rows, std::vector<double>(cols)));
  for (std::size_t o = 0; o < out.size(); ++o) {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        double acc = b(static_cast<Eigen::Index>(o));
        for (std::size_t dr = 0; dr < 3; ++dr) {
          for (std::size_t dc = 0; dc < 2; ++dc) {
            for (std::size_t ch = 0; ch < cin; ++ch) {
              const auto row = static_cast<Eigen::Index>((dr * 2 + dc) * cin + ch);
              acc += w(row, static_cast<Eigen::Index>(o)) * in[ch][r + dr][c + dc];
            }
          }
        }
        out[o][r][c] = std::max(acc, 0.0);
      }
    }
  }
  return out;
}

Eigen::VectorXd reference_logits(const PoseConvNetd& net, const PoseTensor& t) {
  const auto& p = net.params();
  const auto& s = net.shape();
  Map x(3, std::vector<std::vector<double>>(static_cast<std::size_t>(s.rows),
                                            std::vector<double>(static_cast<std::size_t>(s.cols))));
  for (int ch = 0; ch < 3; ++ch) {
    for (Eigen::Index r = 0; r < s.rows; ++r) {
      for (Eigen::Index c = 0; c < s.cols; ++c) x[ch][r][c] = t.channels[ch](r, c);
    }
  }
  const Map a1 = conv_relu(x, p.conv1_w, p.conv1_b);
  const Map a2 = conv_relu(a1, p.conv2_w, p.conv2_b);
  const auto win = static_cast<std::size_t>(s.arch.pool_window), stride = static_cast<std::size_t>(s.arch.pool_stride);
  const std::size_t pr = (a2[0].size() - win) / stride + 1, pc = (a2[0][0].size() - win) / stride + 1;
  Eigen::VectorXd flat(static_cast<Eigen::Index>(pr * pc * a2.size()));
  for (std::size_t r = 0; r < pr; ++r) {
    for (std::size_t c = 0; c < pc; ++c) {
      for (std::size_t ch = 0; ch < a2.size(); ++ch) {
        double m = -1e300;
        for (std::size_t i = 0; i < win; ++i) {
          for (std::size_t j = 0; j < win; ++j) m = std::max(m, a2[ch][r * stride + i][c * stride + j]);
        }
        flat(static_cast<Eigen::Index>((r * pc + c) * a2.size() + ch)) = m;
      }
    }
  }
  const Eigen::VectorXd hidden = (p.fc1_w * flat + p.fc1_b).cwiseMax(0.0);
  return p.fc2_w * hidden + p.fc2_b;
}

// Central finite differences over every scalar parameter.
double max_gradient_error(const PoseConvNetd& net, const PoseTensor& t, Eigen::Index label, double h) {
  const auto analytic = net.gradient(t, label);
  auto loss_at = [&](const PoseConvNetd& n) {
    auto sv = n.forward(t);
    return -std::log(sv.values(label));
  };
  double worst = 0.0;
  PoseConvNetd probe = net;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> grads;
  analytic.for_each([&](const char* name, const auto& m) { grads.emplace_back(name, Eigen::MatrixXd(m)); });
  std::size_t blob = 0;
  probe.params().for_each([&](const char*, auto& m) {
    const auto& g = grads[blob++].second;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double keep = m(i, j);
        m(i, j) = keep + h;
        const double up = loss_at(probe);
        m(i, j) = keep - h;
        const double down = loss_at(probe);
        m(i, j) = keep;
        const double numeric = (up - down) / (2 * h);
        const double a = g(i, j);
        worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a)));
      }
    }
  });
  return worst;
}

}  // namespace

TEST_CASE("shape arithmetic and validation") {
  NetShape s{15, 58, 4, {}};
  CHECK(s.rows1() == 13);
  CHECK(s.cols1() == 57);
  CHECK(s.rows2() == 11);
  CHECK(s.cols2() == 56);
  CHECK(s.pooled_rows() == 5);
  CHECK(s.pooled_cols() == 28);
  CHECK(s.flat() == 5 * 28 * 64);
  CHECK_NOTHROW(s.validate());
  CHECK_THROWS(NetShape{5, 3, 4, {}}.validate());
  CHECK_THROWS(NetShape{15, 58, 1, {}}.validate());
  CHECK_THROWS(PoseConvNetd::xavier(NetShape{4, 58, 4, {}}, 0));
}

TEST_CASE("xavier init: determinism, bounds, variance") {
  const auto a = PoseConvNetd::xavier(small_shape(), 42);
  const auto b = PoseConvNetd::xavier(small_shape(), 42);
  const auto c = PoseConvNetd::xavier(small_shape(), 43);
  CHECK(a.params().conv1_w == b.params().conv1_w);
  CHECK(a.params().fc2_w == b.params().fc2_w);
  CHECK(a.params().fc1_w != c.params().fc1_w);
  CHECK(a.params().conv1_b.isZero(0));
  CHECK(a.params().fc1_b.isZero(0));

  // fan_in = fan_out = 3 -> a = 1
  NetShape s3 = small_shape();
  s3.arch.hidden = 3;
  s3.classes = 3;
  const auto n3 = PoseConvNetd::xavier(s3, 1);
  CHECK(n3.params().fc2_w.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(n3.params().fc2_w.cwiseAbs().maxCoeff() > 0.5);

  // conv fans include the 3x2 field: a = sqrt(6 / (18 + 12)) for conv1 of width 2
  const double a1 = std::sqrt(6.0 / (6.0 * 3 + 6.0 * 2));
  CHECK(a.params().conv1_w.cwiseAbs().maxCoeff() <= a1);

  // >= 10^4 samples in fc1
  NetShape big{15, 58, 4, {4, 8, 2, 2, 16}};
  const auto nb = PoseConvNetd::xavier(big, 5);
  const auto& w = nb.params().fc1_w;
  REQUIRE(w.size() >= 10000);
  const double bound = std::sqrt(6.0 / static_cast<double>(big.flat() + big.arch.hidden));
  CHECK(w.cwiseAbs().maxCoeff() <= bound);
  const double mean = w.mean();
  const double var = (w.array() - mean).square().sum() / static_cast<double>(w.size());
  CHECK(std::abs(var - bound * bound / 3.0) < 0.1 * bound * bound / 3.0);
}

TEST_CASE("forward: zero input and zero biases give uniform output") {
  const auto net = PoseConvNetd::xavier(small_shape(), 3);
  const auto sv = net.forward(zero_tensor(8, 7));
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(sv.values(i) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(cross_entropy(sv, 1) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("forward: probabilities are a distribution") {
  std::mt19937_64 rng(7);
  const auto net = PoseConvNetd::xavier(small_shape(), 8);
  for (int i = 0; i < 50; ++i) {
    const auto sv = net.forward(random_tensor(rng, 8, 7, 3.0));
    CHECK(std::abs(sv.values.sum() - 1.0) < 1e-6);
    CHECK(sv.values.minCoeff() >= 0.0);
    CHECK(sv.values.maxCoeff() <= 1.0);
  }
}

TEST_CASE("forward matches a direct nested-loop evaluation") {
  std::mt19937_64 rng(9);
  for (auto arch : {Architecture{2, 3, 2, 2, 5}, Architecture{3, 2, 3, 1, 4}, Architecture{1, 1, 1, 1, 2}}) {
    NetShape s{9, 8, 4, arch};
    auto net = PoseConvNetd::xavier(s, rng());
    // non-zero biases so they are exercised too
    net.params().for_each([&](const char*, auto& m) {
      if (m.cols() == 1) m.setRandom();
    });
    for (int i = 0; i < 5; ++i) {
      const auto t = random_tensor(rng, 9, 8);
      ForwardCache<double> cache;
      net.forward(t, cache);
      CHECK((cache.logits - reference_logits(net, t)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("forward: hand-computed toy network") {
  // 5x3 input, one filter per layer, 1x1 pooling, one hidden unit, two classes.
  NetShape s{5, 3, 2, {1, 1, 1, 1, 1}};
  auto p = NetParams<double>::zeros(s);
  for (Eigen::Index k = 0; k < 6; ++k) p.conv1_w(k * 3 + 0, 0) = 1.0;  // sum channel 0 over the 3x2 window
  p.conv2_w.setOnes();
  p.conv2_b(0) = -200.0;
  p.fc1_w(0, 0) = 0.5;
  p.fc1_b(0) = 1.0;
  p.fc2_w << 1.0, -1.0;
  p.fc2_b << 0.0, 2.0;
  const PoseConvNetd net(s, p);

  auto t = zero_tensor(5, 3);
  for (Eigen::Index r = 0; r < 5; ++r) {
    for (Eigen::Index c = 0; c < 3; ++c) t.channels[0](r, c) = 3.0 * r + c;
  }
  t.channels[1].setConstant(100.0);  // ignored by the zero weights

  // conv1 window sums: 18r + 6c + 21 -> 21, 27, 39, 45, 57, 63
  // conv2: 252 - 200 = 52; pool: 52; hidden: 0.5 * 52 + 1 = 27
  // logits: [27, -27 + 2]
  ForwardCache<double> cache;
  net.forward(t, cache);
  CHECK(cache.act1(0, 0) == 21.0);
  CHECK(cache.act1(5, 0) == 63.0);
  CHECK(cache.pooled(0) == 52.0);
  CHECK(cache.hidden(0) == 27.0);
  CHECK(cache.logits(0) == 27.0);
  CHECK(cache.logits(1) == -25.0);
  CHECK(cache.probs(1) == doctest::Approx(1.0 / (1.0 + std::exp(52.0))));
}

TEST_CASE("softmax and loss") {
  const Eigen::Vector3d z(0.3, -1.2, 2.5);
  const auto p = softmax(z);
  const auto q = softmax((z.array() + 1000.0).matrix().eval());
  CHECK((p - q).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(std::abs(p.sum() - 1.0) < 1e-12);

  ScoreVector one{Eigen::Vector4d(0, 1, 0, 0), ScoreVector::Kind::probabilities};
  CHECK(cross_entropy(one, 1) == 0.0);
  ScoreVector uniform{Eigen::Vector4d::Constant(0.25), ScoreVector::Kind::probabilities};
  CHECK(std::abs(cross_entropy(uniform, 2) - std::log(4.0)) < 1e-9);
  ScoreVector tiny{Eigen::Vector2d(1e-20, 1.0), ScoreVector::Kind::probabilities};
  CHECK(cross_entropy(tiny, 0) == doctest::Approx(-std::log(1e-12)));
  CHECK(std::isfinite(cross_entropy(tiny, 0)));
  CHECK_THROWS(cross_entropy(uniform, 4));
  CHECK_THROWS(cross_entropy(uniform, -1));
  ScoreVector logits{Eigen::Vector2d(1, 2), ScoreVector::Kind::logits};
  CHECK_THROWS(cross_entropy(logits, 0));
}

TEST_CASE("gradient matches central finite differences") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 3; ++trial) {
    const auto net = PoseConvNetd::xavier(small_shape(), rng());
    const auto t = random_tensor(rng, 8, 7);
    const double err = max_gradient_error(net, t, trial % 3, 1e-4);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("gradient is linear in duplicated samples") {
  std::mt19937_64 rng(4);
  const auto net = PoseConvNetd::xavier(small_shape(), 1);
  const auto t = random_tensor(rng, 8, 7);
  const auto single = net.gradient(t, 2);
  auto twice = NetParams<double>::zeros(net.shape());
  ForwardCache<double> cache;
  const double l1 = net.accumulate_gradient(t, 2, cache, twice);
  const double l2 = net.accumulate_gradient(t, 2, cache, twice);
  CHECK(l1 == l2);
  auto expected = single;
  expected *= 2.0;
  auto diff = twice;
  expected *= -1.0;
  diff += expected;
  CHECK(diff.squared_norm() < 1e-24 * std::max(1.0, single.squared_norm()));
}

TEST_CASE("gradient vanishes at a saturated optimum") {
  std::mt19937_64 rng(6);
  auto net = PoseConvNetd::xavier(small_shape(), 2);
  net.params().fc2_w.setZero();
  net.params().fc2_b << 0.0, 60.0, 0.0;
  const auto t = random_tensor(rng, 8, 7);
  const auto g = net.gradient(t, 1);
  CHECK(std::sqrt(g.squared_norm()) < 1e-6);
  CHECK(net.forward(t).values(1) > 1.0 - 1e-12);
}

TEST_CASE("input shape mismatch is rejected") {
  const auto net = PoseConvNetd::xavier(small_shape(), 2);
  CHECK_THROWS(net.forward(zero_tensor(8, 6)));
  CHECK_THROWS(net.gradient(zero_tensor(8, 7), 3));
}

TEST_CASE("predict: argmax with lowest-index ties") {
  ScoreVector u{Eigen::Vector4d::Constant(0.25), ScoreVector::Kind::probabilities};
  CHECK(u.argmax() == 0);
  ScoreVector v{Eigen::Vector3d(0.1, 0.7, 0.2), ScoreVector::Kind::probabilities};
  CHECK(v.argmax() == 1);
  ScoreVector w{Eigen::Vector3d(0.1, 0.45, 0.45), ScoreVector::Kind::probabilities};
  CHECK(w.argmax() == 1);

  std::mt19937_64 rng(1);
  const auto net = PoseConvNetd::xavier(small_shape(), 10);
  for (int i = 0; i < 100; ++i) {
    const auto t = random_tensor(rng, 8, 7, 2.0);
    const auto [cls, scores] = predict(net, t);
    const auto probs = net.forward(t).values;
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < probs.size(); ++k) {
      if (probs(k) > probs(best)) best = k;
    }
    CHECK(cls == best);
    CHECK(scores.values == probs);
  }
}

TEST_CASE("float inference path tracks double") {
  std::mt19937_64 rng(3);
  const auto net = PoseConvNetd::xavier(small_shape(), 4);
  const auto netf = net.cast<float>();
  for (int i = 0; i < 10; ++i) {
    const auto t = random_tensor(rng, 8, 7);
    const auto pd = net.forward(t).values;
    const Eigen::VectorXd pf = netf.forward(t).values.cast<double>();
    CHECK((pd - pf).cwiseAbs().maxCoeff() < 1e-4);
  }
}
