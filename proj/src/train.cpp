#include "posestream/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace posestream {

double batch_gradient(const PoseConvNetd& net, const std::vector<const PoseTensor*>& batch, NetParams<double>& grad,
                      int threads) {
  auto label_of = [](const PoseTensor& t) {
    if (!t.label) throw std::invalid_argument("training tensor " + t.video + " has no label");
    return static_cast<Eigen::Index>(*t.label);
  };

  const auto workers = static_cast<std::size_t>(std::clamp<int>(threads, 1, static_cast<int>(batch.size())));
  if (workers <= 1) {
    ForwardCache<double> cache;
    double loss = 0.0;
    for (const auto* t : batch) loss += net.accumulate_gradient(*t, label_of(*t), cache, grad);
    return loss;
  }

  // Contiguous chunks, reduced in chunk order.
  std::vector<NetParams<double>> partial(workers, NetParams<double>::zeros(net.shape()));
  std::vector<double> losses(workers, 0.0);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          ForwardCache<double> cache;
          const std::size_t lo = w * batch.size() / workers;
          const std::size_t hi = (w + 1) * batch.size() / workers;
          for (std::size_t i = lo; i < hi; ++i) {
            losses[w] += net.accumulate_gradient(*batch[i], label_of(*batch[i]), cache, partial[w]);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  double loss = 0.0;
  for (std::size_t w = 0; w < workers; ++w) {
    if (errors[w]) std::rethrow_exception(errors[w]);
    grad += partial[w];
    loss += losses[w];
  }
  return loss;
}

double accuracy(const PoseConvNetd& net, const std::vector<PoseTensor>& tensors) {
  if (tensors.empty()) return 0.0;
  ForwardCache<double> cache;
  std::size_t correct = 0;
  for (const auto& t : tensors) {
    net.forward(t, cache);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < cache.probs.size(); ++i) {
      if (cache.probs(i) > cache.probs(best)) best = i;
    }
    correct += t.label && best == *t.label;
  }
  return static_cast<double>(correct) / static_cast<double>(tensors.size());
}

TrainResult train(PoseConvNetd net, const TrainingSet& data, const TrainConfig& config) {
  config.validate();
  if (data.size() == 0) throw std::invalid_argument("train: empty data set");
  for (const auto& t : data.tensors) net.check_input(t);

  TrainResult result;
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto grad = NetParams<double>::zeros(net.shape());
  const bool resample = config.resample_each_epoch && static_cast<bool>(data.resample);

  std::vector<PoseTensor> drawn;
  std::vector<const PoseTensor*> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      drawn.clear();
      if (resample) {
        drawn.reserve(stop - start);
        for (std::size_t i = start; i < stop; ++i) drawn.push_back(data.resample(order[i], epoch));
        for (const auto& t : drawn) batch.push_back(&t);
      } else {
        for (std::size_t i = start; i < stop; ++i) batch.push_back(&data.tensors[order[i]]);
      }

      grad.set_zero();
      const double loss = batch_gradient(net, batch, grad, config.threads);
      if (!std::isfinite(loss) || !grad.all_finite()) {
        throw TrainingDiverged(epoch, batch_no,
                               "training diverged (non-finite loss or gradient) at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batch_no));
      }
      loss_sum += loss;
      seen += batch.size();

      const double scale = config.learning_rate / static_cast<double>(batch.size());
      auto& p = net.params();
      if (config.weight_decay > 0.0) {
        const double keep = 1.0 - config.learning_rate * config.weight_decay;
        p.conv1_w *= keep;
        p.conv2_w *= keep;
        p.fc1_w *= keep;
        p.fc2_w *= keep;
      }
      grad *= -scale;
      p += grad;
      ++batch_no;
    }
    result.trace.push_back({epoch, loss_sum / static_cast<double>(seen), accuracy(net, data.tensors)});
  }
  result.net = std::move(net);
  return result;
}

}  // namespace posestream
