#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "posestream/convnet.hpp"

namespace posestream {

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 30;
  int batch_size = 16;
  std::uint64_t seed = 0;
  double weight_decay = 0.0;
  /// Draw fresh snippets every epoch when the data set can resample.
  bool resample_each_epoch = true;
  /// Worker threads for per-batch gradient accumulation. The reduction order
  /// is fixed, so results depend on this value but not on scheduling.
  int threads = 1;

  void validate() const {
    if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  }
};

/// Training samples. `tensors` are the fixed (evaluation-mode) tensors; when
/// `resample` is set it produces a fresh tensor for sample i in a given epoch.
struct TrainingSet {
  std::vector<PoseTensor> tensors;
  std::function<PoseTensor(std::size_t index, int epoch)> resample;

  std::size_t size() const { return tensors.size(); }
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;      // mean mini-batch loss during the epoch
  double accuracy = 0.0;  // accuracy on the fixed tensors after the epoch
};

struct TrainResult {
  PoseConvNetd net;
  std::vector<EpochStats> trace;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, std::size_t batch, const std::string& what)
      : std::runtime_error(what), epoch_(epoch), batch_(batch) {}
  int epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  int epoch_;
  std::size_t batch_;
};

/// Sums per-sample gradients over `batch` (not averaged) and returns the
/// summed loss.
double batch_gradient(const PoseConvNetd& net, const std::vector<const PoseTensor*>& batch,
                      NetParams<double>& grad, int threads = 1);

/// Mini-batch SGD with optional L2 weight decay on weight matrices. The
/// update is w -= lr * (mean batch gradient + decay * w). Deterministic for a
/// fixed config and thread count.
TrainResult train(PoseConvNetd net, const TrainingSet& data, const TrainConfig& config);

/// Fraction of tensors whose argmax matches their label.
double accuracy(const PoseConvNetd& net, const std::vector<PoseTensor>& tensors);

}  // namespace posestream
