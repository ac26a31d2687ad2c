#include "posestream/tensorize.hpp"

#include <random>
#include <stdexcept>

namespace posestream {

std::pair<Eigen::Index, Eigen::Index> segment_bounds(Eigen::Index num_frames, Eigen::Index segments,
                                                     Eigen::Index k) {
  return {k * num_frames / segments, (k + 1) * num_frames / segments};
}

SnippetPlan plan_snippets(Eigen::Index num_frames, Eigen::Index segments, SamplingMode mode,
                          std::uint64_t seed) {
  if (num_frames < 1) throw std::invalid_argument("plan_snippets: video has no frames");
  if (segments < 1) throw std::invalid_argument("plan_snippets: need at least one segment");

  SnippetPlan plan;
  plan.mode = mode;
  plan.seed = seed;
  plan.num_frames = num_frames;
  plan.frames.reserve(static_cast<std::size_t>(segments));

  std::mt19937_64 rng(seed);
  Eigen::Index previous = 0;
  for (Eigen::Index k = 0; k < segments; ++k) {
    const auto [lo, hi] = segment_bounds(num_frames, segments, k);
    Eigen::Index chosen = previous;
    if (hi > lo) {
      if (mode == SamplingMode::center) {
        chosen = (lo + hi - 1) / 2;
      } else {
        std::uniform_int_distribution<Eigen::Index> pick(lo, hi - 1);
        chosen = pick(rng);
      }
    }
    plan.frames.push_back(chosen);
    previous = chosen;
  }
  return plan;
}

PoseTensor build_pose_tensor(const NormalizedPoseSequence& pose, const std::vector<JointIndex>& path,
                             const SnippetPlan& plan, const std::string& topology_id, TensorOptions options) {
  if (plan.num_frames != pose.frames()) {
    throw std::invalid_argument("build_pose_tensor: plan covers " + std::to_string(plan.num_frames) +
                                " frames, video " + pose.video + " has " + std::to_string(pose.frames()));
  }
  const Eigen::Index rows = plan.segments();
  const auto width = static_cast<Eigen::Index>(2 * path.size());

  PoseTensor tensor;
  tensor.video = pose.video;
  tensor.label = pose.label;
  tensor.topology = topology_id;
  tensor.plan = plan;
  for (auto& ch : tensor.channels) ch = PoseTensor::Channel::Zero(rows, width);

  auto& pos = tensor.channels[0];
  for (Eigen::Index k = 0; k < rows; ++k) {
    const Eigen::Index t = plan.frames[static_cast<std::size_t>(k)];
    if (t < 0 || t >= pose.frames()) throw std::invalid_argument("build_pose_tensor: plan index out of range");
    for (std::size_t i = 0; i < path.size(); ++i) {
      const auto j = static_cast<Eigen::Index>(path[i]);
      if (!pose.present(t, j)) {
        throw std::invalid_argument("build_pose_tensor: video " + pose.video + " frame " + std::to_string(t) +
                                    " still has missing joints; interpolate first");
      }
      pos(k, 2 * static_cast<Eigen::Index>(i)) = pose.xy(t, 2 * j);
      pos(k, 2 * static_cast<Eigen::Index>(i) + 1) = pose.xy(t, 2 * j + 1);
    }
  }

  for (int ch = 1; ch < 3; ++ch) {
    const auto& prev = tensor.channels[ch - 1];
    auto& diff = tensor.channels[ch];
    for (Eigen::Index k = 1; k < rows; ++k) {
      diff.row(k) = prev.row(k) - prev.row(k - 1);
      if (options.gap_normalized) {
        const auto gap = plan.frames[static_cast<std::size_t>(k)] - plan.frames[static_cast<std::size_t>(k - 1)];
        if (gap > 0) diff.row(k) /= static_cast<double>(gap);
      }
    }
  }
  return tensor;
}

PoseTensor tensorize(const NormalizedPoseSequence& pose, const SkeletonTopology& topology, Eigen::Index segments,
                     SamplingMode mode, std::uint64_t seed, TensorOptions options) {
  const auto plan = plan_snippets(pose.frames(), segments, mode, seed);
  return build_pose_tensor(pose, euler_tour(topology), plan, topology.id(), options);
}

}  // namespace posestream
