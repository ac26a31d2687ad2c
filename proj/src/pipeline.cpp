#include "posestream/pipeline.hpp"

#include <memory>

namespace posestream {

NormalizedPoseSequence normalize_stage(const PoseSequence& raw, const SkeletonTopology& topology,
                                       const PreprocessSettings& settings) {
  if (settings.policy == MissingJointPolicy::zero_fill) return normalize(zero_fill(raw), topology);
  return normalize(temporal_interpolate(raw, settings.max_gap), topology);
}

SpatialModel fit_corpus_model(const std::vector<PoseSequence>& corpus, const SkeletonTopology& topology,
                              const PreprocessSettings& settings) {
  std::vector<NormalizedPoseSequence> normalized;
  normalized.reserve(corpus.size());
  for (const auto& seq : corpus) normalized.push_back(normalize_stage(seq, topology, settings));
  return fit_spatial_model(normalized, topology, {.degree = settings.degree});
}

PreprocessResult preprocess_videos(const std::vector<PoseSequence>& raw, const SkeletonTopology& topology,
                                   const PreprocessSettings& settings, const SpatialModel* model) {
  if (settings.policy == MissingJointPolicy::interpolate && model == nullptr) {
    throw std::invalid_argument("preprocess: the interpolate policy needs a spatial model");
  }
  const auto path = euler_tour(topology);
  PreprocessResult result;
  for (const auto& seq : raw) {
    VideoReport report;
    report.video = seq.video;
    report.frames_in = static_cast<std::size_t>(seq.frames());
    report.missing_in = seq.missing_count();
    try {
      auto normalized = normalize_stage(seq, topology, settings);
      report.frames_dropped = static_cast<std::size_t>(normalized.frames()) - normalized.usable_frames();
      normalized = drop_unusable_frames(normalized);
      if (settings.policy == MissingJointPolicy::interpolate) {
        normalized = spatial_interpolate(normalized, *model, topology);
      }
      report.temporal_filled = normalized.count(JointState::temporal);
      report.spatial_filled = normalized.count(JointState::spatial);
      report.synthetic_filled = normalized.count(JointState::synthetic);

      const auto plan = plan_snippets(normalized.frames(), settings.segments, SamplingMode::center);
      result.tensors.push_back(build_pose_tensor(normalized, path, plan, topology.id(), settings.tensor));
      result.poses.push_back(std::move(normalized));
    } catch (const std::invalid_argument& e) {
      report.rejected = e.what();
    }
    result.reports.push_back(std::move(report));
  }
  return result;
}

std::uint64_t snippet_seed(std::uint64_t seed, int epoch, std::size_t index) {
  // splitmix64 finalizer over the combined key.
  std::uint64_t z = seed ^ (static_cast<std::uint64_t>(epoch) * 0x9e3779b97f4a7c15ull) ^
                    (static_cast<std::uint64_t>(index) * 0xbf58476d1ce4e5b9ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

TrainingSet make_training_set(std::vector<PoseTensor> tensors, std::vector<NormalizedPoseSequence> poses,
                              const SkeletonTopology& topology, std::uint64_t seed, TensorOptions options) {
  if (tensors.size() != poses.size()) throw std::invalid_argument("training set: tensors and poses differ in count");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].video != poses[i].video) {
      throw std::invalid_argument("training set: tensor " + tensors[i].video + " paired with pose " + poses[i].video);
    }
  }
  TrainingSet set;
  const Eigen::Index segments = tensors.empty() ? kDefaultSegments : tensors.front().rows();
  auto shared = std::make_shared<const std::vector<NormalizedPoseSequence>>(std::move(poses));
  auto path = std::make_shared<const std::vector<JointIndex>>(euler_tour(topology));
  set.tensors = std::move(tensors);
  set.resample = [shared, path, segments, seed, options, id = topology.id()](std::size_t i, int epoch) {
    const auto& pose = (*shared)[i];
    const auto plan = plan_snippets(pose.frames(), segments, SamplingMode::random, snippet_seed(seed, epoch, i));
    return build_pose_tensor(pose, *path, plan, id, options);
  };
  return set;
}

}  // namespace posestream
