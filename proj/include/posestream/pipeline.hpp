#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "posestream/pose_sequence.hpp"
#include "posestream/preprocess.hpp"
#include "posestream/skeleton.hpp"
#include "posestream/spatial_model.hpp"
#include "posestream/tensorize.hpp"
#include "posestream/train.hpp"

namespace posestream {

enum class MissingJointPolicy {
  interpolate,  // temporal (raw) -> normalize -> spatial (normalized)
  zero_fill,    // missing slots set to raw (0, 0), no interpolation
};

struct PreprocessSettings {
  Eigen::Index segments = kDefaultSegments;
  int max_gap = kDefaultMaxGap;
  int degree = 1;
  MissingJointPolicy policy = MissingJointPolicy::interpolate;
  std::uint64_t seed = 0;
  TensorOptions tensor;
};

struct VideoReport {
  std::string video;
  std::size_t frames_in = 0;
  std::size_t frames_dropped = 0;  // torso not measurable
  std::size_t missing_in = 0;
  std::size_t temporal_filled = 0;
  std::size_t spatial_filled = 0;
  std::size_t synthetic_filled = 0;
  std::string rejected;  // non-empty when the video produced no tensor
};

struct PreprocessResult {
  std::vector<NormalizedPoseSequence> poses;  // fully filled, usable frames only
  std::vector<PoseTensor> tensors;            // centre-sampled, same order as poses
  std::vector<VideoReport> reports;           // one per input video
};

/// Temporal fill and normalization of one raw sequence.
NormalizedPoseSequence normalize_stage(const PoseSequence& raw, const SkeletonTopology& topology,
                                       const PreprocessSettings& settings);

/// Fits the spatial model on the normalized forms of `corpus`.
SpatialModel fit_corpus_model(const std::vector<PoseSequence>& corpus, const SkeletonTopology& topology,
                              const PreprocessSettings& settings);

/// Runs the missing-joint pipeline and builds one centre-sampled tensor per
/// usable video. `model` is required for the interpolate policy.
PreprocessResult preprocess_videos(const std::vector<PoseSequence>& raw, const SkeletonTopology& topology,
                                   const PreprocessSettings& settings, const SpatialModel* model);

/// Seed for the random snippet plan of sample `index` in `epoch`.
std::uint64_t snippet_seed(std::uint64_t seed, int epoch, std::size_t index);

/// Training set whose resampler draws random snippet plans from `poses`.
TrainingSet make_training_set(std::vector<PoseTensor> tensors, std::vector<NormalizedPoseSequence> poses,
                              const SkeletonTopology& topology, std::uint64_t seed, TensorOptions options = {});

}  // namespace posestream
