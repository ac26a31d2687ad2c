#pragma once

#include <Eigen/Core>

#include "posestream/pose_sequence.hpp"
#include "posestream/skeleton.hpp"

namespace posestream {

/// Torso length below which a frame is declared unusable.
inline constexpr double kMinTorsoLength = 1e-9;

/// Default longest gap (in frames) bridged by temporal interpolation.
inline constexpr int kDefaultMaxGap = 10;

/// Upper and lower torso anchors of frame `t`, or nothing if any anchor joint
/// is missing.
struct TorsoAnchors {
  Eigen::Vector2d upper;
  Eigen::Vector2d lower;
};
template <typename Space>
std::optional<TorsoAnchors> torso_anchors(const BasicPoseSequence<Space>& pose, Eigen::Index t,
                                          const TorsoSpec& torso);

/// Scales each frame by the inverse torso length and moves the torso midpoint
/// to the origin. Missing joints keep their flag and are not touched; frames
/// whose torso cannot be measured are copied verbatim and marked unusable.
NormalizedPoseSequence normalize(const PoseSequence& pose, const SkeletonTopology& topology);

/// Linear fill of interior gaps of at most `max_gap` frames, per joint. Only
/// `visible` slots act as anchors; filled slots become `temporal`. Gaps that
/// touch either end of the sequence stay missing.
PoseSequence temporal_interpolate(const PoseSequence& pose, int max_gap = kDefaultMaxGap);

/// Replaces every missing slot with (0, 0) and marks it visible. This is the
/// no-interpolation baseline.
PoseSequence zero_fill(const PoseSequence& pose);

}  // namespace posestream
