#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "posestream/pose_sequence.hpp"
#include "posestream/skeleton.hpp"

namespace posestream {

inline constexpr int kDefaultSegments = 15;

enum class SamplingMode { random, center };

/// One chosen frame per segment.
struct SnippetPlan {
  SamplingMode mode = SamplingMode::center;
  std::uint64_t seed = 0;
  Eigen::Index num_frames = 0;
  std::vector<Eigen::Index> frames;

  Eigen::Index segments() const { return static_cast<Eigen::Index>(frames.size()); }
};

/// Half-open frame range [floor(k F / K), floor((k+1) F / K)) of segment k.
std::pair<Eigen::Index, Eigen::Index> segment_bounds(Eigen::Index num_frames, Eigen::Index segments,
                                                     Eigen::Index k);

/// Splits `num_frames` into `segments` equal segments and picks one frame from
/// each: uniformly at random (seeded) or the lower middle frame
/// floor((lo + hi - 1) / 2). An empty segment (only when F < K) reuses the
/// previous segment's frame, or frame 0 for the leading segments.
SnippetPlan plan_snippets(Eigen::Index num_frames, Eigen::Index segments, SamplingMode mode,
                          std::uint64_t seed = 0);

/// K x (2L) x 3 tensor stored as three K x 2L channel matrices:
/// positions, first differences, second differences.
template <typename Scalar>
struct BasicPoseTensor {
  using Channel = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  std::array<Channel, 3> channels;
  std::string video;
  std::optional<int> label;
  std::string topology;
  SnippetPlan plan;

  Eigen::Index rows() const { return channels[0].rows(); }
  Eigen::Index cols() const { return channels[0].cols(); }
  Scalar operator()(Eigen::Index r, Eigen::Index c, int ch) const { return channels[ch](r, c); }
};

using PoseTensor = BasicPoseTensor<double>;

struct TensorOptions {
  /// Divide differences by the frame distance between the two snippets.
  bool gap_normalized = false;
};

/// Assembles the pose tensor along `path`. Row k of channel 0 holds the
/// (x, y) pairs of the path joints at frame plan.frames[k]; channels 1 and 2
/// are row differences with a zero first row.
PoseTensor build_pose_tensor(const NormalizedPoseSequence& pose, const std::vector<JointIndex>& path,
                             const SnippetPlan& plan, const std::string& topology_id = {},
                             TensorOptions options = {});

/// Convenience: tour + plan + tensor in one call.
PoseTensor tensorize(const NormalizedPoseSequence& pose, const SkeletonTopology& topology,
                     Eigen::Index segments, SamplingMode mode, std::uint64_t seed,
                     TensorOptions options = {});

}  // namespace posestream
