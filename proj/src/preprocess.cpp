#include "posestream/preprocess.hpp"

namespace posestream {

template <typename Space>
std::optional<TorsoAnchors> torso_anchors(const BasicPoseSequence<Space>& pose, Eigen::Index t,
                                          const TorsoSpec& torso) {
  auto mean_of = [&](const std::vector<JointIndex>& group) -> std::optional<Eigen::Vector2d> {
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (auto j : group) {
      if (!pose.present(t, j)) return std::nullopt;
      sum += pose.point(t, j);
    }
    return sum / static_cast<double>(group.size());
  };
  auto upper = mean_of(torso.upper);
  auto lower = mean_of(torso.lower);
  if (!upper || !lower) return std::nullopt;
  return TorsoAnchors{*upper, *lower};
}

template std::optional<TorsoAnchors> torso_anchors(const BasicPoseSequence<ImageSpace>&, Eigen::Index,
                                                   const TorsoSpec&);
template std::optional<TorsoAnchors> torso_anchors(const BasicPoseSequence<TorsoSpace>&, Eigen::Index,
                                                   const TorsoSpec&);

NormalizedPoseSequence normalize(const PoseSequence& pose, const SkeletonTopology& topology) {
  if (static_cast<std::size_t>(pose.joints()) != topology.size()) {
    throw std::invalid_argument("normalize: pose has " + std::to_string(pose.joints()) +
                                " joints, topology " + topology.id() + " has " +
                                std::to_string(topology.size()));
  }
  NormalizedPoseSequence out;
  out.video = pose.video;
  out.label = pose.label;
  out.xy = pose.xy;
  out.state = pose.state;
  out.usable.assign(static_cast<std::size_t>(pose.frames()), false);

  for (Eigen::Index t = 0; t < pose.frames(); ++t) {
    const auto anchors = torso_anchors(pose, t, topology.torso());
    if (!anchors) continue;
    const double d = (anchors->upper - anchors->lower).norm();
    if (!(d > kMinTorsoLength)) continue;
    const Eigen::Vector2d mid = 0.5 * (anchors->upper + anchors->lower);
    // (P - mid) / d equals P/d - mid/d without the cancellation of far-off origins.
    for (Eigen::Index j = 0; j < pose.joints(); ++j) {
      if (!pose.present(t, j)) continue;
      out.set_point(t, j, (pose.point(t, j) - mid) / d);
    }
    out.usable[static_cast<std::size_t>(t)] = true;
  }
  return out;
}

PoseSequence temporal_interpolate(const PoseSequence& pose, int max_gap) {
  PoseSequence out = pose;
  const Eigen::Index frames = pose.frames();
  for (Eigen::Index j = 0; j < pose.joints(); ++j) {
    Eigen::Index last_anchor = -1;
    for (Eigen::Index t = 0; t < frames; ++t) {
      if (pose.at(t, j) != JointState::visible) continue;
      const Eigen::Index gap = t - last_anchor - 1;
      if (last_anchor >= 0 && gap > 0 && gap <= max_gap) {
        const Eigen::Vector2d a = pose.point(last_anchor, j);
        const Eigen::Vector2d b = pose.point(t, j);
        const double span = static_cast<double>(t - last_anchor);
        for (Eigen::Index s = last_anchor + 1; s < t; ++s) {
          if (pose.at(s, j) != JointState::missing) continue;
          const double w = static_cast<double>(s - last_anchor) / span;
          out.set_point(s, j, a + w * (b - a));
          out.at(s, j) = JointState::temporal;
        }
      }
      last_anchor = t;
    }
  }
  return out;
}

PoseSequence zero_fill(const PoseSequence& pose) {
  PoseSequence out = pose;
  for (Eigen::Index t = 0; t < pose.frames(); ++t) {
    for (Eigen::Index j = 0; j < pose.joints(); ++j) {
      if (pose.present(t, j)) continue;
      out.set_point(t, j, Eigen::Vector2d::Zero());
      out.at(t, j) = JointState::visible;
    }
  }
  return out;
}

}  // namespace posestream
