#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "posestream/pose_sequence.hpp"
#include "posestream/skeleton.hpp"

namespace posestream {

/// Polynomial features of a 2D point: degree 0 -> [1], degree 1 -> [1, x, y],
/// degree 2 -> [1, x, y, x^2, xy, y^2].
Eigen::Index feature_count(int degree);
Eigen::VectorXd polynomial_features(const Eigen::Vector2d& p, int degree);

/// Least-squares map from a source joint position to a target joint position.
/// `degree == 0` is the mean-offset fallback: target = source + offset, with the
/// offset stored in the single coefficient row.
struct PairModel {
  bool trained = false;
  int degree = 0;
  std::size_t samples = 0;
  double residual_rms = 0.0;
  Eigen::Matrix<double, Eigen::Dynamic, 2> coefficients;

  Eigen::Vector2d predict(const Eigen::Vector2d& source) const;
};

/// Pairwise joint regressors for one topology, fitted on torso-normalized
/// coordinates. Immutable after fitting.
class SpatialModel {
 public:
  SpatialModel(std::size_t joints, int degree);

  std::size_t joints() const { return joints_; }
  int degree() const { return degree_; }
  const PairModel& pair(JointIndex source, JointIndex target) const {
    return pairs_.at(source * joints_ + target);
  }
  PairModel& pair(JointIndex source, JointIndex target) { return pairs_.at(source * joints_ + target); }

 private:
  std::size_t joints_;
  int degree_;
  std::vector<PairModel> pairs_;
};

struct SpatialFitOptions {
  int degree = 1;
  /// Pairs observed together in fewer frames stay untrained.
  std::size_t min_samples = 1;
};

/// Fits every ordered joint pair over all frames where both joints are
/// observed (state `visible`) and the frame is usable. A rank-deficient design
/// falls back to the mean-offset model for that pair.
SpatialModel fit_spatial_model(std::span<const NormalizedPoseSequence> corpus,
                               const SkeletonTopology& topology, SpatialFitOptions options = {});

/// Fills missing joints of usable frames by averaging votes of observed joints.
///
/// Voter selection for a missing joint: present joints of its own part when
/// that part is 1-4; if none and the joint is upper body, present part-5
/// joints; otherwise all present joints of the frame. Untrained voter pairs
/// abstain. A joint with no votes is placed at the origin (torso centre) and
/// flagged `synthetic`. Votes use the frame as it was before any filling.
NormalizedPoseSequence spatial_interpolate(const NormalizedPoseSequence& pose, const SpatialModel& model,
                                           const SkeletonTopology& topology);

/// Voters chosen for `target` given a presence mask over the frame's joints.
std::vector<JointIndex> select_voters(const SkeletonTopology& topology, JointIndex target,
                                      const std::vector<bool>& present);

}  // namespace posestream
