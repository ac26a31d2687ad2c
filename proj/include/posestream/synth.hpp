#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "posestream/pose_sequence.hpp"
#include "posestream/skeleton.hpp"

namespace posestream {

/// Parametric stick-figure motions used to build labelled test corpora.
/// These are synthetic stand-ins, not recorded data.
enum class MotionClass {
  wave_right,     // right forearm oscillates with the arm raised
  walk,           // body translates sideways, legs and arms swing
  squat,          // hips drop while knees bend
  jumping_jack,   // arms and legs open and close together
  wave_left,
  bow,            // torso leans forward and back
};

std::string_view motion_name(MotionClass m);
MotionClass parse_motion(std::string_view name);

struct SyntheticSpec {
  std::vector<MotionClass> classes{MotionClass::wave_right, MotionClass::walk, MotionClass::squat,
                                   MotionClass::jumping_jack};
  double noise_sigma = 1.0;  // pixels
  double dropout = 0.0;      // probability that a joint slot is hidden
  int videos_per_class = 10;
  int min_frames = 30;
  int max_frames = 60;
  std::uint64_t seed = 0;
  std::string id_prefix = "synth";

  void validate() const;
};

/// Videos ordered class by class. Labels are the index into `spec.classes`.
/// Every joint name of the topology must be one of: head, face, neck, belly,
/// {l,r}_{shoulder,elbow,wrist,hip,knee,ankle}.
std::vector<PoseSequence> synthesize(const SyntheticSpec& spec, const SkeletonTopology& topology);

}  // namespace posestream
