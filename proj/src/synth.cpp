#include "posestream/synth.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace posestream {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Canonical keypoints of the stick figure, in pixels.
using Body = std::map<std::string, Eigen::Vector2d, std::less<>>;

// Angles are absolute, measured from straight down; positive turns toward +x.
Eigen::Vector2d limb(const Eigen::Vector2d& from, double angle_deg, double length) {
  return from + length * Eigen::Vector2d(std::sin(angle_deg * kDeg), std::cos(angle_deg * kDeg));
}

struct VideoParams {
  double scale;      // pixels per torso unit
  Eigen::Vector2d origin;
  double omega;      // radians per frame
  double phase;
  double amplitude;  // motion magnitude multiplier
  double direction;  // +1 / -1 for walking
};

struct Pose {
  Eigen::Vector2d hip_center{0, 0};  // torso units
  double lean = 0;                   // degrees
  // Outward angles (degrees) and extra forearm/shin bend per side.
  double r_arm = 15, r_fore = 25, l_arm = 15, l_fore = 25;
  double r_leg = 5, r_shin = 5, l_leg = 5, l_shin = 5;
  bool absolute_limbs = false;  // angles already signed (used by walk and bow)
};

Pose pose_at(MotionClass motion, double t, const VideoParams& p) {
  Pose s;
  const double wave = std::sin(p.omega * t + p.phase);
  const double open = 0.5 * (1.0 - std::cos(p.omega * t + p.phase));
  const double a = p.amplitude;
  switch (motion) {
    case MotionClass::wave_right:
      s.r_arm = 130;
      s.r_fore = 165 + 40 * a * wave;
      break;
    case MotionClass::wave_left:
      s.l_arm = 130;
      s.l_fore = 165 + 40 * a * wave;
      break;
    case MotionClass::walk:
      s.absolute_limbs = true;
      s.hip_center = {p.direction * 0.05 * t, -0.04 * std::abs(wave)};
      s.r_leg = 25 * a * wave;
      s.r_shin = s.r_leg - 10 * std::abs(wave);
      s.l_leg = -25 * a * wave;
      s.l_shin = s.l_leg - 10 * std::abs(wave);
      s.r_arm = -20 * a * wave;
      s.r_fore = s.r_arm + 10;
      s.l_arm = 20 * a * wave;
      s.l_fore = s.l_arm + 10;
      break;
    case MotionClass::squat:
      s.hip_center = {0, 0.45 * a * open};
      s.r_leg = s.l_leg = 10 + 55 * a * open;
      s.r_shin = s.l_shin = -(5 + 45 * a * open);
      s.r_arm = s.l_arm = 15 + 60 * a * open;
      s.r_fore = s.l_fore = s.r_arm + 5;
      break;
    case MotionClass::jumping_jack:
      s.hip_center = {0, -0.12 * a * open};
      s.r_arm = s.l_arm = 20 + 140 * std::min(1.0, a * open);
      s.r_fore = s.l_fore = s.r_arm + 10;
      s.r_leg = s.l_leg = s.r_shin = s.l_shin = 5 + 20 * a * open;
      break;
    case MotionClass::bow:
      s.absolute_limbs = true;
      s.lean = 55 * a * open;
      s.r_arm = s.l_arm = 0;
      s.r_fore = s.l_fore = 5;
      s.r_leg = s.r_shin = -5;
      s.l_leg = s.l_shin = 5;
      break;
  }
  return s;
}

// Person's right side is on the image left (-x).
Body render(const Pose& s, const VideoParams& p) {
  const double u = p.scale;
  Body b;
  const Eigen::Vector2d hip = p.origin + u * s.hip_center;
  const Eigen::Vector2d up(std::sin(s.lean * kDeg), -std::cos(s.lean * kDeg));
  const Eigen::Vector2d across(-up.y(), up.x());  // toward +x when upright
  const Eigen::Vector2d neck = hip + u * up;
  b["neck"] = neck;
  b["belly"] = hip + 0.3 * (neck - hip);
  b["head"] = b["face"] = neck + 0.35 * u * up;
  b["r_shoulder"] = neck - 0.25 * u * across;
  b["l_shoulder"] = neck + 0.25 * u * across;
  b["r_hip"] = hip - 0.15 * u * across;
  b["l_hip"] = hip + 0.15 * u * across;

  const double r = s.absolute_limbs ? 1.0 : -1.0;
  b["r_elbow"] = limb(b["r_shoulder"], r * s.r_arm, 0.45 * u);
  b["r_wrist"] = limb(b["r_elbow"], r * s.r_fore, 0.40 * u);
  b["l_elbow"] = limb(b["l_shoulder"], s.l_arm, 0.45 * u);
  b["l_wrist"] = limb(b["l_elbow"], s.l_fore, 0.40 * u);
  b["r_knee"] = limb(b["r_hip"], r * s.r_leg, 0.50 * u);
  b["r_ankle"] = limb(b["r_knee"], r * s.r_shin, 0.50 * u);
  b["l_knee"] = limb(b["l_hip"], s.l_leg, 0.50 * u);
  b["l_ankle"] = limb(b["l_knee"], s.l_shin, 0.50 * u);
  return b;
}

}  // namespace

std::string_view motion_name(MotionClass m) {
  switch (m) {
    case MotionClass::wave_right: return "wave_right";
    case MotionClass::walk: return "walk";
    case MotionClass::squat: return "squat";
    case MotionClass::jumping_jack: return "jumping_jack";
    case MotionClass::wave_left: return "wave_left";
    case MotionClass::bow: return "bow";
  }
  return "?";
}

MotionClass parse_motion(std::string_view name) {
  for (auto m : {MotionClass::wave_right, MotionClass::walk, MotionClass::squat, MotionClass::jumping_jack,
                 MotionClass::wave_left, MotionClass::bow}) {
    if (motion_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown motion class: " + std::string(name));
}

void SyntheticSpec::validate() const {
  if (classes.size() < 2) throw std::invalid_argument("synthetic spec needs at least two classes");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must be in [0, 1)");
  if (videos_per_class < 1) throw std::invalid_argument("videos per class must be >= 1");
  if (min_frames < 1 || max_frames < min_frames) throw std::invalid_argument("bad frame range");
}

std::vector<PoseSequence> synthesize(const SyntheticSpec& spec, const SkeletonTopology& topology) {
  spec.validate();
  const Body probe = render(Pose{}, VideoParams{1, {0, 0}, 0, 0, 1, 1});
  for (const auto& j : topology.joints()) {
    if (!probe.contains(j.name)) {
      throw std::invalid_argument("synthesize: no synthetic keypoint for joint '" + j.name + "'");
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> length(spec.min_frames, spec.max_frames);

  const auto n = static_cast<Eigen::Index>(topology.size());
  std::vector<PoseSequence> out;
  out.reserve(spec.classes.size() * static_cast<std::size_t>(spec.videos_per_class));
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    for (int v = 0; v < spec.videos_per_class; ++v) {
      VideoParams p;
      p.scale = uniform(60, 120);
      p.origin = {uniform(200, 440), uniform(200, 300)};
      p.omega = 2 * std::numbers::pi * uniform(0.05, 0.12);
      p.phase = uniform(0, 2 * std::numbers::pi);
      p.amplitude = uniform(0.8, 1.2);
      p.direction = unit(rng) < 0.5 ? -1.0 : 1.0;
      const int frames = length(rng);

      char id[96];
      std::snprintf(id, sizeof id, "%s_%s_%04d", spec.id_prefix.c_str(),
                    std::string(motion_name(spec.classes[c])).c_str(), v);
      PoseSequence seq(id, frames, n);
      seq.label = static_cast<int>(c);
      for (int t = 0; t < frames; ++t) {
        const Body body = render(pose_at(spec.classes[c], t, p), p);
        for (Eigen::Index j = 0; j < n; ++j) {
          Eigen::Vector2d pt = body.find(topology.joints()[static_cast<std::size_t>(j)].name)->second;
          if (spec.noise_sigma > 0) pt += spec.noise_sigma * Eigen::Vector2d(noise(rng), noise(rng));
          const bool hidden = spec.dropout > 0 && unit(rng) < spec.dropout;
          seq.set_point(t, j, hidden ? Eigen::Vector2d::Zero() : pt);
          seq.at(t, j) = hidden ? JointState::missing : JointState::visible;
        }
      }
      out.push_back(std::move(seq));
    }
  }
  return out;
}

}  // namespace posestream
