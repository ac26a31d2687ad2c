#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace posestream {

/// Per-slot provenance. Everything except `missing` carries a usable coordinate.
enum class JointState : std::uint8_t {
  missing = 0,
  visible = 1,
  temporal = 2,   // filled by temporal interpolation
  spatial = 3,    // filled by spatial voting
  synthetic = 4,  // no voters; placed at the torso centre
};

inline bool is_present(JointState s) { return s != JointState::missing; }

struct ImageSpace {};
struct TorsoSpace {};

/// Joint tracks of one person in one video.
///
/// `xy` is frames x 2n with columns (x_0, y_0, x_1, y_1, ...). Coordinates of
/// missing slots are unspecified. `Space` tags whether coordinates are raw
/// pixels or torso-normalized units.
template <typename Space>
struct BasicPoseSequence {
  std::string video;
  std::optional<int> label;
  Eigen::MatrixXd xy;
  std::vector<JointState> state;

  BasicPoseSequence() = default;
  BasicPoseSequence(std::string video_id, Eigen::Index frames, Eigen::Index joints)
      : video(std::move(video_id)),
        xy(Eigen::MatrixXd::Zero(frames, 2 * joints)),
        state(static_cast<std::size_t>(frames * joints), JointState::visible) {}

  Eigen::Index frames() const { return xy.rows(); }
  Eigen::Index joints() const { return xy.cols() / 2; }

  Eigen::Vector2d point(Eigen::Index t, Eigen::Index j) const {
    return {xy(t, 2 * j), xy(t, 2 * j + 1)};
  }
  void set_point(Eigen::Index t, Eigen::Index j, const Eigen::Vector2d& p) {
    xy(t, 2 * j) = p.x();
    xy(t, 2 * j + 1) = p.y();
  }
  JointState& at(Eigen::Index t, Eigen::Index j) {
    return state[static_cast<std::size_t>(t * joints() + j)];
  }
  JointState at(Eigen::Index t, Eigen::Index j) const {
    return state[static_cast<std::size_t>(t * joints() + j)];
  }
  bool present(Eigen::Index t, Eigen::Index j) const { return is_present(at(t, j)); }

  std::size_t count(JointState s) const {
    std::size_t c = 0;
    for (auto v : state) c += (v == s);
    return c;
  }
  std::size_t missing_count() const { return count(JointState::missing); }
};

using PoseSequence = BasicPoseSequence<ImageSpace>;

/// Torso-normalized sequence. `usable[t]` is false for frames whose torso
/// could not be measured; those rows keep their raw values.
struct NormalizedPoseSequence : BasicPoseSequence<TorsoSpace> {
  std::vector<bool> usable;

  std::size_t usable_frames() const {
    std::size_t c = 0;
    for (bool u : usable) c += u;
    return c;
  }
};

/// Keeps only usable frames. Throws if none remain.
NormalizedPoseSequence drop_unusable_frames(const NormalizedPoseSequence& pose);

// --- annotation files (JSON lines) -------------------------------------------

struct AnnotationIssue {
  std::size_t line = 0;
  std::string message;
};

struct AnnotationSet {
  std::vector<PoseSequence> records;
  std::vector<AnnotationIssue> issues;
};

/// Reads `{"video", "label", "n", "frames": [[[x, y, vis], ...], ...]}` records,
/// one per line. Lines holding a `"meta"` object are skipped. A record is
/// rejected (and listed in `issues` with its 1-based line number) when it is
/// malformed or, if `expected_joints` is given, has a different joint count.
/// Any nonzero `vis` is read back as the matching JointState.
AnnotationSet read_annotations(std::istream& in, std::optional<std::size_t> expected_joints = {});
AnnotationSet read_annotations(const std::filesystem::path& path,
                               std::optional<std::size_t> expected_joints = {});

/// One JSON line per sequence; `vis` carries the JointState code.
template <typename Space>
std::string annotation_line(const BasicPoseSequence<Space>& pose);

}  // namespace posestream
