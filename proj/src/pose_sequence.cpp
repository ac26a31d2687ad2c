#include "posestream/pose_sequence.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <stdexcept>

#include <json.hpp>

namespace posestream {

using nlohmann::json;

NormalizedPoseSequence drop_unusable_frames(const NormalizedPoseSequence& pose) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index t = 0; t < pose.frames(); ++t) {
    if (pose.usable[static_cast<std::size_t>(t)]) keep.push_back(t);
  }
  if (keep.empty()) throw std::invalid_argument("video " + pose.video + ": no usable frames");

  NormalizedPoseSequence out;
  out.video = pose.video;
  out.label = pose.label;
  const Eigen::Index n = pose.joints();
  out.xy.resize(static_cast<Eigen::Index>(keep.size()), pose.xy.cols());
  out.state.reserve(keep.size() * static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.xy.row(static_cast<Eigen::Index>(r)) = pose.xy.row(keep[r]);
    for (Eigen::Index j = 0; j < n; ++j) out.state.push_back(pose.at(keep[r], j));
  }
  out.usable.assign(keep.size(), true);
  return out;
}

namespace {

PoseSequence parse_record(const json& rec, std::optional<std::size_t> expected_joints) {
  if (!rec.is_object()) throw std::invalid_argument("record is not a JSON object");
  if (!rec.contains("video") || !rec.contains("n") || !rec.contains("frames")) {
    throw std::invalid_argument("record needs \"video\", \"n\" and \"frames\"");
  }
  std::string video = rec.at("video").is_string() ? rec.at("video").get<std::string>()
                                                   : rec.at("video").dump();
  const auto n = rec.at("n").get<long long>();
  if (n <= 0) throw std::invalid_argument("n must be positive");
  if (expected_joints && static_cast<std::size_t>(n) != *expected_joints) {
    throw std::invalid_argument("n=" + std::to_string(n) + " does not match topology joint count " +
                                std::to_string(*expected_joints));
  }
  const auto& frames = rec.at("frames");
  if (!frames.is_array() || frames.empty()) throw std::invalid_argument("frames must be a non-empty array");

  PoseSequence pose(std::move(video), static_cast<Eigen::Index>(frames.size()),
                    static_cast<Eigen::Index>(n));
  if (rec.contains("label") && !rec.at("label").is_null()) pose.label = rec.at("label").get<int>();

  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& frame = frames[t];
    if (!frame.is_array() || frame.size() != static_cast<std::size_t>(n)) {
      throw std::invalid_argument("frame " + std::to_string(t) + " does not have n=" + std::to_string(n) +
                                  " joints");
    }
    for (std::size_t j = 0; j < frame.size(); ++j) {
      const auto& slot = frame[j];
      if (!slot.is_array() || slot.size() != 3) {
        throw std::invalid_argument("frame " + std::to_string(t) + " joint " + std::to_string(j) +
                                    ": expected [x, y, vis]");
      }
      const double x = slot[0].get<double>();
      const double y = slot[1].get<double>();
      const int vis = slot[2].get<int>();
      if (vis < 0 || vis > 4) throw std::invalid_argument("visibility code out of range");
      const auto ti = static_cast<Eigen::Index>(t);
      const auto ji = static_cast<Eigen::Index>(j);
      pose.at(ti, ji) = static_cast<JointState>(vis);
      if (vis != 0) {
        if (!std::isfinite(x) || !std::isfinite(y)) {
          throw std::invalid_argument("non-finite coordinate on a visible joint");
        }
        pose.set_point(ti, ji, {x, y});
      }
    }
  }
  return pose;
}

}  // namespace

AnnotationSet read_annotations(std::istream& in, std::optional<std::size_t> expected_joints) {
  AnnotationSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      if (rec.is_object() && rec.contains("meta")) continue;
      set.records.push_back(parse_record(rec, expected_joints));
    } catch (const std::exception& e) {
      set.issues.push_back({line_no, e.what()});
    }
  }
  return set;
}

AnnotationSet read_annotations(const std::filesystem::path& path, std::optional<std::size_t> expected_joints) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open annotation file " + path.string());
  return read_annotations(in, expected_joints);
}

template <typename Space>
std::string annotation_line(const BasicPoseSequence<Space>& pose) {
  json rec;
  rec["video"] = pose.video;
  rec["label"] = pose.label ? json(*pose.label) : json(nullptr);
  rec["n"] = pose.joints();
  json frames = json::array();
  for (Eigen::Index t = 0; t < pose.frames(); ++t) {
    json frame = json::array();
    for (Eigen::Index j = 0; j < pose.joints(); ++j) {
      const bool present = pose.present(t, j);
      frame.push_back(json::array({present ? pose.xy(t, 2 * j) : 0.0, present ? pose.xy(t, 2 * j + 1) : 0.0,
                                   static_cast<int>(pose.at(t, j))}));
    }
    frames.push_back(std::move(frame));
  }
  rec["frames"] = std::move(frames);
  return rec.dump();
}

template std::string annotation_line(const BasicPoseSequence<ImageSpace>&);
template std::string annotation_line(const BasicPoseSequence<TorsoSpace>&);

}  // namespace posestream
