#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace posestream {

using JointIndex = std::uint32_t;

struct JointId {
  JointIndex index = 0;
  std::string name;
};

struct Edge {
  JointIndex parent = 0;
  JointIndex child = 0;
};

/// Two anchors define the torso. Each anchor is the mean of one or more joints,
/// so a single joint (neck, belly, head) and a proxy such as the hip midpoint
/// are handled the same way.
struct TorsoSpec {
  std::vector<JointIndex> upper;
  std::vector<JointIndex> lower;
};

enum class Profile { jhmdb_gt, estimated_14, penn, custom };

std::string_view profile_name(Profile profile);
Profile parse_profile(std::string_view name);

/// Immutable joint tree with body-part grouping.
///
/// Construction validates the tree invariants: exactly n-1 edges, connected,
/// acyclic, every joint in exactly one part in 1..5, torso anchors valid.
class SkeletonTopology {
 public:
  SkeletonTopology(std::string id, std::vector<JointId> joints, std::vector<Edge> edges,
                   JointIndex root, TorsoSpec torso, std::vector<int> parts,
                   std::vector<bool> upper_body);

  const std::string& id() const { return id_; }
  std::size_t size() const { return joints_.size(); }
  const std::vector<JointId>& joints() const { return joints_; }
  const std::vector<Edge>& edges() const { return edges_; }
  JointIndex root() const { return root_; }
  const TorsoSpec& torso() const { return torso_; }
  int part(JointIndex j) const { return parts_.at(j); }
  bool is_upper_body(JointIndex j) const { return upper_body_.at(j); }

  /// Children of `j` in ascending index order.
  const std::vector<JointIndex>& children(JointIndex j) const { return children_.at(j); }
  bool adjacent(JointIndex a, JointIndex b) const;

  std::optional<JointIndex> find(std::string_view name) const;
  JointIndex index_of(std::string_view name) const;

 private:
  std::string id_;
  std::vector<JointId> joints_;
  std::vector<Edge> edges_;
  JointIndex root_;
  TorsoSpec torso_;
  std::vector<int> parts_;
  std::vector<bool> upper_body_;
  std::vector<std::vector<JointIndex>> children_;
  std::vector<JointIndex> parent_;
};

/// Built-in profiles: jhmdb_gt (15 joints, belly root), estimated_14
/// (14 joints, neck root), penn (13 joints, head root).
SkeletonTopology build_topology(Profile profile);
bool is_builtin_profile(std::string_view name);
SkeletonTopology build_topology(std::string_view profile);

/// Parses the plain-text description format:
///   n=<int> root=<name> torso=<name>,<name> [root_part=<1..5>]
///   <parent> <child> part=<1..5>
///   ...
/// Joint indices follow first appearance, root first. Blank lines and lines
/// starting with '#' are ignored. Parts 1, 2 and 5 count as upper body.
SkeletonTopology parse_topology(std::string_view text, std::string id = "custom");
SkeletonTopology load_topology(const std::filesystem::path& path);

/// Depth-first Euler tour from the root, children in ascending index order.
/// Length is 2n-1, first and last entries are the root.
std::vector<JointIndex> euler_tour(const SkeletonTopology& topology);

}  // namespace posestream
