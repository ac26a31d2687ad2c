#include "posestream/skeleton.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace posestream {

namespace {

constexpr JointIndex kNoParent = static_cast<JointIndex>(-1);

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

int parse_int(std::string_view s, std::string_view what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(std::string(s), &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("topology: bad integer for " + std::string(what) + ": '" +
                                std::string(s) + "'");
  }
}

// Shared builder for the built-in profiles.
struct Builder {
  std::vector<JointId> joints;
  std::vector<int> parts;
  std::vector<bool> upper;
  std::vector<Edge> edges;

  JointIndex add(std::string name, int part, bool upper_body) {
    const auto idx = static_cast<JointIndex>(joints.size());
    joints.push_back({idx, std::move(name)});
    parts.push_back(part);
    upper.push_back(upper_body);
    return idx;
  }
  void link(JointIndex parent, JointIndex child) { edges.push_back({parent, child}); }
};

// Standard JHMDB joint order: neck, belly, face, shoulders, hips, elbows,
// knees, wrists, ankles (right before left).
SkeletonTopology jhmdb_gt() {
  Builder b;
  const auto neck = b.add("neck", 5, true);
  const auto belly = b.add("belly", 5, false);
  const auto face = b.add("face", 5, true);
  const auto r_sho = b.add("r_shoulder", 1, true);
  const auto l_sho = b.add("l_shoulder", 2, true);
  const auto r_hip = b.add("r_hip", 3, false);
  const auto l_hip = b.add("l_hip", 4, false);
  const auto r_elb = b.add("r_elbow", 1, true);
  const auto l_elb = b.add("l_elbow", 2, true);
  const auto r_knee = b.add("r_knee", 3, false);
  const auto l_knee = b.add("l_knee", 4, false);
  const auto r_wri = b.add("r_wrist", 1, true);
  const auto l_wri = b.add("l_wrist", 2, true);
  const auto r_ank = b.add("r_ankle", 3, false);
  const auto l_ank = b.add("l_ankle", 4, false);

  b.link(belly, neck);
  b.link(belly, r_hip);
  b.link(belly, l_hip);
  b.link(neck, face);
  b.link(neck, r_sho);
  b.link(neck, l_sho);
  b.link(r_sho, r_elb);
  b.link(l_sho, l_elb);
  b.link(r_elb, r_wri);
  b.link(l_elb, l_wri);
  b.link(r_hip, r_knee);
  b.link(l_hip, l_knee);
  b.link(r_knee, r_ank);
  b.link(l_knee, l_ank);
  return SkeletonTopology("jhmdb_gt", b.joints, b.edges, belly, TorsoSpec{{neck}, {belly}},
                          b.parts, b.upper);
}

// Pose-estimator layout with the eye and ear keypoints dropped; the nose is
// kept as "head". There is no belly joint, so the torso runs from the neck to
// the hip midpoint.
SkeletonTopology estimated_14() {
  Builder b;
  const auto head = b.add("head", 5, true);
  const auto neck = b.add("neck", 5, true);
  const auto r_sho = b.add("r_shoulder", 1, true);
  const auto r_elb = b.add("r_elbow", 1, true);
  const auto r_wri = b.add("r_wrist", 1, true);
  const auto l_sho = b.add("l_shoulder", 2, true);
  const auto l_elb = b.add("l_elbow", 2, true);
  const auto l_wri = b.add("l_wrist", 2, true);
  const auto r_hip = b.add("r_hip", 3, false);
  const auto r_knee = b.add("r_knee", 3, false);
  const auto r_ank = b.add("r_ankle", 3, false);
  const auto l_hip = b.add("l_hip", 4, false);
  const auto l_knee = b.add("l_knee", 4, false);
  const auto l_ank = b.add("l_ankle", 4, false);

  b.link(neck, head);
  b.link(neck, r_sho);
  b.link(neck, l_sho);
  b.link(neck, r_hip);
  b.link(neck, l_hip);
  b.link(r_sho, r_elb);
  b.link(r_elb, r_wri);
  b.link(l_sho, l_elb);
  b.link(l_elb, l_wri);
  b.link(r_hip, r_knee);
  b.link(r_knee, r_ank);
  b.link(l_hip, l_knee);
  b.link(l_knee, l_ank);
  return SkeletonTopology("estimated_14", b.joints, b.edges, neck,
                          TorsoSpec{{neck}, {r_hip, l_hip}}, b.parts, b.upper);
}

// Penn Action order: head, then left/right pairs of shoulders, elbows,
// wrists, hips, knees, ankles. Hips hang off the shoulder of the same side.
SkeletonTopology penn() {
  Builder b;
  const auto head = b.add("head", 5, true);
  const auto l_sho = b.add("l_shoulder", 2, true);
  const auto r_sho = b.add("r_shoulder", 1, true);
  const auto l_elb = b.add("l_elbow", 2, true);
  const auto r_elb = b.add("r_elbow", 1, true);
  const auto l_wri = b.add("l_wrist", 2, true);
  const auto r_wri = b.add("r_wrist", 1, true);
  const auto l_hip = b.add("l_hip", 4, false);
  const auto r_hip = b.add("r_hip", 3, false);
  const auto l_knee = b.add("l_knee", 4, false);
  const auto r_knee = b.add("r_knee", 3, false);
  const auto l_ank = b.add("l_ankle", 4, false);
  const auto r_ank = b.add("r_ankle", 3, false);

  b.link(head, l_sho);
  b.link(head, r_sho);
  b.link(l_sho, l_elb);
  b.link(r_sho, r_elb);
  b.link(l_elb, l_wri);
  b.link(r_elb, r_wri);
  b.link(l_sho, l_hip);
  b.link(r_sho, r_hip);
  b.link(l_hip, l_knee);
  b.link(r_hip, r_knee);
  b.link(l_knee, l_ank);
  b.link(r_knee, r_ank);
  return SkeletonTopology("penn", b.joints, b.edges, head, TorsoSpec{{head}, {l_hip, r_hip}},
                          b.parts, b.upper);
}

}  // namespace

std::string_view profile_name(Profile profile) {
  switch (profile) {
    case Profile::jhmdb_gt: return "jhmdb_gt";
    case Profile::estimated_14: return "estimated_14";
    case Profile::penn: return "penn";
    case Profile::custom: return "custom";
  }
  return "custom";
}

Profile parse_profile(std::string_view name) {
  if (name == "jhmdb_gt") return Profile::jhmdb_gt;
  if (name == "estimated_14") return Profile::estimated_14;
  if (name == "penn") return Profile::penn;
  if (name == "custom") return Profile::custom;
  throw std::invalid_argument("unknown topology profile: " + std::string(name));
}

SkeletonTopology::SkeletonTopology(std::string id, std::vector<JointId> joints,
                                   std::vector<Edge> edges, JointIndex root, TorsoSpec torso,
                                   std::vector<int> parts, std::vector<bool> upper_body)
    : id_(std::move(id)),
      joints_(std::move(joints)),
      edges_(std::move(edges)),
      root_(root),
      torso_(std::move(torso)),
      parts_(std::move(parts)),
      upper_body_(std::move(upper_body)) {
  const std::size_t n = joints_.size();
  if (n == 0) throw std::invalid_argument("topology: no joints");
  for (std::size_t i = 0; i < n; ++i) {
    if (joints_[i].index != i) throw std::invalid_argument("topology: joint indices must be 0..n-1");
  }
  if (parts_.size() != n || upper_body_.size() != n) {
    throw std::invalid_argument("topology: part/upper-body tables must cover every joint");
  }
  for (int p : parts_) {
    if (p < 1 || p > 5) throw std::invalid_argument("topology: part id outside 1..5");
  }
  if (root_ >= n) throw std::invalid_argument("topology: root out of range");
  if (edges_.size() != n - 1) {
    throw std::invalid_argument("topology: a tree on " + std::to_string(n) + " joints needs " +
                                std::to_string(n - 1) + " edges, got " +
                                std::to_string(edges_.size()));
  }

  parent_.assign(n, kNoParent);
  children_.assign(n, {});
  std::vector<std::vector<JointIndex>> adj(n);
  for (const auto& e : edges_) {
    if (e.parent >= n || e.child >= n) throw std::invalid_argument("topology: edge endpoint out of range");
    if (e.parent == e.child) throw std::invalid_argument("topology: self loop");
    adj[e.parent].push_back(e.child);
    adj[e.child].push_back(e.parent);
  }

  // Orient from the root; n-1 edges plus full reachability implies a tree.
  std::vector<bool> seen(n, false);
  std::vector<JointIndex> stack{root_};
  seen[root_] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const JointIndex j = stack.back();
    stack.pop_back();
    for (JointIndex k : adj[j]) {
      if (seen[k]) continue;
      seen[k] = true;
      ++reached;
      parent_[k] = j;
      children_[j].push_back(k);
      stack.push_back(k);
    }
  }
  if (reached != n) throw std::invalid_argument("topology: edges do not connect every joint (cycle or forest)");
  for (auto& c : children_) std::sort(c.begin(), c.end());

  if (torso_.upper.empty() || torso_.lower.empty()) {
    throw std::invalid_argument("topology: torso anchors must name at least one joint each");
  }
  for (auto j : torso_.upper) {
    if (j >= n) throw std::invalid_argument("topology: torso joint out of range");
  }
  for (auto j : torso_.lower) {
    if (j >= n) throw std::invalid_argument("topology: torso joint out of range");
  }
  if (torso_.upper == torso_.lower) throw std::invalid_argument("topology: torso anchors coincide");
}

bool SkeletonTopology::adjacent(JointIndex a, JointIndex b) const {
  return (a < parent_.size() && parent_[a] == b) || (b < parent_.size() && parent_[b] == a);
}

std::optional<JointIndex> SkeletonTopology::find(std::string_view name) const {
  for (const auto& j : joints_) {
    if (j.name == name) return j.index;
  }
  return std::nullopt;
}

JointIndex SkeletonTopology::index_of(std::string_view name) const {
  if (auto j = find(name)) return *j;
  throw std::out_of_range("topology " + id_ + " has no joint named '" + std::string(name) + "'");
}

SkeletonTopology build_topology(Profile profile) {
  switch (profile) {
    case Profile::jhmdb_gt: return jhmdb_gt();
    case Profile::estimated_14: return estimated_14();
    case Profile::penn: return penn();
    case Profile::custom: break;
  }
  throw std::invalid_argument("custom topologies are loaded from a description file");
}

bool is_builtin_profile(std::string_view name) {
  return name == "jhmdb_gt" || name == "estimated_14" || name == "penn";
}

SkeletonTopology build_topology(std::string_view profile) {
  if (is_builtin_profile(profile)) {
    return build_topology(parse_profile(profile));
  }
  const std::filesystem::path path{std::string(profile)};
  if (std::filesystem::is_regular_file(path)) return load_topology(path);
  throw std::invalid_argument("unknown topology profile: " + std::string(profile));
}

SkeletonTopology parse_topology(std::string_view text, std::string id) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool have_header = false;
  int declared_n = 0;
  std::string root_name;
  std::string torso_a;
  std::string torso_b;
  int root_part = 5;

  std::vector<std::string> names;
  std::map<std::string, JointIndex, std::less<>> index;
  std::map<JointIndex, int> parts;
  std::vector<Edge> edges;

  auto intern = [&](std::string_view name) {
    if (auto it = index.find(name); it != index.end()) return it->second;
    const auto idx = static_cast<JointIndex>(names.size());
    names.emplace_back(name);
    index.emplace(std::string(name), idx);
    return idx;
  };
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("topology line " + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto toks = tokens(line);
    if (toks.empty() || toks.front().starts_with('#')) continue;

    if (!have_header) {
      for (auto tok : toks) {
        const auto eq = tok.find('=');
        if (eq == std::string_view::npos) fail("expected key=value in header, got '" + std::string(tok) + "'");
        const auto key = tok.substr(0, eq);
        const auto value = tok.substr(eq + 1);
        if (key == "n") {
          declared_n = parse_int(value, "n");
        } else if (key == "root") {
          root_name = value;
        } else if (key == "torso") {
          const auto pair = split(value, ',');
          if (pair.size() != 2 || pair[0].empty() || pair[1].empty()) fail("torso needs two joint names");
          torso_a = pair[0];
          torso_b = pair[1];
        } else if (key == "root_part") {
          root_part = parse_int(value, "root_part");
        } else {
          fail("unknown header key '" + std::string(key) + "'");
        }
      }
      if (declared_n <= 0) fail("header needs n=<positive int>");
      if (root_name.empty()) fail("header needs root=<name>");
      if (torso_a.empty()) fail("header needs torso=<name>,<name>");
      intern(root_name);
      have_header = true;
      continue;
    }

    if (toks.size() != 3 || !toks[2].starts_with("part=")) fail("expected '<parent> <child> part=<1..5>'");
    const auto parent = intern(toks[0]);
    const auto child = intern(toks[1]);
    const int part = parse_int(toks[2].substr(5), "part");
    if (part < 1 || part > 5) fail("part must be in 1..5");
    if (parts.contains(child)) fail("joint '" + std::string(toks[1]) + "' is a child twice");
    parts[child] = part;
    edges.push_back({parent, child});
  }
  if (!have_header) throw std::invalid_argument("topology: empty description");
  if (static_cast<int>(names.size()) != declared_n) {
    throw std::invalid_argument("topology: header declares n=" + std::to_string(declared_n) + " but " +
                                std::to_string(names.size()) + " joints are named");
  }

  const JointIndex root = 0;
  if (parts.contains(root)) throw std::invalid_argument("topology: root appears as a child");
  parts[root] = root_part;

  std::vector<JointId> joints;
  std::vector<int> part_table;
  std::vector<bool> upper;
  for (JointIndex i = 0; i < names.size(); ++i) {
    joints.push_back({i, names[i]});
    const auto it = parts.find(i);
    if (it == parts.end()) {
      throw std::invalid_argument("topology: joint '" + names[i] + "' has no part");
    }
    part_table.push_back(it->second);
    upper.push_back(it->second == 1 || it->second == 2 || it->second == 5);
  }
  auto torso_joint = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw std::invalid_argument("topology: torso joint '" + name + "' not in tree");
    return it->second;
  };
  TorsoSpec torso{{torso_joint(torso_a)}, {torso_joint(torso_b)}};
  return SkeletonTopology(std::move(id), std::move(joints), std::move(edges), root,
                          std::move(torso), std::move(part_table), std::move(upper));
}

SkeletonTopology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open topology file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_topology(ss.str(), path.stem().string());
}

std::vector<JointIndex> euler_tour(const SkeletonTopology& topology) {
  std::vector<JointIndex> path;
  path.reserve(2 * topology.size() - 1);
  // Explicit stack of (joint, next child slot) keeps deep chains off the call stack.
  std::vector<std::pair<JointIndex, std::size_t>> stack{{topology.root(), 0}};
  path.push_back(topology.root());
  while (!stack.empty()) {
    auto& [joint, next] = stack.back();
    const auto& kids = topology.children(joint);
    if (next < kids.size()) {
      const JointIndex child = kids[next++];
      path.push_back(child);
      stack.emplace_back(child, 0);
    } else {
      stack.pop_back();
      if (!stack.empty()) path.push_back(stack.back().first);
    }
  }
  return path;
}

}  // namespace posestream
