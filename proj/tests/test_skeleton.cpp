#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "posestream/skeleton.hpp"
#include "test_support.hpp"

using namespace posestream;
using posestream::testing::check_tour;
using posestream::testing::random_tree;

namespace {

// Recursive reference: visit, then each child in ascending order, returning
// to the parent after every child.
void reference_tour(const SkeletonTopology& t, JointIndex j, std::vector<JointIndex>& out) {
  out.push_back(j);
  std::vector<JointIndex> kids;
  for (const auto& e : t.edges()) {
    if (e.parent == j) kids.push_back(e.child);
  }
  std::sort(kids.begin(), kids.end());
  for (auto c : kids) {
    reference_tour(t, c, out);
    out.push_back(j);
  }
}

}  // namespace

TEST_CASE("built-in profiles have the documented sizes and path lengths") {
  struct Row {
    Profile profile;
    std::size_t joints;
    std::size_t path;
  };
  for (auto row : {Row{Profile::jhmdb_gt, 15, 29}, Row{Profile::estimated_14, 14, 27}, Row{Profile::penn, 13, 25}}) {
    const auto topo = build_topology(row.profile);
    CHECK(topo.size() == row.joints);
    CHECK(topo.edges().size() == row.joints - 1);
    const auto tour = euler_tour(topo);
    CHECK(tour.size() == row.path);
    CHECK(check_tour(topo, tour) == "");
  }
}

TEST_CASE("profile names resolve") {
  CHECK(build_topology("jhmdb_gt").size() == 15);
  CHECK(build_topology("estimated_14").size() == 14);
  CHECK(build_topology("penn").size() == 13);
  CHECK(is_builtin_profile("penn"));
  CHECK_FALSE(is_builtin_profile("nonexistent"));
  CHECK(parse_profile(profile_name(Profile::estimated_14)) == Profile::estimated_14);
}

TEST_CASE("jhmdb_gt tree and parts") {
  const auto t = build_topology(Profile::jhmdb_gt);
  CHECK(t.joints()[t.root()].name == "belly");
  CHECK(t.adjacent(t.index_of("belly"), t.index_of("neck")));
  CHECK(t.adjacent(t.index_of("r_elbow"), t.index_of("r_wrist")));
  CHECK_FALSE(t.adjacent(t.index_of("r_wrist"), t.index_of("neck")));
  CHECK(t.part(t.index_of("r_wrist")) == 1);
  CHECK(t.part(t.index_of("l_elbow")) == 2);
  CHECK(t.part(t.index_of("r_knee")) == 3);
  CHECK(t.part(t.index_of("l_ankle")) == 4);
  CHECK(t.part(t.index_of("face")) == 5);
  CHECK(t.is_upper_body(t.index_of("face")));
  CHECK_FALSE(t.is_upper_body(t.index_of("l_knee")));
  CHECK(t.torso().upper == std::vector<JointIndex>{t.index_of("neck")});
  CHECK(t.torso().lower == std::vector<JointIndex>{t.index_of("belly")});
}

TEST_CASE("chain of three gives root, a, b, a, root") {
  const auto t = parse_topology("n=3 root=r torso=r,a\nr a part=5\na b part=5\n");
  const auto tour = euler_tour(t);
  CHECK(tour == std::vector<JointIndex>{0, 1, 2, 1, 0});
}

TEST_CASE("star visits children in ascending index order") {
  const auto t = parse_topology("n=3 root=r torso=r,c1\nr c1 part=1\nr c2 part=2\n");
  CHECK(euler_tour(t) == std::vector<JointIndex>{0, 1, 0, 2, 0});
  // Edge listing order must not matter.
  const auto t2 = SkeletonTopology("star", t.joints(), {{0, 2}, {0, 1}}, 0, t.torso(), {5, 1, 2},
                                   {true, true, true});
  CHECK(euler_tour(t2) == std::vector<JointIndex>{0, 1, 0, 2, 0});
}

TEST_CASE("random trees: structural properties and recursive reference") {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 19;
    const auto t = random_tree(rng, n);
    const auto tour = euler_tour(t);
    REQUIRE(check_tour(t, tour) == "");
    std::vector<JointIndex> ref;
    reference_tour(t, t.root(), ref);
    REQUIRE(tour == ref);
    REQUIRE(euler_tour(t) == tour);
  }
}

TEST_CASE("deep chain does not overflow") {
  const std::size_t n = 20000;
  std::vector<JointId> joints;
  std::vector<Edge> edges;
  for (JointIndex i = 0; i < n; ++i) joints.push_back({i, "j" + std::to_string(i)});
  for (JointIndex i = 1; i < n; ++i) edges.push_back({i - 1, i});
  const SkeletonTopology t("chain", joints, edges, 0, TorsoSpec{{0}, {1}}, std::vector<int>(n, 5),
                           std::vector<bool>(n, true));
  const auto tour = euler_tour(t);
  CHECK(tour.size() == 2 * n - 1);
  CHECK(tour[n - 1] == n - 1);
}

TEST_CASE("invalid trees are rejected") {
  const std::vector<JointId> j3{{0, "a"}, {1, "b"}, {2, "c"}};
  const TorsoSpec torso{{0}, {1}};
  const std::vector<int> parts(3, 5);
  const std::vector<bool> upper(3, true);
  // too few edges
  CHECK_THROWS(SkeletonTopology("x", j3, {{0, 1}}, 0, torso, parts, upper));
  // cycle plus disconnected joint
  CHECK_THROWS(SkeletonTopology("x", j3, {{0, 1}, {1, 0}}, 0, torso, parts, upper));
  CHECK_THROWS(SkeletonTopology("x", j3, {{0, 0}, {1, 2}}, 0, torso, parts, upper));
  // part out of range
  CHECK_THROWS(SkeletonTopology("x", j3, {{0, 1}, {1, 2}}, 0, torso, {5, 6, 5}, upper));
  CHECK_THROWS(SkeletonTopology("x", j3, {{0, 1}, {1, 2}}, 0, TorsoSpec{{}, {1}}, parts, upper));
  CHECK_NOTHROW(SkeletonTopology("x", j3, {{0, 1}, {1, 2}}, 0, torso, parts, upper));
}

TEST_CASE("description file parsing") {
  SUBCASE("custom tree with comments") {
    const auto t = parse_topology(
        "# a tiny body\n"
        "n=5 root=hip torso=neck,hip\n"
        "hip neck part=5\n"
        "\n"
        "neck arm part=1\n"
        "hip leg part=3\n"
        "neck head part=5\n");
    CHECK(t.size() == 5);
    CHECK(t.joints()[t.root()].name == "hip");
    CHECK(t.part(t.index_of("arm")) == 1);
    CHECK(t.is_upper_body(t.index_of("arm")));
    CHECK_FALSE(t.is_upper_body(t.index_of("leg")));
    CHECK(euler_tour(t).size() == 9);
  }
  SUBCASE("errors") {
    CHECK_THROWS(parse_topology(""));
    CHECK_THROWS(parse_topology("n=3 root=r torso=r,a\nr a part=5\n"));               // n mismatch
    CHECK_THROWS(parse_topology("n=2 root=r torso=r,a\nr a part=9\n"));               // bad part
    CHECK_THROWS(parse_topology("n=2 root=r torso=r,zz\nr a part=5\n"));              // unknown torso joint
    CHECK_THROWS(parse_topology("n=3 root=r torso=r,a\nr a part=5\nb a part=5\n"));   // child twice
    CHECK_THROWS(parse_topology("n=2 root=r\nr a part=5\n"));                         // no torso
    CHECK_THROWS(parse_topology("n=2 root=r torso=r,a\nr a\n"));                      // no part
    CHECK_THROWS(parse_topology("n=3 root=r torso=r,a\nr a part=5\nb c part=5\n"));   // forest
  }
  SUBCASE("file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "posestream_topo_test.txt";
    {
      std::ofstream out(path);
      out << "n=3 root=r torso=r,a\nr a part=5\na b part=5\n";
    }
    const auto t = build_topology(path.string());
    CHECK(t.size() == 3);
    CHECK(euler_tour(t) == std::vector<JointIndex>{0, 1, 2, 1, 0});
    std::filesystem::remove(path);
  }
}
