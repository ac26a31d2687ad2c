#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "posestream/convnet.hpp"

namespace posestream {

enum class StreamId { pose, spatial, temporal, other };

std::string_view stream_name(StreamId id);
StreamId parse_stream(std::string_view name);

/// Video-level class scores of one stream, in insertion order.
class StreamScores {
 public:
  StreamScores() = default;
  StreamScores(StreamId id, Eigen::Index classes) : id_(id), classes_(classes) {}

  StreamId id() const { return id_; }
  Eigen::Index classes() const { return classes_; }
  std::size_t size() const { return videos_.size(); }
  bool empty() const { return videos_.empty(); }
  ScoreVector::Kind kind() const { return kind_; }
  void set_kind(ScoreVector::Kind k) { kind_ = k; }

  const std::vector<std::string>& videos() const { return videos_; }
  bool contains(const std::string& video) const { return index_.contains(video); }
  const Eigen::VectorXd& at(const std::string& video) const;
  const Eigen::VectorXd& row(std::size_t i) const { return scores_[i]; }

  /// Throws on duplicate ids or a class-count mismatch.
  void add(const std::string& video, Eigen::VectorXd scores);

 private:
  StreamId id_ = StreamId::other;
  Eigen::Index classes_ = 0;
  ScoreVector::Kind kind_ = ScoreVector::Kind::probabilities;
  std::vector<std::string> videos_;
  std::vector<Eigen::VectorXd> scores_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Per-class mean over snippet rows (P x C).
Eigen::VectorXd consensus(const Eigen::Ref<const Eigen::MatrixXd>& snippet_scores);

struct FusionWeights {
  double pose = 1.0;
  double spatial = 1.0;
  double temporal = 1.0;

  void validate() const;
};

struct FusionResult {
  StreamScores fused;
  std::vector<std::string> warnings;
};

/// Weighted sum w_p * pose + w_s * spatial + w_t * temporal per video and
/// class, on the scores as given. Absent streams contribute zero (with a
/// warning). Videos missing from some present stream are dropped with a
/// warning; no shared video at all is an error, as is a class-count mismatch.
FusionResult fuse(const StreamScores* pose, const StreamScores* spatial, const StreamScores* temporal,
                  const FusionWeights& weights);

struct Evaluation {
  double accuracy = 0.0;
  Eigen::VectorXd per_class;   // recall per true class (0 where a class has no videos)
  Eigen::VectorXi class_count;
  Eigen::MatrixXi confusion;   // rows: true class, cols: predicted class
  std::size_t videos = 0;
};

/// Argmax (lowest index on ties) against labels. Every scored video needs a
/// label in [0, classes).
Evaluation evaluate(const StreamScores& scores, const std::map<std::string, int>& labels);

/// One line of a subset ablation table.
struct SubsetAccuracy {
  std::string name;  // e.g. "pose+temporal"
  FusionWeights weights;
  double accuracy = 0.0;
};

/// Accuracy of every non-empty subset of the present streams (singles, pairs,
/// triple), each fused with the given weights restricted to the subset.
std::vector<SubsetAccuracy> subset_table(const StreamScores* pose, const StreamScores* spatial,
                                         const StreamScores* temporal, const FusionWeights& weights,
                                         const std::map<std::string, int>& labels);

struct WeightSearchResult {
  FusionWeights best;
  double best_accuracy = 0.0;
  std::vector<std::pair<FusionWeights, double>> evaluated;
};

/// Exhaustive search over `lattice`^3 (skipping the all-zero triple) on a
/// validation split. Ties keep the earliest candidate in (pose, spatial,
/// temporal) lexicographic lattice order, except that (1, 1, 1) wins any tie
/// it takes part in.
WeightSearchResult search_weights(const StreamScores* pose, const StreamScores* spatial,
                                  const StreamScores* temporal, const std::vector<double>& lattice,
                                  const std::map<std::string, int>& labels);

}  // namespace posestream
