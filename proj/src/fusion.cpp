#include "posestream/fusion.hpp"

#include <array>
#include <stdexcept>

namespace posestream {

std::string_view stream_name(StreamId id) {
  switch (id) {
    case StreamId::pose: return "pose";
    case StreamId::spatial: return "spatial";
    case StreamId::temporal: return "temporal";
    case StreamId::other: return "other";
  }
  return "other";
}

StreamId parse_stream(std::string_view name) {
  if (name == "pose") return StreamId::pose;
  if (name == "spatial" || name == "rgb") return StreamId::spatial;
  if (name == "temporal" || name == "flow") return StreamId::temporal;
  return StreamId::other;
}

const Eigen::VectorXd& StreamScores::at(const std::string& video) const {
  const auto it = index_.find(video);
  if (it == index_.end()) throw std::out_of_range("no scores for video " + video);
  return scores_[it->second];
}

void StreamScores::add(const std::string& video, Eigen::VectorXd scores) {
  if (classes_ == 0) classes_ = scores.size();
  if (scores.size() != classes_) {
    throw std::invalid_argument("video " + video + " has " + std::to_string(scores.size()) + " class scores, stream has " +
                                std::to_string(classes_));
  }
  if (!index_.emplace(video, videos_.size()).second) throw std::invalid_argument("duplicate video id " + video);
  videos_.push_back(video);
  scores_.push_back(std::move(scores));
}

Eigen::VectorXd consensus(const Eigen::Ref<const Eigen::MatrixXd>& snippet_scores) {
  if (snippet_scores.rows() == 0 || snippet_scores.cols() == 0) {
    throw std::invalid_argument("consensus: empty snippet score matrix");
  }
  return snippet_scores.colwise().mean().transpose();
}

void FusionWeights::validate() const {
  if (pose == 0.0 && spatial == 0.0 && temporal == 0.0) {
    throw std::invalid_argument("fusion weights: at least one weight must be nonzero");
  }
}

FusionResult fuse(const StreamScores* pose, const StreamScores* spatial, const StreamScores* temporal,
                  const FusionWeights& weights) {
  weights.validate();
  FusionResult result;
  const std::array<std::pair<const StreamScores*, double>, 3> streams{
      {{pose, weights.pose}, {spatial, weights.spatial}, {temporal, weights.temporal}}};
  const std::array<const char*, 3> names{"pose", "spatial", "temporal"};

  const StreamScores* lead = nullptr;
  for (std::size_t i = 0; i < streams.size(); ++i) {
    if (streams[i].first == nullptr) {
      result.warnings.push_back(std::string(names[i]) + " stream absent; contributes zero");
      continue;
    }
    if (lead == nullptr) {
      lead = streams[i].first;
    } else if (streams[i].first->classes() != lead->classes()) {
      throw std::invalid_argument("fuse: class count mismatch (" + std::to_string(lead->classes()) + " vs " +
                                  std::to_string(streams[i].first->classes()) + ")");
    } else if (streams[i].first->kind() != lead->kind()) {
      result.warnings.push_back("streams mix logits and probabilities; summing as given");
    }
  }
  if (lead == nullptr) throw std::invalid_argument("fuse: no stream given");

  result.fused = StreamScores(StreamId::other, lead->classes());
  result.fused.set_kind(lead->kind());
  std::size_t dropped = 0;
  for (const auto& video : lead->videos()) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(lead->classes());
    bool complete = true;
    for (const auto& [stream, w] : streams) {
      if (stream == nullptr) continue;
      if (!stream->contains(video)) {
        complete = false;
        break;
      }
      sum += w * stream->at(video);
    }
    if (complete) {
      result.fused.add(video, std::move(sum));
    } else {
      ++dropped;
    }
  }
  std::size_t extra = 0;
  for (const auto& [stream, w] : streams) {
    if (stream == nullptr || stream == lead) continue;
    for (const auto& video : stream->videos()) extra += !lead->contains(video);
  }
  if (result.fused.empty()) throw std::invalid_argument("fuse: streams share no video ids");
  if (dropped + extra > 0) {
    result.warnings.push_back(std::to_string(dropped + extra) +
                              " video entries are not scored by every stream and were left out");
  }
  return result;
}

Evaluation evaluate(const StreamScores& scores, const std::map<std::string, int>& labels) {
  if (scores.empty()) throw std::invalid_argument("evaluate: no scored videos");
  const Eigen::Index c = scores.classes();
  Evaluation ev;
  ev.confusion = Eigen::MatrixXi::Zero(c, c);
  ev.class_count = Eigen::VectorXi::Zero(c);
  ev.per_class = Eigen::VectorXd::Zero(c);
  ev.videos = scores.size();

  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& video = scores.videos()[i];
    const auto it = labels.find(video);
    if (it == labels.end()) throw std::invalid_argument("evaluate: no label for video " + video);
    const int truth = it->second;
    if (truth < 0 || truth >= c) throw std::invalid_argument("evaluate: label out of range for video " + video);
    const ScoreVector sv{scores.row(i), scores.kind()};
    const auto predicted = sv.argmax();
    ev.confusion(truth, predicted) += 1;
    ev.class_count(truth) += 1;
    correct += predicted == truth;
  }
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(scores.size());
  for (Eigen::Index k = 0; k < c; ++k) {
    if (ev.class_count(k) > 0) ev.per_class(k) = static_cast<double>(ev.confusion(k, k)) / ev.class_count(k);
  }
  return ev;
}

std::vector<SubsetAccuracy> subset_table(const StreamScores* pose, const StreamScores* spatial,
                                         const StreamScores* temporal, const FusionWeights& weights,
                                         const std::map<std::string, int>& labels) {
  const std::array<const StreamScores*, 3> streams{pose, spatial, temporal};
  const std::array<const char*, 3> names{"pose", "spatial", "temporal"};
  const std::array<double, 3> w{weights.pose, weights.spatial, weights.temporal};

  std::vector<SubsetAccuracy> table;
  // Singles first, then pairs, then the triple.
  for (int size = 1; size <= 3; ++size) {
    for (unsigned mask = 1; mask < 8; ++mask) {
      if (std::popcount(mask) != size) continue;
      bool available = true;
      for (int i = 0; i < 3; ++i) available = available && (!(mask & (1u << i)) || streams[i] != nullptr);
      if (!available) continue;

      FusionWeights sub{mask & 1u ? w[0] : 0.0, mask & 2u ? w[1] : 0.0, mask & 4u ? w[2] : 0.0};
      if (sub.pose == 0.0 && sub.spatial == 0.0 && sub.temporal == 0.0) continue;
      std::string name;
      for (int i = 0; i < 3; ++i) {
        if (!(mask & (1u << i))) continue;
        if (!name.empty()) name += "+";
        name += names[i];
      }
      const auto fused = fuse(mask & 1u ? pose : nullptr, mask & 2u ? spatial : nullptr,
                              mask & 4u ? temporal : nullptr, sub);
      table.push_back({name, sub, evaluate(fused.fused, labels).accuracy});
    }
  }
  return table;
}

WeightSearchResult search_weights(const StreamScores* pose, const StreamScores* spatial, const StreamScores* temporal,
                                  const std::vector<double>& lattice, const std::map<std::string, int>& labels) {
  if (lattice.empty()) throw std::invalid_argument("weight search: empty lattice");
  WeightSearchResult result;
  bool have_best = false;
  for (double wp : lattice) {
    for (double ws : lattice) {
      for (double wt : lattice) {
        const FusionWeights w{pose ? wp : 0.0, spatial ? ws : 0.0, temporal ? wt : 0.0};
        if (w.pose == 0.0 && w.spatial == 0.0 && w.temporal == 0.0) continue;
        if ((!pose && wp != lattice.front()) || (!spatial && ws != lattice.front()) ||
            (!temporal && wt != lattice.front())) {
          continue;
        }
        const double acc = evaluate(fuse(pose, spatial, temporal, w).fused, labels).accuracy;
        result.evaluated.emplace_back(w, acc);
        const bool is_default = w.pose == 1.0 && w.spatial == 1.0 && w.temporal == 1.0;
        if (!have_best || acc > result.best_accuracy || (acc == result.best_accuracy && is_default)) {
          result.best = w;
          result.best_accuracy = acc;
          have_best = true;
        }
      }
    }
  }
  if (!have_best) throw std::invalid_argument("weight search: lattice has no nonzero candidate");
  return result;
}

}  // namespace posestream
