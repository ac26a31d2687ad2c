#include "posestream/spatial_model.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/QR>

namespace posestream {

Eigen::Index feature_count(int degree) {
  switch (degree) {
    case 0: return 1;
    case 1: return 3;
    case 2: return 6;
    default: throw std::invalid_argument("spatial model degree must be 0, 1 or 2");
  }
}

Eigen::VectorXd polynomial_features(const Eigen::Vector2d& p, int degree) {
  Eigen::VectorXd f(feature_count(degree));
  f(0) = 1.0;
  if (degree >= 1) {
    f(1) = p.x();
    f(2) = p.y();
  }
  if (degree >= 2) {
    f(3) = p.x() * p.x();
    f(4) = p.x() * p.y();
    f(5) = p.y() * p.y();
  }
  return f;
}

Eigen::Vector2d PairModel::predict(const Eigen::Vector2d& source) const {
  if (degree == 0) return source + coefficients.row(0).transpose();
  return coefficients.transpose() * polynomial_features(source, degree);
}

SpatialModel::SpatialModel(std::size_t joints, int degree)
    : joints_(joints), degree_(degree), pairs_(joints * joints) {
  feature_count(degree);
}

namespace {

void fit_pair(PairModel& model, const Eigen::MatrixXd& src, const Eigen::MatrixXd& dst, int degree) {
  const Eigen::Index rows = src.rows();
  model.samples = static_cast<std::size_t>(rows);
  const Eigen::Index nf = feature_count(degree);

  if (degree > 0 && rows >= nf) {
    Eigen::MatrixXd design(rows, nf);
    for (Eigen::Index r = 0; r < rows; ++r) {
      design.row(r) = polynomial_features(src.row(r).transpose(), degree).transpose();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() == nf) {
      model.degree = degree;
      model.coefficients = qr.solve(dst);
      model.residual_rms = std::sqrt((design * model.coefficients - dst).squaredNorm() /
                                     static_cast<double>(rows));
      model.trained = true;
      return;
    }
  }

  model.degree = 0;
  model.coefficients = (dst - src).colwise().mean();
  model.residual_rms =
      std::sqrt(((dst - src).rowwise() - model.coefficients.row(0)).squaredNorm() / static_cast<double>(rows));
  model.trained = true;
}

}  // namespace

SpatialModel fit_spatial_model(std::span<const NormalizedPoseSequence> corpus, const SkeletonTopology& topology,
                               SpatialFitOptions options) {
  if (corpus.empty()) throw std::invalid_argument("fit_spatial_model: empty corpus");
  if (options.degree != 1 && options.degree != 2) {
    throw std::invalid_argument("fit_spatial_model: degree must be 1 or 2");
  }
  const auto n = static_cast<Eigen::Index>(topology.size());
  for (const auto& seq : corpus) {
    if (seq.joints() != n) throw std::invalid_argument("fit_spatial_model: joint count does not match topology");
  }

  SpatialModel model(topology.size(), options.degree);
  auto observed = [](const NormalizedPoseSequence& seq, Eigen::Index t, Eigen::Index j) {
    return seq.at(t, j) == JointState::visible;
  };
  auto usable = [](const NormalizedPoseSequence& seq, Eigen::Index t) {
    return seq.usable.empty() || seq.usable[static_cast<std::size_t>(t)];
  };

  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index t = 0; t < n; ++t) {
      if (s == t) continue;
      std::size_t rows = 0;
      for (const auto& seq : corpus) {
        for (Eigen::Index f = 0; f < seq.frames(); ++f) {
          rows += usable(seq, f) && observed(seq, f, s) && observed(seq, f, t);
        }
      }
      auto& pair = model.pair(static_cast<JointIndex>(s), static_cast<JointIndex>(t));
      if (rows < std::max<std::size_t>(options.min_samples, 1)) {
        pair.samples = rows;
        continue;
      }
      Eigen::MatrixXd src(static_cast<Eigen::Index>(rows), 2);
      Eigen::MatrixXd dst(static_cast<Eigen::Index>(rows), 2);
      Eigen::Index r = 0;
      for (const auto& seq : corpus) {
        for (Eigen::Index f = 0; f < seq.frames(); ++f) {
          if (!(usable(seq, f) && observed(seq, f, s) && observed(seq, f, t))) continue;
          src.row(r) = seq.point(f, s).transpose();
          dst.row(r) = seq.point(f, t).transpose();
          ++r;
        }
      }
      fit_pair(pair, src, dst, options.degree);
    }
  }
  return model;
}

std::vector<JointIndex> select_voters(const SkeletonTopology& topology, JointIndex target,
                                      const std::vector<bool>& present) {
  std::vector<JointIndex> voters;
  auto collect = [&](auto&& predicate) {
    for (JointIndex j = 0; j < present.size(); ++j) {
      if (j != target && present[j] && predicate(j)) voters.push_back(j);
    }
  };
  const int part = topology.part(target);
  if (part >= 1 && part <= 4) {
    collect([&](JointIndex j) { return topology.part(j) == part; });
    if (!voters.empty()) return voters;
  }
  if (topology.is_upper_body(target)) {
    collect([&](JointIndex j) { return topology.part(j) == 5; });
    if (!voters.empty()) return voters;
  }
  collect([](JointIndex) { return true; });
  return voters;
}

NormalizedPoseSequence spatial_interpolate(const NormalizedPoseSequence& pose, const SpatialModel& model,
                                           const SkeletonTopology& topology) {
  const auto n = static_cast<std::size_t>(pose.joints());
  if (n != topology.size() || model.joints() != n) {
    throw std::invalid_argument("spatial_interpolate: pose, model and topology disagree on joint count");
  }
  NormalizedPoseSequence out = pose;
  std::vector<bool> present(n);
  for (Eigen::Index t = 0; t < pose.frames(); ++t) {
    if (!pose.usable.empty() && !pose.usable[static_cast<std::size_t>(t)]) continue;
    bool any_missing = false;
    for (std::size_t j = 0; j < n; ++j) {
      present[j] = pose.present(t, static_cast<Eigen::Index>(j));
      any_missing |= !present[j];
    }
    if (!any_missing) continue;

    for (JointIndex j = 0; j < n; ++j) {
      if (present[j]) continue;
      Eigen::Vector2d sum = Eigen::Vector2d::Zero();
      int votes = 0;
      for (JointIndex v : select_voters(topology, j, present)) {
        const auto& pm = model.pair(v, j);
        if (!pm.trained) continue;
        sum += pm.predict(pose.point(t, v));
        ++votes;
      }
      if (votes > 0) {
        out.set_point(t, j, sum / votes);
        out.at(t, j) = JointState::spatial;
      } else {
        out.set_point(t, j, Eigen::Vector2d::Zero());
        out.at(t, j) = JointState::synthetic;
      }
    }
  }
  return out;
}

}  // namespace posestream
