#include "featloc/vo/essential.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "featloc/common/error.hpp"
#include "featloc/common/random.hpp"

namespace featloc {
namespace {

constexpr double kRank3Ratio = 1e-6;

/// Similarity moving the centroid to the origin with mean distance sqrt(2).
Eigen::Matrix3d hartley_transform(std::span<const Eigen::Vector3d> x) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : x) centroid += p.hnormalized();
  centroid /= static_cast<double>(x.size());
  double mean_dist = 0.0;
  for (const auto& p : x) mean_dist += (p.hnormalized() - centroid).norm();
  mean_dist /= static_cast<double>(x.size());
  const double s = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d t;
  t << s, 0.0, -s * centroid.x(), 0.0, s, -s * centroid.y(), 0.0, 0.0, 1.0;
  return t;
}

Eigen::Matrix3d project_to_essential(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal() * svd.matrixV().transpose();
}

struct EightPointFit {
  Eigen::Matrix3d e;
  /// sigma_8 / sigma_1 of the normalised design matrix.
  double conditioning;
};

EightPointFit fit_eight_point(std::span<const Eigen::Vector3d> x1, std::span<const Eigen::Vector3d> x2) {
  const Eigen::Matrix3d t1 = hartley_transform(x1);
  const Eigen::Matrix3d t2 = hartley_transform(x2);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(x1.size()), 9);
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const Eigen::Vector3d p = t1 * x1[i] / x1[i].z();
    const Eigen::Vector3d q = t2 * x2[i] / x2[i].z();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) a(static_cast<Eigen::Index>(i), 3 * r + c) = p(r) * q(c);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  const Eigen::VectorXd v = svd.matrixV().col(8);
  Eigen::Matrix3d en;
  en << v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7), v(8);
  const double cond = s.size() >= 8 && s(0) > 0.0 ? s(7) / s(0) : 0.0;
  return {project_to_essential(t1.transpose() * en * t2), cond};
}

std::vector<Eigen::Vector3d> normalize_all(std::span<const Match2D2D> matches, const CameraIntrinsics& k,
                                           bool first) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(matches.size());
  for (const auto& m : matches) out.push_back(k.normalized(first ? m.p1 : m.p2));
  return out;
}

Eigen::Matrix3d align_bearings(std::span<const Eigen::Vector3d> x1, std::span<const Eigen::Vector3d> x2) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < x1.size(); ++i) m += x1[i].normalized() * x2[i].normalized().transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

}  // namespace

Eigen::Matrix3d essential_from_motion(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& t) {
  return skew(t) * rotation;
}

double epipolar_residual(const Eigen::Matrix3d& e, const Eigen::Vector3d& x1, const Eigen::Vector3d& x2) {
  const Eigen::Vector3d a = x1 / x1.z();
  const Eigen::Vector3d b = x2 / x2.z();
  const double err = a.dot(e * b);
  const Eigen::Vector3d line1 = e * b;              // epipolar line in image 1
  const Eigen::Vector3d line2 = e.transpose() * a;  // epipolar line in image 2
  const double n1 = line1.head<2>().squaredNorm();
  const double n2 = line2.head<2>().squaredNorm();
  if (n1 <= 0.0 || n2 <= 0.0) return err == 0.0 ? 0.0 : std::abs(err) * 1e300;
  return std::abs(err) * std::sqrt(1.0 / n1 + 1.0 / n2);
}

Eigen::Matrix3d eight_point(std::span<const Eigen::Vector3d> x1, std::span<const Eigen::Vector3d> x2) {
  if (x1.size() != x2.size()) throw InvalidArgument("point lists differ in length");
  if (x1.size() < 8) throw InsufficientData("the 8-point solver needs at least 8 correspondences");
  return fit_eight_point(x1, x2).e;
}

EssentialResult estimate_essential(std::span<const Match2D2D> matches, const CameraIntrinsics& k,
                                   const VoConfig& cfg) {
  if (matches.size() < 8) throw InsufficientData("essential matrix estimation needs at least 8 matches");
  if (!(cfg.inlier_threshold > 0.0) || cfg.ransac_iters <= 0) throw InvalidArgument("bad VO configuration");
  const auto x1 = normalize_all(matches, k, true);
  const auto x2 = normalize_all(matches, k, false);
  const std::size_t n = matches.size();

  auto consensus = [&](const Eigen::Matrix3d& e) {
    std::vector<std::size_t> inliers;
    for (std::size_t i = 0; i < n; ++i) {
      if (epipolar_residual(e, x1[i], x2[i]) < cfg.inlier_threshold) inliers.push_back(i);
    }
    return inliers;
  };

  // MSAC: hypotheses are ranked by the truncated quadratic cost
  // sum_i min(r_i^2, T^2) rather than by inlier count, so a model bent by a
  // contaminated sample cannot win by sweeping in a few chance outliers.
  const double t_sq = cfg.inlier_threshold * cfg.inlier_threshold;
  StreamRng rng(cfg.seed, 0x72616e736163ULL);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> best_inliers;
  double best_cost = std::numeric_limits<double>::infinity();
  std::array<Eigen::Vector3d, 8> s1, s2;
  std::array<std::size_t, 8> sample{};
  std::vector<std::size_t> inliers;
  inliers.reserve(n);
  for (int it = 0; it < cfg.ransac_iters; ++it) {
    std::sample(all.begin(), all.end(), sample.begin(), 8, rng);
    for (int j = 0; j < 8; ++j) {
      s1[j] = x1[sample[j]];
      s2[j] = x2[sample[j]];
    }
    const Eigen::Matrix3d e = fit_eight_point(s1, s2).e;
    double cost = 0.0;
    inliers.clear();
    for (std::size_t i = 0; i < n && cost < best_cost; ++i) {
      const double r = epipolar_residual(e, x1[i], x2[i]);
      if (r < cfg.inlier_threshold) {
        cost += r * r;
        inliers.push_back(i);
      } else {
        cost += t_sq;
      }
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_inliers = inliers;
    }
    if (static_cast<double>(best_inliers.size()) > cfg.early_exit_fraction * static_cast<double>(n)) break;
  }
  if (best_inliers.size() < 8 || best_inliers.size() < static_cast<std::size_t>(cfg.min_inliers)) {
    throw EstimationFailed("RANSAC consensus below the minimum inlier count");
  }

  auto gather = [&](const std::vector<std::size_t>& idx, const std::vector<Eigen::Vector3d>& x) {
    std::vector<Eigen::Vector3d> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(x[i]);
    return out;
  };

  EssentialResult result;
  EightPointFit fit = fit_eight_point(gather(best_inliers, x1), gather(best_inliers, x2));
  result.inliers = consensus(fit.e);
  if (result.inliers.size() >= 8 && result.inliers != best_inliers) {
    fit = fit_eight_point(gather(result.inliers, x1), gather(result.inliers, x2));
  } else if (result.inliers.size() < 8) {
    result.inliers = best_inliers;
  }
  if (result.inliers.size() < static_cast<std::size_t>(cfg.min_inliers)) {
    throw EstimationFailed("refit consensus below the minimum inlier count");
  }
  result.e = fit.e;

  const auto in1 = gather(result.inliers, x1);
  const auto in2 = gather(result.inliers, x2);
  if (fit.conditioning < cfg.parallax_ratio) {
    result.zero_parallax = true;
    result.motion.rotation = align_bearings(in1, in2);
    result.motion.t_unit = Eigen::Vector3d::UnitZ();
    return result;
  }

  const auto candidates = decompose_essential(result.e);
  const auto votes = cheirality_votes(candidates, in1, in2);
  const auto best = std::max_element(votes.begin(), votes.end()) - votes.begin();
  if (votes[best] == 0 || std::count(votes.begin(), votes.end(), votes[best]) > 1) {
    throw AmbiguousCheirality("no unique motion candidate in front of both cameras");
  }
  result.motion = candidates[best];
  return result;
}

std::array<RelativeMotion, 4> decompose_essential(const Eigen::Matrix3d& e) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d s = svd.singularValues();
  if (!(s(0) > 0.0) || s(2) / s(0) > kRank3Ratio) {
    throw InvalidArgument("matrix is not rank 2 and cannot be an essential matrix");
  }
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  if (u.determinant() < 0.0) u = -u;
  if (v.determinant() < 0.0) v = -v;
  Eigen::Matrix3d w;
  w << 0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0;
  const Eigen::Matrix3d ra = u * w * v.transpose();
  const Eigen::Matrix3d rb = u * w.transpose() * v.transpose();
  const Eigen::Vector3d t = u.col(2).normalized();
  return {RelativeMotion{ra, t}, RelativeMotion{ra, -t}, RelativeMotion{rb, t}, RelativeMotion{rb, -t}};
}

std::array<int, 4> cheirality_votes(const std::array<RelativeMotion, 4>& candidates,
                                    std::span<const Eigen::Vector3d> x1, std::span<const Eigen::Vector3d> x2) {
  std::array<int, 4> votes{};
  const Pose first = Pose::identity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    // Camera 2 expressed as a world(=camera 1)->camera 2 transform.
    const Pose second = Pose(candidates[c].rotation, candidates[c].t_unit).inverse();
    for (std::size_t i = 0; i < x1.size(); ++i) {
      try {
        const Eigen::Vector3d x = triangulate_normalized(x1[i], x2[i], first, second);
        if (x.z() > 0.0 && (second * x).z() > 0.0) ++votes[c];
      } catch (const DegenerateGeometry&) {
        // A ray along the baseline gives no vote to anyone.
      }
    }
  }
  return votes;
}

RelativeMotion select_pose_cheirality(const std::array<RelativeMotion, 4>& candidates,
                                      std::span<const Match2D2D> inliers, const CameraIntrinsics& k) {
  if (inliers.empty()) throw InsufficientData("cheirality selection needs at least one inlier");
  const auto x1 = normalize_all(inliers, k, true);
  const auto x2 = normalize_all(inliers, k, false);
  const auto votes = cheirality_votes(candidates, x1, x2);
  const auto best = std::max_element(votes.begin(), votes.end()) - votes.begin();
  if (votes[best] == 0 || std::count(votes.begin(), votes.end(), votes[best]) > 1) {
    throw AmbiguousCheirality("no unique motion candidate in front of both cameras");
  }
  return candidates[best];
}

}  // namespace featloc
