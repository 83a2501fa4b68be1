#include "featloc/harness/descriptor_benchmark.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "featloc/common/error.hpp"
#include "featloc/common/random.hpp"

namespace featloc {
namespace {

Eigen::VectorXd descriptor_at(const DescriptorImage& img, const Eigen::Vector2d& p) {
  const auto px = img.at(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())));
  Eigen::VectorXd v(px.size());
  for (std::size_t c = 0; c < px.size(); ++c) v(c) = px[c];
  return v;
}

}  // namespace

DescriptorBenchmarkRow benchmark_descriptor_dim(const ExperimentConfig& cfg, int dim,
                                                const DescriptorBenchmarkOptions& options, std::uint64_t seed) {
  if (dim < 1) throw InvalidArgument("descriptor dimension must be positive");
  if (options.frame_pairs < 1 || options.frame_gap < 1 || options.points_per_pair < 1) {
    throw InvalidArgument("invalid benchmark options");
  }
  WorldSpec spec = cfg.world;
  spec.field.dim = dim;
  const World world(spec);
  TrajectorySpec traj = cfg.test;
  traj.frames = options.frame_pairs * (options.frame_gap + 1);
  const std::vector<Pose> poses = synth_trajectory(world, traj);
  const CameraIntrinsics& k = spec.camera;

  std::vector<DescriptorPair> matches, nonmatches;
  double sq_sum = 0.0;
  std::vector<double> medians;
  DescriptorBenchmarkRow row;
  row.dim = dim;
  for (int p = 0; p < options.frame_pairs; ++p) {
    const std::size_t a = static_cast<std::size_t>(p * (options.frame_gap + 1));
    const std::size_t b = a + options.frame_gap;
    const DepthImage da = world.render_depth(k, poses[a]);
    const DepthImage db = world.render_depth(k, poses[b]);
    const DescriptorImage fa = world.observe(k, poses[a], da, cfg.obs_noise_sigma, seed, a);
    const DescriptorImage fb = world.observe(k, poses[b], db, cfg.obs_noise_sigma, seed, b);

    StreamRng rng(seed, 0x70747300ULL, static_cast<std::uint64_t>(p));
    std::vector<Eigen::Vector3d> points;
    for (int tries = 0; static_cast<int>(points.size()) < options.points_per_pair && tries < 50 * options.points_per_pair;
         ++tries) {
      const int u = static_cast<int>(rng.uniform() * k.width);
      const int v = static_cast<int>(rng.uniform() * k.height);
      const double z = da(u, v);
      if (!(z > 0.0)) continue;
      points.push_back(backproject({u + 0.5, v + 0.5}, z, k, poses[a]));
    }
    CorrespondenceOptions copt;
    copt.seed = hash_combine(seed, static_cast<std::uint64_t>(p));
    const CorrespondenceSet pairs = generate_correspondences(points, {k, poses[a], &da}, {k, poses[b], &db}, copt);
    for (const auto& c : pairs) {
      if (c.label == PairLabel::kIgnore) continue;
      auto& dst = c.label == PairLabel::kMatch ? matches : nonmatches;
      dst.emplace_back(descriptor_at(fa, c.p1), descriptor_at(fb, c.p2));
    }
    const DenseMatchStats dense = dense_match_eval(fa, fb, pairs, options.window_radius);
    sq_sum += dense.rmse_px * dense.rmse_px * static_cast<double>(dense.evaluated);
    row.evaluated += dense.evaluated;
    if (dense.evaluated > 0) medians.push_back(dense.p50_px);
  }
  if (row.evaluated == 0 || nonmatches.empty()) throw InsufficientData("no visible correspondences");
  row.distances = distance_stats(matches, nonmatches);
  row.dense_rmse_px = std::sqrt(sq_sum / static_cast<double>(row.evaluated));
  row.dense_p50_px = percentile(medians, 50.0);
  row.matches = matches.size();
  row.nonmatches = nonmatches.size();
  return row;
}

void save_descriptor_benchmark_csv(const std::vector<DescriptorBenchmarkRow>& rows,
                                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "dim,mean_match_distance,mean_nonmatch_distance,overlap,dense_rmse_px,dense_p50_px,evaluated,matches,"
         "nonmatches\n";
  out << std::setprecision(8);
  for (const auto& r : rows) {
    out << r.dim << ',' << r.distances.mean_match << ',' << r.distances.mean_nonmatch << ',' << r.distances.overlap
        << ',' << r.dense_rmse_px << ',' << r.dense_p50_px << ',' << r.evaluated << ',' << r.matches << ','
        << r.nonmatches << '\n';
  }
}

}  // namespace featloc
