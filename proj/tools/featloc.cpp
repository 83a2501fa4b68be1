// Command-line front end: synthetic worlds, map building, imagined views,
// localisation runs, descriptor evaluation, odometry and timing reports.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "featloc/common/error.hpp"
#include "featloc/featmap/map_io.hpp"
#include "featloc/featmap/render.hpp"
#include "featloc/harness/config.hpp"
#include "featloc/harness/descriptor_benchmark.hpp"
#include "featloc/harness/experiment.hpp"
#include "featloc/harness/pose_io.hpp"
#include "featloc/vo/visual_odometry.hpp"

namespace fs = std::filesystem;
using namespace featloc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

/// --config file plus repeated --set key=value overrides.
struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", path, "key = value experiment config")->check(CLI::ExistingFile);
    app->add_option("-s,--set", overrides, "override a config key (key=value), repeatable");
  }

  ExperimentConfig load() const {
    KeyValueConfig kv = path.empty() ? KeyValueConfig{} : KeyValueConfig::load(path);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos || eq == 0) throw InvalidArgument("--set expects key=value, got '" + o + "'");
      kv.set(o.substr(0, eq), o.substr(eq + 1));
    }
    return experiment_from_config(kv);
  }
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

std::vector<double> parse_list(const std::string& text, char sep = ',') {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw InvalidArgument("not a number list: '" + text + "'");
    }
  }
  return out;
}

void write_depth_pgm(const DepthImage& depth, const fs::path& path) {
  double max_depth = 0.0;
  for (double d : depth.data) {
    if (d > 0.0 && std::isfinite(d)) max_depth = std::max(max_depth, d);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P5\n" << depth.width << ' ' << depth.height << "\n255\n";
  for (double d : depth.data) {
    const bool ok = d > 0.0 && std::isfinite(d) && max_depth > 0.0;
    out.put(static_cast<char>(ok ? static_cast<unsigned char>(std::lround(255.0 * (1.0 - d / max_depth) * 0.9 + 25.0)) : 0));
  }
}

nlohmann::json run_summary(const RunReport& r, const ExperimentConfig& cfg, std::uint64_t seed) {
  nlohmann::json j;
  j["seed"] = seed;
  j["frames"] = r.frames.size();
  j["particles"] = cfg.particles;
  j["voxel_size"] = cfg.voxel_size;
  j["ate_rmse_m"] = r.filter.translation_rmse;
  j["rotation_rmse_rad"] = r.filter.rotation_rmse;
  j["odometry_ate_rmse_m"] = r.odometry.translation_rmse;
  j["odometry_rotation_rmse_rad"] = r.odometry.rotation_rmse;
  j["reset_frame"] = r.reset_frame;
  j["convergence_frame"] = r.convergence_frame;
  j["convergence_radius_m"] = cfg.effective_convergence_radius();
  return j;
}

int cmd_synth(const ConfigArgs& args, const std::string& out_dir, int dump_frames) {
  const ExperimentConfig cfg = args.load();
  const World world(cfg.world);
  const auto mapping = synth_trajectory(world, cfg.mapping);
  const auto test = synth_trajectory(world, cfg.test);
  ensure_dir(out_dir);
  save_kitti_poses(mapping, fs::path(out_dir) / "mapping_poses.txt");
  save_kitti_poses(test, fs::path(out_dir) / "test_poses.txt");

  nlohmann::json j;
  j["half_extent"] = {cfg.world.half_x, cfg.world.half_y};
  j["wall_height"] = cfg.world.wall_height;
  j["descriptor_dim"] = cfg.world.field.dim;
  j["camera"] = {{"fx", cfg.world.camera.fx}, {"fy", cfg.world.camera.fy}, {"cx", cfg.world.camera.cx},
                 {"cy", cfg.world.camera.cy}, {"width", cfg.world.camera.width}, {"height", cfg.world.camera.height}};
  for (const auto& b : world.boxes()) {
    j["boxes"].push_back({{"min", {b.min.x(), b.min.y(), b.min.z()}}, {"max", {b.max.x(), b.max.y(), b.max.z()}}});
  }
  std::ofstream(fs::path(out_dir) / "world.json") << j.dump(2) << '\n';

  for (int i = 0; i < std::min<int>(dump_frames, static_cast<int>(test.size())); ++i) {
    const auto& k = cfg.world.camera;
    const DepthImage depth = world.render_depth(k, test[i]);
    const DescriptorImage desc = world.observe(k, test[i], depth, cfg.obs_noise_sigma, cfg.seed, i);
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04d", i);
    save_fdesc(desc, fs::path(out_dir) / (std::string(name) + ".fdesc"));
    write_depth_pgm(depth, fs::path(out_dir) / (std::string(name) + "_depth.pgm"));
  }
  std::cout << "world: " << world.boxes().size() << " boxes; mapping " << mapping.size() << " poses, test "
            << test.size() << " poses -> " << out_dir << '\n';
  return kExitOk;
}

int cmd_build_map(const ConfigArgs& args, const std::string& out) {
  const ExperimentConfig cfg = args.load();
  const World world(cfg.world);
  const auto mapping = synth_trajectory(world, cfg.mapping);
  const VoxelMap map = build_map_pipeline(world, mapping, cfg.voxel_size, cfg.map_noise_sigma, cfg.map_seed);
  save_map(map, out);
  std::cout << "map: " << map.size() << " voxels of " << cfg.voxel_size << " m, n = " << map.descriptor_dim()
            << " -> " << out << '\n';
  return kExitOk;
}

int cmd_imagine(const ConfigArgs& args, const std::string& map_path, const std::string& pose_text,
                const std::string& poses_path, int frame, const std::string& prefix) {
  const ExperimentConfig cfg = args.load();
  const VoxelMap map = load_map(map_path);
  Pose pose;
  if (!pose_text.empty()) {
    const auto v = parse_list(pose_text);
    if (v.size() < 4 || v.size() > 6) throw InvalidArgument("--pose expects x,y,z,yaw[,pitch[,roll]]");
    pose = camera_pose_from_heading({v[0], v[1], v[2]}, v[3], v.size() > 4 ? v[4] : 0.0, v.size() > 5 ? v[5] : 0.0);
  } else if (!poses_path.empty()) {
    const auto poses = load_kitti_poses(poses_path);
    if (frame < 0 || frame >= static_cast<int>(poses.size())) throw InvalidArgument("--frame out of range");
    pose = poses[frame];
  } else {
    throw InvalidArgument("give --pose or --poses");
  }
  const ImaginedView view = render_imagined(map, cfg.world.camera, pose);
  save_fdesc(view.descriptors, prefix + ".fdesc");
  write_descriptor_ppm(view.descriptors, view.valid, prefix + ".ppm");
  DepthImage depth = view.depth;
  write_depth_pgm(depth, prefix + "_depth.pgm");
  std::cout << "imagined view: " << view.valid_count << " of " << view.valid.size() << " pixels covered -> "
            << prefix << ".{ppm,fdesc}\n";
  return kExitOk;
}

struct LocalizeArgs {
  std::string map;
  std::string frames;
  std::string vo = "internal";
  std::optional<std::size_t> particles;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string diag;
  std::string truth_out;
  std::string odometry_out;
  std::string summary;
  std::string init_pose;
};

std::vector<DescriptorImage> load_frame_list(const fs::path& list) {
  std::ifstream in(list);
  if (!in) throw DataError("cannot open " + list.string());
  std::vector<DescriptorImage> frames;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    fs::path p = line;
    if (p.is_relative()) p = list.parent_path() / p;
    frames.push_back(load_fdesc(p));
  }
  return frames;
}

int cmd_localize(const ConfigArgs& args, const LocalizeArgs& la) {
  ExperimentConfig cfg = args.load();
  if (la.seed) cfg.seed = *la.seed;
  if (la.particles) {
    if (*la.particles == 0) throw InvalidArgument("--particles must be positive");
    cfg.particles = *la.particles;
  }
  std::optional<std::vector<Twist>> given;
  if (la.vo == "oracle") {
    cfg.vo_mode = VoMode::kOracle;
  } else if (la.vo != "internal") {
    given = load_twists(la.vo);
  }

  // Recorded frames: a text file listing FDESC1 images.
  const bool recorded = !la.frames.empty() && !std::all_of(la.frames.begin(), la.frames.end(), ::isdigit);
  if (recorded) {
    if (la.map.empty()) throw InvalidArgument("recorded frames need --map");
    if (!given) throw InvalidArgument("recorded frames need --vo <twist file>");
    const VoxelMap map = load_map(la.map);
    const auto frames = load_frame_list(la.frames);
    InitRegion init = global_region(cfg);
    if (!la.init_pose.empty()) {
      const auto v = parse_list(la.init_pose);
      if (v.size() != 4) throw InvalidArgument("--init-pose expects x,y,z,yaw");
      HeadingGaussian g;
      g.position_mean = {v[0], v[1], v[2]};
      g.position_sigma = {cfg.init_position_sigma, cfg.init_position_sigma, 0.0};
      g.angles_mean = {v[3], cfg.test.pitch, 0.0};
      g.angles_sigma = {cfg.init_yaw_sigma, 0.0, 0.0};
      init = g;
    }
    const SequenceResult r = localize_sequence(map, cfg.camera(), frames, *given, cfg, init, cfg.seed);
    save_kitti_poses(r.estimates, la.out);
    if (!la.diag.empty()) save_sequence_diagnostics_csv(r, la.diag);
    std::cout << "localised " << r.estimates.size() << " frames -> " << la.out << '\n';
    return kExitOk;
  }

  if (!la.frames.empty()) cfg.test.frames = std::stoi(la.frames);
  const World world(cfg.world);
  const auto test = synth_trajectory(world, cfg.test);
  const VoxelMap map = la.map.empty()
                           ? build_map_pipeline(world, synth_trajectory(world, cfg.mapping), cfg.voxel_size,
                                                cfg.map_noise_sigma, cfg.map_seed)
                           : load_map(la.map);
  std::vector<Twist> padded;
  if (given) {
    // Accept one twist per frame or per consecutive pair.
    padded = *given;
    if (padded.size() + 1 == test.size()) padded.insert(padded.begin(), Twist{});
  }
  const RunReport report = run_localization(world, map, test, cfg, cfg.seed, given ? &padded : nullptr);

  save_kitti_poses(report.estimates(), la.out);
  if (!la.diag.empty()) save_diagnostics_csv(report, la.diag);
  if (!la.truth_out.empty()) save_kitti_poses(report.truths(), la.truth_out);
  if (!la.odometry_out.empty()) save_kitti_poses(report.odometry_poses(), la.odometry_out);
  if (!la.summary.empty()) std::ofstream(la.summary) << run_summary(report, cfg, cfg.seed).dump(2) << '\n';

  std::cout << std::fixed << std::setprecision(4) << "filter   ATE " << report.filter.translation_rmse
            << " m, rotation " << report.filter.rotation_rmse << " rad\n"
            << "odometry ATE " << report.odometry.translation_rmse << " m, rotation "
            << report.odometry.rotation_rmse << " rad\n"
            << "converged at frame " << report.convergence_frame << '\n';
  return kExitOk;
}

int cmd_eval_desc(const ConfigArgs& args, const std::string& dims_text, const std::string& out, int pairs) {
  const ExperimentConfig cfg = args.load();
  DescriptorBenchmarkOptions opt;
  opt.frame_pairs = pairs;
  std::vector<DescriptorBenchmarkRow> rows;
  for (double d : parse_list(dims_text)) {
    if (d < 1 || d != std::floor(d)) throw InvalidArgument("dimensions must be positive integers");
    rows.push_back(benchmark_descriptor_dim(cfg, static_cast<int>(d), opt, cfg.seed));
  }
  if (!out.empty()) save_descriptor_benchmark_csv(rows, out);
  std::printf("%5s %12s %12s %9s %12s\n", "dim", "d(match)", "d(non)", "overlap", "rmse_px");
  for (const auto& r : rows) {
    std::printf("%5d %12.4f %12.4f %9.4f %12.4f\n", r.dim, r.distances.mean_match, r.distances.mean_nonmatch,
                r.distances.overlap, r.dense_rmse_px);
  }
  return kExitOk;
}

int cmd_vo(const ConfigArgs& args, const std::string& matches_path, const std::string& camera_text,
           const std::string& out) {
  const ExperimentConfig cfg = args.load();
  if (!matches_path.empty()) {
    CameraIntrinsics k = cfg.world.camera.scaled(cfg.vo_camera_scale);
    if (!camera_text.empty()) {
      const auto v = parse_list(camera_text);
      if (v.size() != 6) throw InvalidArgument("--camera expects fx,fy,cx,cy,width,height");
      k = {v[0], v[1], v[2], v[3], static_cast<int>(v[4]), static_cast<int>(v[5])};
    }
    const auto matches = load_matches_csv(matches_path);
    VoConfig vcfg = cfg.vo;
    vcfg.seed = cfg.seed;
    const VoStepResult r = vo_step(matches, k, vcfg);
    const std::vector<Twist> twists{r.motion};
    if (!out.empty()) save_twists(twists, out);
    std::cout << std::setprecision(9) << "inliers " << r.inliers << (r.low_confidence ? " (low confidence)" : "")
              << "\ntranslation " << r.motion.translational.transpose() << "\nrotation " << r.motion.rotational.transpose()
              << '\n';
    return kExitOk;
  }
  // No matches given: odometry along the synthetic test trajectory.
  const World world(cfg.world);
  const auto test = synth_trajectory(world, cfg.test);
  const auto truth = relative_motions(test);
  const CameraIntrinsics k = cfg.world.camera.scaled(cfg.vo_camera_scale);
  std::vector<Twist> twists;
  double rot_sq = 0.0;
  for (std::size_t t = 1; t < test.size(); ++t) {
    const auto matches = synth_matches(world, k, test[t - 1], test[t], cfg.matches, cfg.seed ^ t);
    VoConfig vcfg = cfg.vo;
    vcfg.seed = cfg.seed + t;
    const VoStepResult r = vo_step(matches, k, vcfg);
    twists.push_back(r.motion);
    const double e = rotation_angle(so3_exp(r.motion.rotational), so3_exp(truth[t].rotational));
    rot_sq += e * e;
  }
  if (!out.empty()) save_twists(twists, out);
  std::cout << "frames " << twists.size() << ", rotation RMSE "
            << std::sqrt(rot_sq / std::max<std::size_t>(1, twists.size())) << " rad\n";
  return kExitOk;
}

int cmd_report(const std::string& diagnostics, const std::string& out) {
  const auto rows = load_timing_csv(diagnostics);
  if (rows.empty()) throw InsufficientData("no frames in " + diagnostics);
  const std::string table = format_timing_table(summarize_timing(rows));
  std::cout << table;
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw DataError("cannot write " + out);
    f << table;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"featloc: localisation against a descriptor-embedded voxel map"};
  app.require_subcommand(1);

  ConfigArgs synth_args, map_args, imagine_args, loc_args, desc_args, vo_args;
  std::string out, map_path, pose_text, poses_path, dims = "3,10,32", matches, camera, diagnostics;
  int frame = 0, dump = 0, pairs = 12;

  auto* synth = app.add_subcommand("synth", "generate a world and its trajectories");
  synth_args.attach(synth);
  synth->add_option("-o,--out", out, "output directory")->required();
  synth->add_option("--dump-frames", dump, "also write the first N test observations");

  auto* build = app.add_subcommand("build-map", "fuse the mapping pass into a voxel map");
  map_args.attach(build);
  build->add_option("-o,--out", out, "map file (FEMAP1)")->required();

  auto* imagine = app.add_subcommand("imagine", "render the map from a pose");
  imagine_args.attach(imagine);
  imagine->add_option("-m,--map", map_path, "map file")->required()->check(CLI::ExistingFile);
  imagine->add_option("--pose", pose_text, "x,y,z,yaw[,pitch[,roll]] of the camera");
  imagine->add_option("--poses", poses_path, "KITTI pose file")->check(CLI::ExistingFile);
  imagine->add_option("--frame", frame, "line of --poses to use");
  imagine->add_option("-o,--out", out, "output prefix")->required();

  LocalizeArgs la;
  auto* localize = app.add_subcommand("localize", "run the particle filter");
  loc_args.attach(localize);
  localize->add_option("-m,--map", la.map, "map file (built from the config when absent)")->check(CLI::ExistingFile);
  localize->add_option("--frames", la.frames,
                       "number of synthetic test frames, or a text file listing FDESC1 observations");
  localize->add_option("--vo", la.vo, "internal | oracle | twist file (tx ty tz rx ry rz per line)");
  localize->add_option("--particles", la.particles, "particle count");
  localize->add_option("--seed", la.seed, "run seed");
  localize->add_option("-o,--out", la.out, "estimated trajectory (12-number pose lines)")->required();
  localize->add_option("--diag", la.diag, "per-frame diagnostics CSV");
  localize->add_option("--truth-out", la.truth_out, "ground-truth trajectory (synthetic runs)");
  localize->add_option("--odometry-out", la.odometry_out, "dead-reckoning trajectory (synthetic runs)");
  localize->add_option("--summary", la.summary, "JSON summary (synthetic runs)");
  localize->add_option("--init-pose", la.init_pose, "x,y,z,yaw prior for recorded frames (default: global)");

  auto* eval = app.add_subcommand("eval-desc", "descriptor distance and dense-matching report per dimension");
  desc_args.attach(eval);
  eval->add_option("--dims", dims, "comma-separated descriptor dimensions");
  eval->add_option("--pairs", pairs, "frame pairs per dimension");
  eval->add_option("-o,--out", out, "CSV output");

  auto* vo = app.add_subcommand("vo", "monocular odometry from matches or along the test trajectory");
  vo_args.attach(vo);
  vo->add_option("--matches", matches, "CSV u1,v1,u2,v2")->check(CLI::ExistingFile);
  vo->add_option("--camera", camera, "fx,fy,cx,cy,width,height of the matcher camera");
  vo->add_option("-o,--out", out, "twist output (tx ty tz rx ry rz per line)");

  auto* report = app.add_subcommand("report", "per-stage timing table from a diagnostics CSV");
  report->add_option("diagnostics", diagnostics, "diagnostics.csv written by localize")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("-o,--out", out, "also write the table here");

  app.footer([] {
    std::string text = "Config keys:\n";
    for (const auto& [key, description] : experiment_config_keys()) text += "  " + key + "  " + description + "\n";
    return text;
  }());

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(synth_args, out, dump);
    if (*build) return cmd_build_map(map_args, out);
    if (*imagine) return cmd_imagine(imagine_args, map_path, pose_text, poses_path, frame, out);
    if (*localize) return cmd_localize(loc_args, la);
    if (*eval) return cmd_eval_desc(desc_args, dims, out, pairs);
    if (*vo) return cmd_vo(vo_args, matches, camera, out);
    if (*report) return cmd_report(diagnostics, out);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
