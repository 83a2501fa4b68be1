#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "featloc/common/error.hpp"
#include "featloc/descriptor/contrastive_loss.hpp"
#include "featloc/descriptor/correspondences.hpp"
#include "featloc/descriptor/descriptor_field.hpp"
#include "featloc/descriptor/evaluation.hpp"
#include "featloc/harness/world.hpp"

namespace featloc {
namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("featloc_desc_" + name);
}

/// Scalar reference for the margin contrastive loss.
double reference_loss(int label, const std::vector<double>& a, const std::vector<double>& b, double m) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  const double d = std::sqrt(sq);
  if (label == 1) return 0.5 * d * d;
  if (label == 0) return d >= m ? 0.0 : 0.5 * (m - d) * (m - d);
  return 0.0;
}

TEST(ContrastiveLoss, ExampleValues) {
  Eigen::VectorXd a(1), b(1);
  a << 0.0;
  b << 0.3;
  EXPECT_NEAR(contrastive_loss(PairLabel::kMatch, a, b), 0.045, 1e-15);
  b << 0.2;
  EXPECT_NEAR(contrastive_loss(PairLabel::kNonMatch, a, b, {0.5}), 0.045, 1e-15);
  b << 0.7;
  EXPECT_EQ(contrastive_loss(PairLabel::kNonMatch, a, b, {0.5}), 0.0);
  EXPECT_EQ(contrastive_loss(PairLabel::kMatch, a, a), 0.0);
  EXPECT_EQ(contrastive_loss(PairLabel::kIgnore, a, b), 0.0);
}

TEST(ContrastiveLoss, ContinuousAtMargin) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(2), b(2);
  b << 0.5 - 1e-9, 0.0;
  EXPECT_LT(contrastive_loss(PairLabel::kNonMatch, a, b), 1e-17);
  b << 0.5, 0.0;
  EXPECT_EQ(contrastive_loss(PairLabel::kNonMatch, a, b), 0.0);
}

TEST(ContrastiveLoss, RejectsBadInput) {
  Eigen::VectorXd a(2), b(3);
  a.setZero();
  b.setZero();
  EXPECT_THROW(contrastive_loss(PairLabel::kMatch, a, b), InvalidArgument);
  EXPECT_THROW(contrastive_loss(PairLabel::kMatch, a, a, {0.0}), InvalidArgument);
}

TEST(ContrastiveLoss, MatchesScalarReference) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0), mu(0.05, 2.0);
  std::uniform_int_distribution<int> dim(1, 32), lab(-1, 1);
  for (int i = 0; i < 1000; ++i) {
    const int n = dim(rng);
    std::vector<double> a(n), b(n);
    Eigen::VectorXd ea(n), eb(n);
    for (int j = 0; j < n; ++j) {
      a[j] = ea[j] = u(rng);
      b[j] = eb[j] = u(rng) * 0.2;
    }
    const int label = lab(rng);
    const double m = mu(rng);
    const PairLabel pl = label == 1 ? PairLabel::kMatch : label == 0 ? PairLabel::kNonMatch : PairLabel::kIgnore;
    EXPECT_DOUBLE_EQ(contrastive_loss(pl, ea, eb, {m}), reference_loss(label, a, b, m));
  }
}

DescriptorImage random_image(int w, int h, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  DescriptorImage img(w, h, n);
  for (float& x : img.values()) x = u(rng);
  return img;
}

TEST(TotalLoss, TrivialCases) {
  const auto f1 = random_image(8, 6, 3, 1), f2 = random_image(8, 6, 3, 2);
  CorrespondenceSet ignore(5, CorrespondencePair{{1, 1}, {2, 2}, PairLabel::kIgnore});
  EXPECT_EQ(total_loss(ignore, f1, f2), 0.0);
  const CorrespondencePair pair{{2.5, 3.5}, {4.5, 1.5}, PairLabel::kMatch};
  EXPECT_DOUBLE_EQ(total_loss({pair}, f1, f2),
                   contrastive_loss(PairLabel::kMatch, f1.sample(2.5, 3.5), f2.sample(4.5, 1.5)));
}

TEST(TotalLoss, MatchesNaiveSumAndIsLinear) {
  const int w = 20, h = 15, n = 4;
  const auto f1 = random_image(w, h, n, 3), f2 = random_image(w, h, n, 4);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uu(0.0, w - 1e-6), uv(0.0, h - 1e-6);
  std::uniform_int_distribution<int> lab(0, 1);
  CorrespondenceSet pairs;
  for (int i = 0; i < 100; ++i) {
    pairs.push_back({{uu(rng), uv(rng)}, {uu(rng), uv(rng)}, lab(rng) ? PairLabel::kMatch : PairLabel::kNonMatch});
  }
  // Oracle: explicit bilinear interpolation between pixel centres.
  auto bilinear = [&](const DescriptorImage& f, double u, double v) {
    const double x = std::clamp(u - 0.5, 0.0, w - 1.0), y = std::clamp(v - 0.5, 0.0, h - 1.0);
    const int x0 = std::min(static_cast<int>(x), w - 2), y0 = std::min(static_cast<int>(y), h - 2);
    const double ax = x - x0, ay = y - y0;
    std::vector<double> out(n);
    for (int c = 0; c < n; ++c) {
      out[c] = (1 - ax) * (1 - ay) * f.at(x0, y0)[c] + ax * (1 - ay) * f.at(x0 + 1, y0)[c] +
               (1 - ax) * ay * f.at(x0, y0 + 1)[c] + ax * ay * f.at(x0 + 1, y0 + 1)[c];
    }
    return out;
  };
  double oracle = 0.0;
  for (const auto& p : pairs) {
    oracle += reference_loss(p.label == PairLabel::kMatch ? 1 : 0, bilinear(f1, p.p1.x(), p.p1.y()),
                             bilinear(f2, p.p2.x(), p.p2.y()), 0.5);
  }
  const double total = total_loss(pairs, f1, f2);
  EXPECT_NEAR(total, oracle, 1e-9);
  const CorrespondenceSet a(pairs.begin(), pairs.begin() + 37), b(pairs.begin() + 37, pairs.end());
  EXPECT_NEAR(total_loss(a, f1, f2) + total_loss(b, f1, f2), total, 1e-9);
}

TEST(TotalLoss, OutOfBoundsThrows) {
  const auto f = random_image(4, 4, 2, 1);
  EXPECT_THROW(total_loss({{{4.0, 1.0}, {1, 1}, PairLabel::kMatch}}, f, f), InvalidArgument);
  EXPECT_THROW(total_loss({{{-0.1, 1.0}, {1, 1}, PairLabel::kNonMatch}}, f, f), InvalidArgument);
}

TEST(DescriptorImage, SampleAtPixelCentreIsExact) {
  const auto f = random_image(5, 4, 3, 9);
  const Eigen::VectorXd s = f.sample(2.5, 1.5);
  for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(s[c], f.at(2, 1)[c]);
}

TEST(Fdesc, RoundTrip) {
  const auto f = random_image(13, 7, 5, 12);
  const auto path = temp_path("rt.fdesc");
  save_fdesc(f, path);
  EXPECT_TRUE(load_fdesc(path) == f);
  std::filesystem::remove(path);
}

TEST(Fdesc, CorruptMagicAndTruncation) {
  const auto f = random_image(4, 3, 2, 1);
  const auto path = temp_path("bad.fdesc");
  save_fdesc(f, path);
  {
    std::fstream io(path, std::ios::in | std::ios::out | std::ios::binary);
    io.seekp(0);
    io.put('X');
  }
  EXPECT_THROW(load_fdesc(path), FormatError);
  save_fdesc(f, path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
  EXPECT_THROW(load_fdesc(path), FormatError);
  std::filesystem::remove(path);
}

/// Two cameras looking at the ground of a flat world.
struct TwoView {
  World world;
  CameraIntrinsics k{40, 40, 32, 24, 64, 48};
  Pose p1, p2;
  DepthImage d1, d2;

  static WorldSpec spec() {
    WorldSpec s;
    s.box_count = 0;
    return s;
  }
  TwoView() : world(spec()) {
    p1 = camera_pose_from_heading({0, 0, 1}, 0.0, 0.3);
    p2 = camera_pose_from_heading({0.3, 0.1, 1}, 0.1, 0.3);
    d1 = world.render_depth(k, p1);
    d2 = world.render_depth(k, p2);
  }
  std::vector<Eigen::Vector3d> surface_points(const Pose& p, const DepthImage& d, int stride) const {
    std::vector<Eigen::Vector3d> pts;
    for (int v = 0; v < k.height; v += stride) {
      for (int u = 0; u < k.width; u += stride) {
        if (d(u, v) > 0) pts.push_back(backproject({u + 0.5, v + 0.5}, d(u, v), k, p));
      }
    }
    return pts;
  }
};

TEST(Correspondences, IdenticalFramesGiveIdenticalPixels) {
  TwoView tv;
  const auto pts = tv.surface_points(tv.p1, tv.d1, 4);
  const auto pairs = generate_correspondences(pts, {tv.k, tv.p1, &tv.d1}, {tv.k, tv.p1, &tv.d1});
  std::size_t matches = 0;
  for (const auto& p : pairs) {
    if (p.label != PairLabel::kMatch) continue;
    ++matches;
    EXPECT_EQ(p.p1, p.p2);
  }
  EXPECT_GT(matches, 50u);
}

TEST(Correspondences, MatchesAreReprojectionConsistent) {
  TwoView tv;
  const auto pts = tv.surface_points(tv.p1, tv.d1, 3);
  CorrespondenceOptions opt;
  opt.seed = 4;
  const auto pairs = generate_correspondences(pts, {tv.k, tv.p1, &tv.d1}, {tv.k, tv.p2, &tv.d2}, opt);
  std::size_t matches = 0, negatives = 0;
  Eigen::Vector2d last_match = Eigen::Vector2d::Zero();
  for (const auto& p : pairs) {
    if (p.label == PairLabel::kMatch) {
      ++matches;
      last_match = p.p2;
    } else if (p.label == PairLabel::kNonMatch) {
      ++negatives;
      EXPECT_GE((p.p2 - last_match).norm(), opt.exclusion_radius_px);
    }
  }
  EXPECT_GT(matches, 50u);
  EXPECT_EQ(negatives, matches * 10);
  // Independent check: each match is the forward projection of some input point.
  for (const auto& p : pairs) {
    if (p.label != PairLabel::kMatch) continue;
    double best = 1e9;
    for (const auto& x : pts) {
      const auto a = project(x, tv.k, tv.p1);
      const auto b = project(x, tv.k, tv.p2);
      if (!a || !b) continue;
      best = std::min(best, std::max((a->uv() - p.p1).norm(), (b->uv() - p.p2).norm()));
    }
    EXPECT_LT(best, 0.5);
  }
}

TEST(Correspondences, PointBehindSecondCameraIsIgnored) {
  TwoView tv;
  const Eigen::Vector3d in_front_of_1 = backproject({32, 40}, tv.d1(32, 40), tv.k, tv.p1);
  const Pose facing_away = camera_pose_from_heading({in_front_of_1.x() - 1.0, in_front_of_1.y(), 1}, std::numbers::pi, 0.3);
  const DepthImage d = tv.world.render_depth(tv.k, facing_away);
  const std::vector<Eigen::Vector3d> pts{in_front_of_1};
  const auto pairs = generate_correspondences(pts, {tv.k, tv.p1, &tv.d1}, {tv.k, facing_away, &d});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].label, PairLabel::kIgnore);
}

TEST(Correspondences, CsvRoundTrip) {
  CorrespondenceSet pairs{{{1.25, 2.5}, {3.125, 4.0}, PairLabel::kMatch},
                          {{0.5, 0.5}, {9.5, 1.5}, PairLabel::kNonMatch},
                          {{7.0, 1.0}, {2.0, 3.0}, PairLabel::kIgnore}};
  const auto path = temp_path("pairs.csv");
  save_correspondences_csv(pairs, path);
  const auto back = load_correspondences_csv(path);
  ASSERT_EQ(back.size(), pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(back[i].p1, pairs[i].p1);
    EXPECT_EQ(back[i].p2, pairs[i].p2);
    EXPECT_EQ(back[i].label, pairs[i].label);
  }
  std::filesystem::remove(path);
}

TEST(SyntheticField, NoiselessViewsAgree) {
  TwoView tv;
  const DescriptorField field(DescriptorFieldParams{});
  const Pose p = tv.p1;
  const auto a = synth_descriptor_field(field, tv.k, p, tv.d1, 0.0, 1);
  const auto b = synth_descriptor_field(field, tv.k, p, tv.d1, 0.0, 2);
  EXPECT_TRUE(a == b);
}

TEST(SyntheticField, MatchDistanceScale) {
  // Two independent N(0, sigma^2) noise draws on one surface point differ by
  // N(0, 2 sigma^2 I_n), whose expected norm is approximately sigma*sqrt(2n-1).
  const int n = 10;
  const double sigma = 0.05;
  TwoView tv;
  DescriptorFieldParams params;
  params.dim = n;
  const DescriptorField field(params);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::uint64_t s = 0; count < 10000; ++s) {
    const auto a = synth_descriptor_field(field, tv.k, tv.p1, tv.d1, sigma, 2 * s + 1);
    const auto b = synth_descriptor_field(field, tv.k, tv.p1, tv.d1, sigma, 2 * s + 2);
    for (std::size_t i = 0; i < a.pixel_count() && count < 10000; ++i) {
      if (tv.d1.data[i] <= 0) continue;
      double sq = 0.0;
      for (int c = 0; c < n; ++c) sq += std::pow(a.pixel(i)[c] - b.pixel(i)[c], 2);
      sum += std::sqrt(sq);
      ++count;
    }
  }
  const double expected = sigma * std::sqrt(2.0 * n - 1.0);
  EXPECT_NEAR(sum / count, expected, 0.1 * expected);
}

TEST(SyntheticField, DifferentSeedsDecorrelate) {
  TwoView tv;
  DescriptorFieldParams pa, pb;
  pb.seed = pa.seed + 17;
  const DescriptorField fa(pa), fb(pb);
  const auto a1 = synth_descriptor_field(fa, tv.k, tv.p1, tv.d1, 0.05, 1);
  const auto a2 = synth_descriptor_field(fa, tv.k, tv.p1, tv.d1, 0.05, 2);
  const auto b = synth_descriptor_field(fb, tv.k, tv.p1, tv.d1, 0.05, 3);
  double match = 0.0, nonmatch = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a1.pixel_count(); ++i) {
    if (tv.d1.data[i] <= 0) continue;
    double sm = 0.0, sn = 0.0;
    for (int c = 0; c < pa.dim; ++c) {
      sm += std::pow(a1.pixel(i)[c] - a2.pixel(i)[c], 2);
      sn += std::pow(a1.pixel(i)[c] - b.pixel(i)[c], 2);
    }
    match += std::sqrt(sm);
    nonmatch += std::sqrt(sn);
    ++count;
  }
  ASSERT_GT(count, 100u);
  EXPECT_GE(nonmatch, 5.0 * match);
}

TEST(SyntheticField, Deterministic) {
  TwoView tv;
  const DescriptorField field(DescriptorFieldParams{});
  EXPECT_TRUE(synth_descriptor_field(field, tv.k, tv.p2, tv.d2, 0.05, 9) ==
              synth_descriptor_field(field, tv.k, tv.p2, tv.d2, 0.05, 9));
  const SyntheticDescriptorProvider provider(field, 0.05, 9);
  const PosedFrame frame{tv.k, tv.p2, &tv.d2, 3};
  EXPECT_TRUE(provider.extract(frame) == provider.extract(frame));
}

TEST(SyntheticField, InvalidDepthGivesZeros) {
  const CameraIntrinsics k{10, 10, 2, 2, 4, 4};
  DepthImage depth(4, 4, 0.0);
  const DescriptorField field(DescriptorFieldParams{});
  const auto img = synth_descriptor_field(field, k, Pose::identity(), depth, 0.1, 1);
  for (float x : img.values()) EXPECT_EQ(x, 0.0f);
}

TEST(DistanceStats, TrivialCases) {
  const std::vector<double> zeros(10, 0.0), ones(10, 1.0), tenths(10, 0.1);
  EXPECT_EQ(distance_stats(zeros, ones).mean_match, 0.0);
  const auto s = distance_stats(tenths, ones);
  EXPECT_NEAR(s.mean_match, 0.1, 1e-15);
  EXPECT_NEAR(s.mean_nonmatch, 1.0, 1e-15);
  EXPECT_EQ(s.overlap, 0.0);
  EXPECT_NEAR(distance_stats(ones, ones).overlap, 1.0, 1e-12);
  EXPECT_THROW(distance_stats(std::vector<double>{}, ones), InvalidArgument);
  EXPECT_THROW(distance_stats(ones, std::vector<double>{}), InvalidArgument);
}

TEST(DistanceStats, DescriptorPairs) {
  Eigen::VectorXd a(2), b(2);
  a << 0, 0;
  b << 3, 4;
  const std::vector<DescriptorPair> m{{a, a}}, nm{{a, b}};
  const auto s = distance_stats(m, nm);
  EXPECT_EQ(s.mean_match, 0.0);
  EXPECT_NEAR(s.mean_nonmatch, 5.0, 1e-15);
}

TEST(DistanceStats, GaussianOverlapMatchesAnalyticIntersection) {
  const double mu1 = 1.0, mu2 = 2.0, sigma = 0.4;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g1(mu1, sigma), g2(mu2, sigma);
  std::vector<double> a(200000), b(200000);
  for (auto& x : a) x = std::abs(g1(rng));
  for (auto& x : b) x = std::abs(g2(rng));
  // Oracle: numerically integrate min(p1, p2) over the positive half line.
  auto pdf = [&](double x, double mu) {
    const double c = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
    return c * (std::exp(-0.5 * std::pow((x - mu) / sigma, 2)) + std::exp(-0.5 * std::pow((x + mu) / sigma, 2)));
  };
  double analytic = 0.0;
  const double dx = 1e-4;
  for (double x = 0.5 * dx; x < 10.0; x += dx) analytic += std::min(pdf(x, mu1), pdf(x, mu2)) * dx;
  EXPECT_NEAR(distance_stats(a, b).overlap, analytic, 0.02);
}

TEST(Percentile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4}, 50), 2.5);
  EXPECT_DOUBLE_EQ(percentile({5}, 95), 5.0);
  EXPECT_DOUBLE_EQ(percentile({3, 1, 2}, 0), 1.0);
  EXPECT_DOUBLE_EQ(percentile({3, 1, 2}, 100), 3.0);
}

TEST(DenseMatch, IdenticalImagesGiveZeroError) {
  const auto f = random_image(16, 12, 4, 33);
  CorrespondenceSet gt;
  for (int v = 0; v < 12; ++v) {
    for (int u = 0; u < 16; ++u) gt.push_back({{u + 0.5, v + 0.5}, {u + 0.5, v + 0.5}, PairLabel::kMatch});
  }
  const auto s = dense_match_eval(f, f, gt, 100);
  EXPECT_EQ(s.rmse_px, 0.0);
  EXPECT_EQ(s.evaluated, gt.size());
}

TEST(DenseMatch, OneHotDescriptorsUnderAnyWindow) {
  const int w = 6, h = 5;
  DescriptorImage f1(w, h, w * h), f2(w, h, w * h);
  // Image 2 is image 1 shifted right by one pixel.
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      f1.at(u, v)[v * w + u] = 1.0f;
      f2.at((u + 1) % w, v)[v * w + u] = 1.0f;
    }
  }
  CorrespondenceSet gt;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) gt.push_back({{u + 0.5, v + 0.5}, {(u + 1) % w + 0.5, v + 0.5}, PairLabel::kMatch});
  }
  for (int r : {0, 1, 3, 100}) EXPECT_EQ(dense_match_eval(f1, f2, gt, r).rmse_px, 0.0) << r;
}

TEST(DenseMatch, KnownDisplacement) {
  // Constant image 2: ties keep the first (top-left) pixel of the window.
  DescriptorImage f1(10, 10, 1, 1.0f), f2(10, 10, 1, 1.0f);
  const CorrespondenceSet gt{{{5.5, 5.5}, {5.5, 5.5}, PairLabel::kMatch}};
  const auto s = dense_match_eval(f1, f2, gt, 2);
  EXPECT_NEAR(s.rmse_px, std::sqrt(8.0), 1e-12);
}

}  // namespace
}  // namespace featloc
