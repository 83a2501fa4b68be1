#include "featloc/descriptor/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "featloc/common/error.hpp"

namespace featloc {
namespace {

std::vector<double> normalized_histogram(std::span<const double> values, double max_value) {
  std::vector<double> bins(kOverlapBins, 0.0);
  for (double d : values) {
    int b = max_value > 0.0 ? static_cast<int>(d / max_value * kOverlapBins) : 0;
    b = std::clamp(b, 0, kOverlapBins - 1);
    bins[b] += 1.0;
  }
  for (double& b : bins) b /= static_cast<double>(values.size());
  return bins;
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

DistanceStats distance_stats(std::span<const double> match_distances,
                             std::span<const double> nonmatch_distances) {
  if (match_distances.empty() || nonmatch_distances.empty()) {
    throw InvalidArgument("distance statistics need both matches and non-matches");
  }
  double max_value = 0.0;
  for (double d : match_distances) max_value = std::max(max_value, d);
  for (double d : nonmatch_distances) max_value = std::max(max_value, d);

  const auto hm = normalized_histogram(match_distances, max_value);
  const auto hn = normalized_histogram(nonmatch_distances, max_value);
  DistanceStats stats;
  stats.mean_match = mean(match_distances);
  stats.mean_nonmatch = mean(nonmatch_distances);
  for (int b = 0; b < kOverlapBins; ++b) stats.overlap += std::min(hm[b], hn[b]);
  return stats;
}

DistanceStats distance_stats(std::span<const DescriptorPair> matches,
                             std::span<const DescriptorPair> nonmatches) {
  auto distances = [](std::span<const DescriptorPair> pairs) {
    std::vector<double> d;
    d.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
      if (a.size() != b.size()) throw InvalidArgument("descriptor dimension mismatch");
      d.push_back((a - b).norm());
    }
    return d;
  };
  const auto dm = distances(matches);
  const auto dn = distances(nonmatches);
  return distance_stats(std::span<const double>(dm), std::span<const double>(dn));
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - t) + values[hi] * t;
}

DenseMatchStats dense_match_eval(const DescriptorImage& f1, const DescriptorImage& f2,
                                 const CorrespondenceSet& ground_truth, int window_radius) {
  if (f1.dim() != f2.dim()) throw InvalidArgument("descriptor dimension mismatch");
  const int dim = f1.dim();
  std::vector<double> errors;

  for (const auto& pair : ground_truth) {
    if (pair.label != PairLabel::kMatch) continue;
    const int u1 = static_cast<int>(std::floor(pair.p1.x()));
    const int v1 = static_cast<int>(std::floor(pair.p1.y()));
    const int u2 = static_cast<int>(std::floor(pair.p2.x()));
    const int v2 = static_cast<int>(std::floor(pair.p2.y()));
    if (u1 < 0 || v1 < 0 || u1 >= f1.width() || v1 >= f1.height()) continue;
    if (u2 < 0 || v2 < 0 || u2 >= f2.width() || v2 >= f2.height()) continue;
    const auto query = f1.at(u1, v1);

    double best = std::numeric_limits<double>::infinity();
    int best_u = u2, best_v = v2;
    const int v_lo = std::max(0, v2 - window_radius), v_hi = std::min(f2.height() - 1, v2 + window_radius);
    const int u_lo = std::max(0, u2 - window_radius), u_hi = std::min(f2.width() - 1, u2 + window_radius);
    for (int v = v_lo; v <= v_hi; ++v) {
      for (int u = u_lo; u <= u_hi; ++u) {
        const auto cand = f2.at(u, v);
        double sq = 0.0;
        for (int c = 0; c < dim; ++c) {
          const double d = static_cast<double>(query[c]) - cand[c];
          sq += d * d;
        }
        if (sq < best) {
          best = sq;
          best_u = u;
          best_v = v;
        }
      }
    }
    errors.push_back(std::hypot(best_u - u2, best_v - v2));
  }

  DenseMatchStats stats;
  stats.evaluated = errors.size();
  if (errors.empty()) return stats;
  double sq = 0.0;
  for (double e : errors) sq += e * e;
  stats.rmse_px = std::sqrt(sq / static_cast<double>(errors.size()));
  stats.p50_px = percentile(errors, 50.0);
  stats.p95_px = percentile(errors, 95.0);
  return stats;
}

}  // namespace featloc
