#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace featloc {

/// Wall-clock milliseconds spent per stage in one frame.
struct FrameTiming {
  double observe = 0.0;   // depth + descriptor synthesis
  double vo = 0.0;        // match synthesis + essential matrix
  double predict = 0.0;
  double weight = 0.0;    // imagined views + likelihood
  double cluster = 0.0;   // mean-shift
  double resample = 0.0;
  double wall = 0.0;      // whole frame
  std::size_t particles = 0;

  double stage_sum() const { return observe + vo + predict + weight + cluster + resample; }
};

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

MeanStd mean_std(const std::vector<double>& values);

struct TimingSummary {
  std::size_t frames = 0;
  MeanStd observe, vo, predict, weight, cluster, resample, wall;
  /// Likelihood cost divided by the particle count of each frame.
  MeanStd weight_per_particle;
  /// Largest |stage sum - wall| / wall over all frames.
  double worst_accounting_error = 0.0;
};

TimingSummary summarize_timing(const std::vector<FrameTiming>& frames);

/// "1.93 ± 0.23"
std::string format_mean_std(const MeanStd& v, int precision = 2);

/// Per-stage table: one "stage  mean ± std ms/frame" row per stage plus the
/// per-particle likelihood cost and the accounting check.
std::string format_timing_table(const TimingSummary& summary);

}  // namespace featloc
