#include "featloc/harness/timing_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace featloc {

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return out;
}

TimingSummary summarize_timing(const std::vector<FrameTiming>& frames) {
  TimingSummary s;
  s.frames = frames.size();
  auto column = [&](auto get) {
    std::vector<double> v;
    v.reserve(frames.size());
    for (const auto& f : frames) v.push_back(get(f));
    return mean_std(v);
  };
  s.observe = column([](const FrameTiming& f) { return f.observe; });
  s.vo = column([](const FrameTiming& f) { return f.vo; });
  s.predict = column([](const FrameTiming& f) { return f.predict; });
  s.weight = column([](const FrameTiming& f) { return f.weight; });
  s.cluster = column([](const FrameTiming& f) { return f.cluster; });
  s.resample = column([](const FrameTiming& f) { return f.resample; });
  s.wall = column([](const FrameTiming& f) { return f.wall; });
  s.weight_per_particle = column([](const FrameTiming& f) {
    return f.particles == 0 ? 0.0 : f.weight / static_cast<double>(f.particles);
  });
  for (const auto& f : frames) {
    if (f.wall > 0.0) s.worst_accounting_error = std::max(s.worst_accounting_error, std::fabs(f.stage_sum() - f.wall) / f.wall);
  }
  return s;
}

std::string format_mean_std(const MeanStd& v, int precision) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.*f ± %.*f", precision, v.mean, precision, v.stddev);
  return buf;
}

std::string format_timing_table(const TimingSummary& s) {
  std::ostringstream out;
  char line[160];
  auto row = [&](const char* name, const MeanStd& v, const char* unit, int precision = 2) {
    std::snprintf(line, sizeof(line), "%-22s %20s %s\n", name, format_mean_std(v, precision).c_str(), unit);
    out << line;
  };
  std::snprintf(line, sizeof(line), "%-22s %20s %s\n", "stage", "time", "unit");
  out << line;
  row("observation", s.observe, "ms/frame");
  row("visual odometry", s.vo, "ms/frame");
  row("prediction", s.predict, "ms/frame");
  row("likelihood", s.weight, "ms/frame");
  row("clustering", s.cluster, "ms/frame");
  row("resampling", s.resample, "ms/frame");
  row("total", s.wall, "ms/frame");
  row("likelihood/particle", s.weight_per_particle, "ms/particle", 4);
  std::snprintf(line, sizeof(line), "%-22s %20zu\n", "frames", s.frames);
  out << line;
  std::snprintf(line, sizeof(line), "%-22s %19.2f%%\n", "worst accounting gap", 100.0 * s.worst_accounting_error);
  out << line;
  return out.str();
}

}  // namespace featloc
