#include "featloc/descriptor/descriptor_field.hpp"

#include <cmath>
#include <random>

#include "featloc/common/error.hpp"
#include "featloc/common/random.hpp"

namespace featloc {

DescriptorField::DescriptorField(const DescriptorFieldParams& params) : params_(params) {
  if (params.dim <= 0 || params.waves_per_channel <= 0) throw InvalidArgument("bad field shape");
  if (!(params.min_wavelength > 0.0) || params.max_wavelength < params.min_wavelength) {
    throw InvalidArgument("bad field wavelength range");
  }
  StreamRng rng(params.seed, 0x6669656c64ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t waves = static_cast<std::size_t>(params.dim) * params.waves_per_channel;
  frequency_.reserve(waves);
  phase_.reserve(waves);
  weight_.reserve(waves);
  const double per_wave = params.amplitude * std::sqrt(2.0 / params.waves_per_channel);
  for (std::size_t i = 0; i < waves; ++i) {
    Eigen::Vector3d dir(gauss(rng), gauss(rng), gauss(rng));
    dir.normalize();
    const double wavelength =
        params.min_wavelength + (params.max_wavelength - params.min_wavelength) * rng.uniform();
    frequency_.push_back(dir * (2.0 * M_PI / wavelength));
    phase_.push_back(2.0 * M_PI * rng.uniform());
    weight_.push_back(per_wave);
  }
}

void DescriptorField::evaluate(const Eigen::Vector3d& x, std::span<float> out) const {
  const int waves = params_.waves_per_channel;
  for (int c = 0; c < params_.dim; ++c) {
    double sum = 0.0;
    for (int w = 0; w < waves; ++w) {
      const std::size_t i = static_cast<std::size_t>(c) * waves + w;
      sum += weight_[i] * std::sin(frequency_[i].dot(x) + phase_[i]);
    }
    out[c] = static_cast<float>(sum);
  }
}

Eigen::VectorXd DescriptorField::evaluate(const Eigen::Vector3d& x) const {
  std::vector<float> tmp(params_.dim);
  evaluate(x, tmp);
  Eigen::VectorXd v(params_.dim);
  for (int c = 0; c < params_.dim; ++c) v(c) = tmp[c];
  return v;
}

double DescriptorField::lipschitz_bound() const {
  const int waves = params_.waves_per_channel;
  double sq = 0.0;
  for (int c = 0; c < params_.dim; ++c) {
    double channel = 0.0;
    for (int w = 0; w < waves; ++w) {
      const std::size_t i = static_cast<std::size_t>(c) * waves + w;
      channel += weight_[i] * frequency_[i].norm();
    }
    sq += channel * channel;
  }
  return std::sqrt(sq);
}

DescriptorImage synth_descriptor_field(const DescriptorField& field, const CameraIntrinsics& k,
                                       const Pose& world_to_camera, const DepthImage& depth,
                                       double noise_sigma, std::uint64_t seed,
                                       const DescriptorField* nuisance) {
  if (depth.width != k.width || depth.height != k.height) {
    throw InvalidArgument("depth image does not match the intrinsics");
  }
  if (nuisance != nullptr && nuisance->dim() != field.dim()) {
    throw InvalidArgument("nuisance field dimension mismatch");
  }
  DescriptorImage out(k.width, k.height, field.dim());
  std::vector<float> bias(field.dim());
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const double d = depth(u, v);
      if (!(d > 0.0) || !std::isfinite(d)) continue;
      const Eigen::Vector3d x = backproject({u + 0.5, v + 0.5}, d, k, world_to_camera);
      auto px = out.at(u, v);
      field.evaluate(x, px);
      if (nuisance != nullptr) {
        nuisance->evaluate(x, bias);
        for (int c = 0; c < field.dim(); ++c) px[c] += bias[c];
      }
      if (noise_sigma > 0.0) {
        StreamRng rng(seed, static_cast<std::uint64_t>(v) * k.width + u);
        std::normal_distribution<double> noise(0.0, noise_sigma);
        for (int c = 0; c < field.dim(); ++c) px[c] += static_cast<float>(noise(rng));
      }
    }
  }
  return out;
}

SyntheticDescriptorProvider::SyntheticDescriptorProvider(DescriptorField field, double noise_sigma,
                                                         std::uint64_t seed,
                                                         std::optional<DescriptorField> nuisance)
    : field_(std::move(field)), noise_sigma_(noise_sigma), seed_(seed), nuisance_(std::move(nuisance)) {}

DescriptorImage SyntheticDescriptorProvider::extract(const PosedFrame& frame) const {
  if (frame.depth == nullptr) throw InvalidArgument("synthetic provider needs a depth image");
  return synth_descriptor_field(field_, frame.k, frame.pose, *frame.depth, noise_sigma_,
                                hash_combine(seed_, frame.frame_id),
                                nuisance_ ? &*nuisance_ : nullptr);
}

}  // namespace featloc
