#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "featloc/common/image.hpp"
#include "featloc/descriptor/descriptor_image.hpp"
#include "featloc/geometry/camera.hpp"

namespace featloc {

struct DescriptorFieldParams {
  int dim = 10;
  std::uint64_t seed = 1;
  int waves_per_channel = 6;
  /// Spatial wavelengths (m) are drawn uniformly from this range.
  double min_wavelength = 0.8;
  double max_wavelength = 4.0;
  /// Per-channel standard deviation of the field.
  double amplitude = 0.35;
};

/// Smooth pseudo-random map from 3D position to an n-vector: each channel
/// is a sum of plane waves with random direction, wavelength and phase.
/// Stands in for a learned, viewpoint-invariant dense descriptor.
class DescriptorField {
 public:
  explicit DescriptorField(const DescriptorFieldParams& params);

  int dim() const { return params_.dim; }
  const DescriptorFieldParams& params() const { return params_; }

  void evaluate(const Eigen::Vector3d& x, std::span<float> out) const;
  Eigen::VectorXd evaluate(const Eigen::Vector3d& x) const;

  /// Upper bound on ||grad f|| (per unit length) used by smoothness checks.
  double lipschitz_bound() const;

 private:
  DescriptorFieldParams params_;
  // Per wave: frequency vector (rad/m), phase, amplitude; channel-major.
  std::vector<Eigen::Vector3d> frequency_;
  std::vector<double> phase_;
  std::vector<double> weight_;
};

/// A camera frame plus the per-pixel depth that lets a provider look up
/// the observed surface point.
struct PosedFrame {
  CameraIntrinsics k;
  Pose pose;
  const DepthImage* depth = nullptr;
  /// Distinguishes frames so their noise is independent.
  std::uint64_t frame_id = 0;
};

/// Anything that turns a frame into a dense descriptor image. Implementations
/// must be deterministic given (frame, seed).
class DescriptorProvider {
 public:
  virtual ~DescriptorProvider() = default;
  virtual DescriptorImage extract(const PosedFrame& frame) const = 0;
  virtual int dim() const = 0;
};

/// Evaluates `field` at the surface point seen by every pixel centre and adds
/// i.i.d. N(0, noise_sigma^2) noise keyed by (seed, frame, pixel, channel).
/// Pixels without a valid depth get an all-zero descriptor. An optional
/// `nuisance` field is added on top to emulate appearance change.
DescriptorImage synth_descriptor_field(const DescriptorField& field, const CameraIntrinsics& k,
                                       const Pose& world_to_camera, const DepthImage& depth,
                                       double noise_sigma, std::uint64_t seed,
                                       const DescriptorField* nuisance = nullptr);

class SyntheticDescriptorProvider final : public DescriptorProvider {
 public:
  SyntheticDescriptorProvider(DescriptorField field, double noise_sigma, std::uint64_t seed,
                              std::optional<DescriptorField> nuisance = std::nullopt);

  DescriptorImage extract(const PosedFrame& frame) const override;
  int dim() const override { return field_.dim(); }

 private:
  DescriptorField field_;
  double noise_sigma_;
  std::uint64_t seed_;
  std::optional<DescriptorField> nuisance_;
};

}  // namespace featloc
