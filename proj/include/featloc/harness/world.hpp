#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "featloc/common/image.hpp"
#include "featloc/descriptor/descriptor_field.hpp"
#include "featloc/descriptor/descriptor_image.hpp"
#include "featloc/geometry/camera.hpp"

namespace featloc {

struct AxisBox {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();

  bool contains(const Eigen::Vector3d& p, double margin = 0.0) const {
    return (p.array() >= min.array() - margin).all() && (p.array() <= max.array() + margin).all();
  }
};

/// A walled yard: ground plane z = ground_height, four walls at x = +-half_x and
/// y = +-half_y, and axis-aligned boxes. Every surface carries the same
/// smooth descriptor field.
struct WorldSpec {
  std::uint64_t seed = 1;
  double half_x = 5.0;
  double half_y = 5.0;
  double wall_height = 2.5;
  double ground_height = 0.0;
  bool ground = true;
  bool walls = true;

  /// Random boxes are placed outside the central clear rectangle.
  int box_count = 10;
  double clear_half_x = 4.0;
  double clear_half_y = 2.2;
  double box_min_size = 0.4;
  double box_max_size = 1.0;
  double box_max_height = 1.8;
  std::vector<AxisBox> extra_boxes;

  DescriptorFieldParams field;
  /// Optional smooth bias added to observations (appearance change).
  double nuisance_amplitude = 0.0;

  CameraIntrinsics camera{48.0, 48.0, 32.0, 24.0, 64, 48};

  void validate() const;
};

class World {
 public:
  /// Throws InvalidArgument for degenerate bounds.
  explicit World(const WorldSpec& spec);

  const WorldSpec& spec() const { return spec_; }
  const DescriptorField& field() const { return field_; }
  const DescriptorField* nuisance() const { return nuisance_ ? &*nuisance_ : nullptr; }
  const std::vector<AxisBox>& boxes() const { return boxes_; }

  /// Smallest s > 0 with origin + s * direction on a surface, or +inf.
  /// `direction` need not be normalised.
  double raycast(const Eigen::Vector3d& origin, const Eigen::Vector3d& direction) const;

  /// True when p lies inside the yard and outside every box, with margin.
  bool is_free(const Eigen::Vector3d& p, double margin) const;

  /// Camera-frame z depth through every pixel centre; 0 where the ray
  /// leaves the world.
  DepthImage render_depth(const CameraIntrinsics& k, const Pose& world_to_camera) const;

  /// Ground-truth descriptors plus N(0, sigma^2) noise keyed by
  /// (seed, frame_id), with the nuisance field when configured.
  DescriptorImage observe(const CameraIntrinsics& k, const Pose& world_to_camera, const DepthImage& depth,
                          double sigma, std::uint64_t seed, std::uint64_t frame_id) const;

 private:
  WorldSpec spec_;
  DescriptorField field_;
  std::optional<DescriptorField> nuisance_;
  std::vector<AxisBox> boxes_;
};

}  // namespace featloc
