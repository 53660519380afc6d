// artiscene - articulated 3D scene graphs from point trajectories
//
// Pinhole camera model, depth images, binary masks and the projection /
// back-projection pair. Poses are world-from-camera; the camera frame has x
// right, y down and z along the optical axis. Pixel (col, row) has its
// center at integer coordinates.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "artiscene/errors.hpp"
#include "artiscene/se3.hpp"

namespace artiscene {

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  [[nodiscard]] bool is_valid() const {
    return fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx >= 0.0 &&
           cx < width && cy >= 0.0 && cy < height;
  }
  [[nodiscard]] std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  /// Camera-frame point at depth `z` on the ray through pixel (u, v).
  [[nodiscard]] Vec3 back_project(double u, double v, double z) const {
    return {(u - cx) * z / fx, (v - cy) * z / fy, z};
  }
};

inline void validate(const CameraIntrinsics& k) {
  if (!k.is_valid()) fail(ErrorKind::kInvalidArgument, "invalid camera intrinsics");
}

/// Row-major depth map in meters. Zero or non-finite entries are invalid.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  DepthImage() = default;
  DepthImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  [[nodiscard]] double at(int row, int col) const {
    return data[static_cast<std::size_t>(row) * width + col];
  }
  double& at(int row, int col) {
    return data[static_cast<std::size_t>(row) * width + col];
  }
  [[nodiscard]] bool valid(std::size_t i) const {
    const double d = data[i];
    return std::isfinite(d) && d > 0.0;
  }
  [[nodiscard]] bool valid(int row, int col) const {
    return valid(static_cast<std::size_t>(row) * width + col);
  }
  [[nodiscard]] std::size_t size() const { return data.size(); }
};

/// Row-major binary image.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Mask() = default;
  Mask(int w, int h, bool fill = false)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

  [[nodiscard]] bool at(int row, int col) const {
    return data[static_cast<std::size_t>(row) * width + col] != 0;
  }
  void set(int row, int col, bool value = true) {
    data[static_cast<std::size_t>(row) * width + col] = value ? 1 : 0;
  }
  [[nodiscard]] std::size_t count() const {
    std::size_t n = 0;
    for (auto b : data) n += (b != 0);
    return n;
  }
  [[nodiscard]] std::size_t size() const { return data.size(); }
  bool operator==(const Mask&) const = default;
};

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  bool valid = false;
};

inline bool inside_image(const CameraIntrinsics& k, double u, double v) {
  return u >= -0.5 && u < k.width - 0.5 && v >= -0.5 && v < k.height - 0.5;
}

inline Projection project_point(const Vec3& world, const CameraIntrinsics& k,
                                const RigidTransform& camera_from_world) {
  const Vec3 pc = camera_from_world.apply(world);
  Projection p;
  p.depth = pc.z();
  if (!(pc.z() > 0.0) || !pc.allFinite()) return p;
  p.u = k.fx * pc.x() / pc.z() + k.cx;
  p.v = k.fy * pc.y() / pc.z() + k.cy;
  p.valid = inside_image(k, p.u, p.v);
  return p;
}

/// Pinhole projection of world points. Points behind the camera or outside
/// the image keep their slot and are flagged invalid.
inline std::vector<Projection> project(std::span<const Vec3> points,
                                       const CameraIntrinsics& k,
                                       const RigidTransform& pose) {
  validate(k);
  const RigidTransform cam_from_world = pose.inverse();
  std::vector<Projection> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(project_point(p, k, cam_from_world));
  return out;
}

struct PointCloud {
  std::vector<Vec3> points;
  /// Source pixel index (row * width + col) of each point.
  std::vector<std::size_t> pixels;
};

inline void check_dims(const DepthImage& depth, const CameraIntrinsics& k) {
  if (depth.width != k.width || depth.height != k.height ||
      depth.data.size() != k.pixel_count()) {
    fail(ErrorKind::kShape, "depth image is " + std::to_string(depth.width) + "x" +
                                std::to_string(depth.height) + " but intrinsics are " +
                                std::to_string(k.width) + "x" + std::to_string(k.height));
  }
}

/// One world point per valid pixel.
inline PointCloud unproject(const DepthImage& depth, const CameraIntrinsics& k,
                            const RigidTransform& pose) {
  validate(k);
  check_dims(depth, k);
  PointCloud cloud;
  cloud.points.reserve(depth.size());
  cloud.pixels.reserve(depth.size());
  for (int r = 0; r < depth.height; ++r) {
    for (int c = 0; c < depth.width; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * depth.width + c;
      if (!depth.valid(i)) continue;
      cloud.points.push_back(pose.apply(k.back_project(c, r, depth.data[i])));
      cloud.pixels.push_back(i);
    }
  }
  return cloud;
}

/// Camera pose looking from `eye` toward `target`, with world `up` mapped
/// to image-up.
inline RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 z = (target - eye).normalized();
  const Vec3 x = z.cross(up).normalized();
  const Vec3 y = z.cross(x);
  RigidTransform t;
  t.rotation.col(0) = x;
  t.rotation.col(1) = y;
  t.rotation.col(2) = z;
  t.translation = eye;
  return t;
}

}  // namespace artiscene
