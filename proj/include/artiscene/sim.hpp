// artiscene - articulated 3D scene graphs from point trajectories
//
// Seeded synthetic articulated scenes built from oriented boxes: ray-cast
// depth, agent masks, point tracks with a configurable noise model, object
// and child point sets, and ground truth. Everything is a deterministic
// function of the SceneSpec; per-frame randomness is drawn from streams keyed
// by (seed, frame) so parallel rendering never changes the output.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "artiscene/bundle.hpp"
#include "artiscene/camera.hpp"
#include "artiscene/errors.hpp"
#include "artiscene/parallel.hpp"
#include "artiscene/se3.hpp"

namespace artiscene {

struct Box {
  Vec3 center = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();  // world-from-box
  Vec3 half = Vec3::Constant(0.5);

  static Box from_bounds(const Vec3& lo, const Vec3& hi) {
    Box b;
    b.center = 0.5 * (lo + hi);
    b.half = 0.5 * (hi - lo);
    return b;
  }
  [[nodiscard]] Box transformed(const RigidTransform& t) const {
    return {t.apply(center), t.rotation * rotation, half};
  }
  [[nodiscard]] std::array<Vec3, 8> corners() const {
    std::array<Vec3, 8> c;
    for (int i = 0; i < 8; ++i) {
      const Vec3 s((i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0);
      c[i] = center + rotation * s.cwiseProduct(half);
    }
    return c;
  }
};

/// Entry distance along `dir` and the face hit (0..5 as -x,+x,-y,+y,-z,+z).
/// Rays starting inside the box do not hit it.
inline bool ray_box(const Box& b, const Vec3& origin, const Vec3& dir, double& t_hit, int& face) {
  const Vec3 o = b.rotation.transpose() * (origin - b.center);
  const Vec3 d = b.rotation.transpose() * dir;
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int axis = -1;
  bool neg = false;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (std::abs(o[i]) > b.half[i]) return false;
      continue;
    }
    double t1 = (-b.half[i] - o[i]) / d[i];
    double t2 = (b.half[i] - o[i]) / d[i];
    bool n = true;  // entering through the -half face
    if (t1 > t2) {
      std::swap(t1, t2);
      n = false;
    }
    if (t1 > t_near) {
      t_near = t1;
      axis = i;
      neg = n;
    }
    t_far = std::min(t_far, t2);
    if (t_near > t_far) return false;
  }
  if (axis < 0 || !(t_near > 0.0)) return false;
  t_hit = t_near;
  face = 2 * axis + (neg ? 0 : 1);
  return true;
}

/// Surface samples on a regular grid of spacing `h` over all six faces.
inline std::vector<Vec3> sample_box_surface(const Box& b, double h) {
  std::vector<Vec3> out;
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    const int nu = std::max(1, static_cast<int>(std::ceil(2 * b.half[u] / h)));
    const int nv = std::max(1, static_cast<int>(std::ceil(2 * b.half[v] / h)));
    for (int side = -1; side <= 1; side += 2) {
      for (int i = 0; i <= nu; ++i) {
        for (int j = 0; j <= nv; ++j) {
          Vec3 l;
          l[axis] = side * b.half[axis];
          l[u] = -b.half[u] + 2 * b.half[u] * i / nu;
          l[v] = -b.half[v] + 2 * b.half[v] * j / nv;
          out.push_back(b.center + b.rotation * l);
        }
      }
    }
  }
  return out;
}

/// One interval of motion: theta moves from `from` to `to` over [t_start,
/// t_end) with a trapezoidal velocity profile.
struct MotionWindow {
  InteractionSegment window;
  double from = 0.0;
  double to = 0.0;
  double accel = 0.25;  // fraction of the window spent accelerating, and again decelerating
};

struct SimObject {
  std::string name;
  std::vector<Box> boxes;  // closed configuration, world frame
  std::optional<ScrewAxis> axis;
  std::vector<MotionWindow> motions;
  Vec3 handle = Vec3::Zero();  // where the agent grabs, closed configuration
};

struct SimChild {
  std::string name;
  std::vector<Box> boxes;
  int parent = 0;  // index into SceneSpec::objects
  ChildRelation relation = ChildRelation::kStatic;
};

struct NoiseModel {
  double pixel_sigma = 0.0;  // px, on track positions
  double point_sigma = 0.0;  // m, isotropic 3D jitter of tracked points
  double depth_sigma = 0.0;  // m, per depth pixel
  double drift = 0.0;        // m per frame, random-walk bias per track
  double dropout = 0.0;      // probability of losing a visible observation
};

struct SceneSpec {
  std::string name;
  int n_frames = 60;
  double fps = 30.0;
  CameraIntrinsics intrinsics{140.0, 140.0, 79.5, 59.5, 160, 120};
  std::vector<RigidTransform> camera_path;
  std::vector<Box> static_geometry;
  std::vector<SimObject> objects;
  std::vector<SimChild> children;
  std::vector<InteractionSegment> distractors;  // agent visible, nothing moves
  NoiseModel noise;
  int n_tracks = 1500;
  int query_stride = 20;  // frames between track query frames
  double agent_radius_px = 10.0;  // 40 px at 640 x 480
  double surface_spacing = 0.02;
  std::uint64_t seed = 0;
};

inline double trapezoid(double s, double accel = 0.25) {
  s = std::clamp(s, 0.0, 1.0);
  const double a = accel;
  const double vmax = 1.0 / (1.0 - a);
  if (s < a) return 0.5 * vmax / a * s * s;
  if (s > 1.0 - a) {
    const double r = 1.0 - s;
    return 1.0 - 0.5 * vmax / a * r * r;
  }
  return 0.5 * vmax * a + vmax * (s - a);
}

/// Configuration at frame t: held before, between and after motion windows.
inline double object_theta(const SimObject& o, int t) {
  double theta = 0.0;
  for (const auto& m : o.motions) {
    if (t < m.window.t_start) break;
    const int len = m.window.length() - 1;
    if (t >= m.window.t_end - 1 || len <= 0) {
      theta = m.to;
    } else {
      theta = m.from + (m.to - m.from) * trapezoid(static_cast<double>(t - m.window.t_start) / len, m.accel);
    }
  }
  return theta;
}

inline RigidTransform object_motion(const SimObject& o, int t) {
  if (!o.axis) return RigidTransform::identity();
  return exp_map(twist_from_axis(*o.axis), object_theta(o, t));
}

inline void validate(const SceneSpec& s) {
  auto bad = [&](const std::string& m) { fail(ErrorKind::kValidation, "scene '" + s.name + "': " + m); };
  if (s.n_frames < 2) bad("n_frames must be >= 2");
  if (!(s.fps > 0.0)) bad("fps must be > 0");
  if (!s.intrinsics.is_valid()) bad("invalid intrinsics");
  if (s.camera_path.size() != static_cast<std::size_t>(s.n_frames)) bad("camera path length");
  const auto& n = s.noise;
  if (!(n.pixel_sigma >= 0 && n.point_sigma >= 0 && n.depth_sigma >= 0 && n.drift >= 0))
    bad("noise magnitudes must be >= 0");
  if (!(n.dropout >= 0.0 && n.dropout < 1.0)) bad("dropout must lie in [0, 1)");
  if (s.n_tracks < 0 || s.query_stride < 1) bad("track sampling parameters");
  for (const auto& o : s.objects) {
    if (o.axis && std::abs(o.axis->direction.norm() - 1.0) > 1e-9) bad(o.name + ": axis not unit");
    int last_end = 0;
    for (const auto& m : o.motions) {
      if (!o.axis) bad(o.name + ": motion without axis");
      if (m.window.t_start < last_end || m.window.t_end <= m.window.t_start ||
          m.window.t_end > s.n_frames) {
        bad(o.name + ": motion windows must be ordered, disjoint and inside the sequence");
      }
      last_end = m.window.t_end;
    }
  }
  for (const auto& c : s.children) {
    if (c.parent < 0 || c.parent >= static_cast<int>(s.objects.size())) bad(c.name + ": bad parent");
  }
  for (const auto& d : s.distractors) {
    if (d.t_start < 0 || d.t_end > s.n_frames || d.t_end <= d.t_start) bad("distractor window");
  }
}

// --------------------------------------------------------------------------
// Rendering

namespace detail {

inline std::mt19937_64 frame_rng(std::uint64_t seed, std::uint64_t t, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

enum class Owner : std::uint8_t { kStatic, kObject, kChild };

struct WorldBox {
  Box box;
  Owner owner = Owner::kStatic;
  int index = 0;  // object or child index
};

// All boxes with their per-frame placement.
inline std::vector<WorldBox> scene_boxes(const SceneSpec& s, int t) {
  std::vector<WorldBox> out;
  for (const auto& b : s.static_geometry) out.push_back({b, Owner::kStatic, 0});
  for (std::size_t o = 0; o < s.objects.size(); ++o) {
    const RigidTransform m = object_motion(s.objects[o], t);
    for (const auto& b : s.objects[o].boxes) out.push_back({b.transformed(m), Owner::kObject, static_cast<int>(o)});
  }
  for (std::size_t c = 0; c < s.children.size(); ++c) {
    const auto& ch = s.children[c];
    const RigidTransform m = ch.relation == ChildRelation::kArticulated
                                 ? object_motion(s.objects[ch.parent], t)
                                 : RigidTransform::identity();
    for (const auto& b : ch.boxes) out.push_back({b.transformed(m), Owner::kChild, static_cast<int>(c)});
  }
  return out;
}

struct RenderedFrame {
  DepthImage depth;              // noiseless
  std::vector<std::int32_t> id;  // box * 6 + face + 1, 0 = miss
};

inline RenderedFrame render(const std::vector<WorldBox>& boxes, const CameraIntrinsics& k,
                            const RigidTransform& pose) {
  RenderedFrame f;
  f.depth = DepthImage(k.width, k.height, 0.0);
  f.id.assign(k.pixel_count(), 0);
  std::vector<double> zbuf(k.pixel_count(), std::numeric_limits<double>::infinity());
  const RigidTransform cam_from_world = pose.inverse();
  const Vec3 origin = pose.translation;
  for (std::size_t bi = 0; bi < boxes.size(); ++bi) {
    const Box& box = boxes[bi].box;
    int c0 = 0, c1 = k.width - 1, r0 = 0, r1 = k.height - 1;
    bool all_front = true;
    double lu = 1e30, hu = -1e30, lv = 1e30, hv = -1e30;
    for (const auto& corner : box.corners()) {
      const Vec3 pc = cam_from_world.apply(corner);
      if (pc.z() < 1e-3) {
        all_front = false;
        break;
      }
      const double u = k.fx * pc.x() / pc.z() + k.cx;
      const double v = k.fy * pc.y() / pc.z() + k.cy;
      lu = std::min(lu, u);
      hu = std::max(hu, u);
      lv = std::min(lv, v);
      hv = std::max(hv, v);
    }
    if (all_front) {
      c0 = std::max(c0, static_cast<int>(std::floor(lu)));
      c1 = std::min(c1, static_cast<int>(std::ceil(hu)));
      r0 = std::max(r0, static_cast<int>(std::floor(lv)));
      r1 = std::min(r1, static_cast<int>(std::ceil(hv)));
    }
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const Vec3 dir = pose.rotation * Vec3((c - k.cx) / k.fx, (r - k.cy) / k.fy, 1.0);
        double t_hit;
        int face;
        if (!ray_box(box, origin, dir, t_hit, face)) continue;
        const std::size_t i = static_cast<std::size_t>(r) * k.width + c;
        if (t_hit < zbuf[i]) {
          zbuf[i] = t_hit;
          f.id[i] = static_cast<std::int32_t>(bi * 6 + face + 1);
        }
      }
    }
  }
  for (std::size_t i = 0; i < zbuf.size(); ++i) {
    // Stored at float precision so in-memory and on-disk bundles agree.
    if (std::isfinite(zbuf[i])) f.depth.data[i] = static_cast<float>(zbuf[i]);
  }
  return f;
}

inline void draw_disk(Mask& m, double u, double v, double radius) {
  const int c0 = std::max(0, static_cast<int>(std::floor(u - radius)));
  const int c1 = std::min(m.width - 1, static_cast<int>(std::ceil(u + radius)));
  const int r0 = std::max(0, static_cast<int>(std::floor(v - radius)));
  const int r1 = std::min(m.height - 1, static_cast<int>(std::ceil(v + radius)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if ((c - u) * (c - u) + (r - v) * (r - v) <= radius * radius) m.set(r, c);
    }
  }
}

// A surface point followed by the simulated tracker.
struct TrackSeed {
  Owner owner = Owner::kStatic;
  int index = 0;
  int box = 0;        // position in the scene_boxes list
  int face = 0;
  Vec3 local;         // in the owner's closed configuration
  int query_frame = 0;
};

inline RigidTransform owner_motion(const SceneSpec& s, Owner owner, int index, int t) {
  if (owner == Owner::kObject) return object_motion(s.objects[index], t);
  if (owner == Owner::kChild && s.children[index].relation == ChildRelation::kArticulated) {
    return object_motion(s.objects[s.children[index].parent], t);
  }
  return RigidTransform::identity();
}

// True when the four pixels around (u, v) all show the given box face.
inline bool face_visible(const RenderedFrame& f, const CameraIntrinsics& k, double u, double v,
                         std::int32_t id) {
  const int c0 = static_cast<int>(std::floor(u));
  const int r0 = static_cast<int>(std::floor(v));
  if (c0 < 0 || r0 < 0 || c0 + 1 >= k.width || r0 + 1 >= k.height) return false;
  for (int dr = 0; dr <= 1; ++dr) {
    for (int dc = 0; dc <= 1; ++dc) {
      if (f.id[static_cast<std::size_t>(r0 + dr) * k.width + c0 + dc] != id) return false;
    }
  }
  return true;
}

}  // namespace detail

struct SimOutput {
  SceneBundle bundle;
  PointTracks3D gt_tracks;            // noiseless world positions, true visibility
  std::vector<std::vector<double>> object_thetas;  // per object, per frame
};

/// Renders the scene and samples everything a bundle holds.
inline SimOutput simulate(const SceneSpec& spec) {
  validate(spec);
  const CameraIntrinsics& k = spec.intrinsics;
  const int n_frames = spec.n_frames;

  SimOutput out;
  SceneBundle& b = out.bundle;
  b.n_frames = n_frames;
  b.fps = spec.fps;
  b.intrinsics = k;
  b.poses = spec.camera_path;

  std::vector<detail::RenderedFrame> frames(static_cast<std::size_t>(n_frames));
  parallel_for(static_cast<std::size_t>(n_frames), [&](std::size_t t) {
    frames[t] = detail::render(detail::scene_boxes(spec, static_cast<int>(t)), k, spec.camera_path[t]);
  });

  // Depth with per-pixel noise and agent masks.
  b.depth.resize(static_cast<std::size_t>(n_frames));
  b.agent_masks.assign(static_cast<std::size_t>(n_frames), Mask(k.width, k.height));
  parallel_for(static_cast<std::size_t>(n_frames), [&](std::size_t t) {
    DepthImage d = frames[t].depth;
    if (spec.noise.depth_sigma > 0.0) {
      auto rng = detail::frame_rng(spec.seed, t, 1);
      std::normal_distribution<double> n(0.0, spec.noise.depth_sigma);
      for (auto& v : d.data) {
        const double e = n(rng);
        if (v > 0.0) v = static_cast<float>(std::max(v + e, 1e-3));
      }
    }
    b.depth[t] = std::move(d);
    const int ti = static_cast<int>(t);
    const RigidTransform cam = spec.camera_path[t].inverse();
    auto disk_at = [&](const Vec3& world) {
      const Projection p = project_point(world, k, cam);
      if (p.depth > 0.0) detail::draw_disk(b.agent_masks[t], p.u, p.v, spec.agent_radius_px);
    };
    for (const auto& o : spec.objects) {
      for (const auto& m : o.motions) {
        if (ti >= m.window.t_start && ti < m.window.t_end) disk_at(object_motion(o, ti).apply(o.handle));
      }
    }
    for (const auto& dw : spec.distractors) {
      if (ti >= dw.t_start && ti < dw.t_end && !spec.objects.empty()) {
        disk_at(object_motion(spec.objects.front(), ti).apply(spec.objects.front().handle));
      }
    }
  });

  // Track seeds: query pixels on visible surfaces at regularly spaced frames.
  const auto boxes0 = detail::scene_boxes(spec, 0);
  std::vector<detail::TrackSeed> seeds;
  std::vector<int> query_frames;
  for (int t = 0; t < n_frames; t += spec.query_stride) query_frames.push_back(t);
  const int per_frame = query_frames.empty() ? 0
                                             : (spec.n_tracks + static_cast<int>(query_frames.size()) - 1) /
                                                   static_cast<int>(query_frames.size());
  for (int tq : query_frames) {
    auto rng = detail::frame_rng(spec.seed, static_cast<std::uint64_t>(tq), 3);
    std::uniform_real_distribution<double> uu(1.0, k.width - 2.0), vv(1.0, k.height - 2.0);
    const auto boxes = detail::scene_boxes(spec, tq);
    const RigidTransform& pose = spec.camera_path[tq];
    int made = 0;
    for (int attempt = 0; attempt < 50 * per_frame && made < per_frame &&
                          static_cast<int>(seeds.size()) < spec.n_tracks;
         ++attempt) {
      const double u = uu(rng), v = vv(rng);
      const int c = static_cast<int>(std::lround(u)), r = static_cast<int>(std::lround(v));
      const std::int32_t id = frames[tq].id[static_cast<std::size_t>(r) * k.width + c];
      if (id == 0 || !detail::face_visible(frames[tq], k, u, v, id)) continue;
      const int bi = (id - 1) / 6;
      const Vec3 dir = pose.rotation * Vec3((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      double t_hit;
      int face;
      if (!ray_box(boxes[bi].box, pose.translation, dir, t_hit, face)) continue;
      detail::TrackSeed s;
      s.owner = boxes[bi].owner;
      s.index = boxes[bi].index;
      s.box = bi;
      s.face = face;
      const Vec3 world = pose.translation + t_hit * dir;
      s.local = detail::owner_motion(spec, s.owner, s.index, tq).inverse().apply(world);
      s.query_frame = tq;
      seeds.push_back(s);
      ++made;
    }
  }

  const int n_tr = static_cast<int>(seeds.size());
  b.tracks = PointTracks2D(n_frames, n_tr);
  out.gt_tracks = PointTracks3D(n_frames, n_tr);

  // Drift: per-track random walk anchored at the query frame.
  std::vector<Vec3> drift(static_cast<std::size_t>(n_frames) * n_tr, Vec3::Zero());
  if (spec.noise.drift > 0.0) {
    for (int f = 0; f < n_tr; ++f) {
      auto rng = detail::frame_rng(spec.seed, static_cast<std::uint64_t>(f), 4);
      std::normal_distribution<double> n(0.0, spec.noise.drift);
      const int tq = seeds[f].query_frame;
      for (int t = tq + 1; t < n_frames; ++t) {
        drift[static_cast<std::size_t>(t) * n_tr + f] =
            drift[static_cast<std::size_t>(t - 1) * n_tr + f] + Vec3(n(rng), n(rng), n(rng));
      }
      for (int t = tq - 1; t >= 0; --t) {
        drift[static_cast<std::size_t>(t) * n_tr + f] =
            drift[static_cast<std::size_t>(t + 1) * n_tr + f] + Vec3(n(rng), n(rng), n(rng));
      }
    }
  }

  parallel_for(static_cast<std::size_t>(n_frames), [&](std::size_t tu) {
    const int t = static_cast<int>(tu);
    auto rng = detail::frame_rng(spec.seed, tu, 2);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const RigidTransform cam = spec.camera_path[t].inverse();
    for (int f = 0; f < n_tr; ++f) {
      // Draw every random number unconditionally so the stream layout does
      // not depend on visibility.
      const Vec3 jitter(n01(rng), n01(rng), n01(rng));
      const Vec2 pix(n01(rng), n01(rng));
      const double drop = u01(rng);
      const auto& s = seeds[f];
      const Vec3 world = detail::owner_motion(spec, s.owner, s.index, t).apply(s.local);
      out.gt_tracks.at(t, f) = world;
      const Projection p = project_point(world, k, cam);
      if (!p.valid) continue;
      const std::int32_t id = static_cast<std::int32_t>(s.box * 6 + s.face + 1);
      if (!detail::face_visible(frames[t], k, p.u, p.v, id)) continue;
      out.gt_tracks.visibility[out.gt_tracks.index(t, f)] = 1;
      if (drop < spec.noise.dropout) continue;
      const Vec3 noisy = world + drift[tu * n_tr + f] + spec.noise.point_sigma * jitter;
      const Projection q = project_point(noisy, k, cam);
      if (!(q.depth > 0.0)) continue;
      const Vec2 uv = Vec2(q.u, q.v) + spec.noise.pixel_sigma * pix;
      if (!inside_image(k, uv.x(), uv.y())) continue;
      b.tracks.positions[b.tracks.index(t, f)] = uv;
      b.tracks.visibility[b.tracks.index(t, f)] = 1;
    }
  });

  // Object and child nodes.
  int next_id = 0;
  std::vector<int> object_ids;
  std::size_t box_offset = spec.static_geometry.size();
  for (std::size_t o = 0; o < spec.objects.size(); ++o) {
    BundleObject bo;
    bo.id = next_id++;
    bo.name = spec.objects[o].name;
    for (const auto& box : spec.objects[o].boxes) {
      auto pts = sample_box_surface(box, spec.surface_spacing);
      bo.points.insert(bo.points.end(), pts.begin(), pts.end());
    }
    bo.mask_frame = 0;
    bo.mask = Mask(k.width, k.height);
    for (std::size_t i = 0; i < frames[0].id.size(); ++i) {
      const int id = frames[0].id[i];
      if (id == 0) continue;
      const auto bi = static_cast<std::size_t>((id - 1) / 6);
      if (boxes0[bi].owner == detail::Owner::kObject && boxes0[bi].index == static_cast<int>(o)) {
        bo.mask.data[i] = 1;
      }
    }
    object_ids.push_back(bo.id);
    b.objects.push_back(std::move(bo));
    box_offset += spec.objects[o].boxes.size();
  }
  for (std::size_t c = 0; c < spec.children.size(); ++c) {
    BundleChild bc;
    bc.id = next_id++;
    bc.name = spec.children[c].name;
    for (const auto& box : spec.children[c].boxes) {
      auto pts = sample_box_surface(box, spec.surface_spacing);
      bc.points.insert(bc.points.end(), pts.begin(), pts.end());
    }
    bc.masks.assign(static_cast<std::size_t>(n_frames), Mask(k.width, k.height));
    for (int t = 0; t < n_frames; ++t) {
      for (std::size_t i = 0; i < frames[t].id.size(); ++i) {
        const int id = frames[t].id[i];
        if (id == 0) continue;
        const auto bi = static_cast<std::size_t>((id - 1) / 6);
        if (boxes0[bi].owner == detail::Owner::kChild && boxes0[bi].index == static_cast<int>(c)) {
          bc.masks[t].data[i] = 1;
        }
      }
    }
    b.children.push_back(std::move(bc));
  }

  GroundTruth gt;
  gt.n_frames = n_frames;
  gt.fps = spec.fps;
  out.object_thetas.resize(spec.objects.size());
  for (std::size_t o = 0; o < spec.objects.size(); ++o) {
    const auto& obj = spec.objects[o];
    auto& th = out.object_thetas[o];
    for (int t = 0; t < n_frames; ++t) th.push_back(object_theta(obj, t));
    for (const auto& m : obj.motions) {
      GtArticulation a;
      a.object = object_ids[o];
      a.segment = m.window;
      a.axis = *obj.axis;
      a.thetas = th;
      a.mode = std::abs(m.to) >= std::abs(m.from) ? ModeValue::kOpening : ModeValue::kClosing;
      gt.articulations.push_back(std::move(a));
    }
  }
  std::stable_sort(gt.articulations.begin(), gt.articulations.end(),
                   [](const GtArticulation& a, const GtArticulation& c) {
                     return a.segment.t_start < c.segment.t_start;
                   });
  for (std::size_t c = 0; c < spec.children.size(); ++c) {
    gt.children.push_back({b.children[c].id, object_ids[spec.children[c].parent],
                           spec.children[c].relation});
  }
  b.gt = std::move(gt);
  return out;
}

// --------------------------------------------------------------------------
// Presets

namespace detail {

inline std::vector<Box> room() {
  return {
      Box::from_bounds({-3.0, -1.0, -0.1}, {3.0, 3.0, 0.0}),  // floor
      Box::from_bounds({-3.0, 2.3, 0.0}, {3.0, 2.4, 3.0}),    // back wall
      Box::from_bounds({-1.6, -1.0, 0.0}, {-1.5, 2.3, 3.0}),  // left wall
      Box::from_bounds({1.5, -1.0, 0.0}, {1.6, 2.3, 3.0}),    // right wall
  };
}

// Camera path with a gentle sideways sway around `eye`.
inline std::vector<RigidTransform> sway_path(int n, const Vec3& eye, const Vec3& target,
                                             double amplitude, double period) {
  std::vector<RigidTransform> path;
  for (int t = 0; t < n; ++t) {
    const double ph = 2.0 * kPi * t / period;
    const Vec3 e = eye + Vec3(amplitude * std::sin(ph), 0.0, 0.4 * amplitude * std::sin(2 * ph));
    path.push_back(look_at(e, target, Vec3::UnitZ()));
  }
  return path;
}

inline SimObject drawer(const std::string& name, double x0, double x1, double z0, double z1,
                        double travel, int t_start, int len) {
  SimObject o;
  o.name = name;
  o.boxes = {Box::from_bounds({x0, 1.49, z0}, {x1, 1.94, z1})};
  o.axis = ScrewAxis{AxisKind::kPrismatic, Vec3(0, -1, 0), Vec3::Zero()};
  if (len > 0) o.motions = {{{t_start, t_start + len}, 0.0, travel}};
  o.handle = Vec3(0.5 * (x0 + x1), 1.49, 0.5 * (z0 + z1));
  return o;
}

// Door panel in front of a cabinet face; the hinge is the left edge.
inline SimObject door(const std::string& name, double x_hinge, double width, double z0, double z1,
                      double angle_rad, int t_start, int len) {
  SimObject o;
  o.name = name;
  o.boxes = {Box::from_bounds({x_hinge, 1.47, z0}, {x_hinge + width, 1.49, z1})};
  o.axis = ScrewAxis{AxisKind::kRevolute, Vec3(0, 0, -1), Vec3(x_hinge, 1.49, 0.0)};
  if (len > 0) o.motions = {{{t_start, t_start + len}, 0.0, angle_rad}};
  o.handle = Vec3(x_hinge + width - 0.04, 1.47, 0.5 * (z0 + z1));
  return o;
}

inline int jitter(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace detail

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"drawer", "door", "small-arc-door",
                                                 "two-drawer", "fridge", "kitchen", "static"};
  return names;
}

/// Named scenes. Timing and camera sway vary with the seed where noted; the
/// geometry and ground-truth axes of the single-part presets are fixed.
inline SceneSpec preset(const std::string& name, std::uint64_t seed = 0) {
  auto rng = detail::frame_rng(seed, 0xA11CE, 5);
  SceneSpec s;
  s.name = name;
  s.seed = seed;
  s.static_geometry = detail::room();
  const Vec3 eye(0.1, 0.55, 1.25);
  const Vec3 target(0.0, 1.5, 0.55);
  const int lead = 12;

  if (name == "drawer" || name == "door" || name == "small-arc-door" || name == "two-drawer") {
    s.static_geometry.push_back(Box::from_bounds({-0.45, 1.5, 0.0}, {0.45, 2.0, 0.9}));
    const int len = name == "drawer" || name == "two-drawer" ? 32 : 36;
    s.n_frames = lead + len + 12;
    if (name == "drawer") {
      s.objects.push_back(detail::drawer("drawer", -0.3, 0.3, 0.55, 0.8, 0.35, lead, len));
    } else if (name == "two-drawer") {
      // The seed picks which of the two drawers is pulled.
      const bool upper = detail::jitter(rng, 0, 1) == 0;
      s.objects.push_back(detail::drawer("upper-drawer", -0.3, 0.3, 0.55, 0.8, upper ? 0.35 : 0.0,
                                         upper ? lead : 0, upper ? len : 0));
      s.objects.push_back(detail::drawer("lower-drawer", -0.3, 0.3, 0.2, 0.45, upper ? 0.0 : 0.35,
                                         upper ? 0 : lead, upper ? 0 : len));
    } else {
      if (name == "door") {
        s.objects.push_back(detail::door(name, -0.225, 0.45, 0.1, 0.8, kPi / 3.0, lead, len));
      } else {
        // Wide panel so enough of it clears the minimum track length.
        s.objects.push_back(detail::door(name, -0.4, 0.8, 0.1, 0.8, kPi / 12.0, lead, len));
      }
    }
    s.camera_path = detail::sway_path(s.n_frames, eye, target, 0.03, 90.0);
  } else if (name == "fridge") {
    // Hollow body: walls around an open front at y = 1.5.
    const double x0 = -0.35, x1 = 0.35, z0 = 0.1, z1 = 1.1, y0 = 1.5, y1 = 2.1, w = 0.03;
    s.static_geometry.push_back(Box::from_bounds({x0, y0, 0.0}, {x1, y1, z0 + w}));      // bottom
    s.static_geometry.push_back(Box::from_bounds({x0, y0, z1 - w}, {x1, y1, z1}));       // top
    s.static_geometry.push_back(Box::from_bounds({x0, y0, z0}, {x0 + w, y1, z1}));       // left
    s.static_geometry.push_back(Box::from_bounds({x1 - w, y0, z0}, {x1, y1, z1}));       // right
    s.static_geometry.push_back(Box::from_bounds({x0, y1 - w, z0}, {x1, y1, z1}));       // back
    const int len = 40;
    s.n_frames = lead + len + 12;
    SimObject d;
    d.name = "fridge-door";
    d.boxes = {Box::from_bounds({x0, 1.47, z0}, {x1, 1.5, z1}),
               Box::from_bounds({x0 + 0.05, 1.58, 0.5}, {x1 - 0.05, 1.6, 0.56})};  // bin lip
    d.axis = ScrewAxis{AxisKind::kRevolute, Vec3(0, 0, -1), Vec3(x0, 1.5, 0.0)};
    d.motions = {{{lead, lead + len}, 0.0, 85.0 * kPi / 180.0}};
    d.handle = Vec3(x1 - 0.05, 1.47, 0.6);
    s.objects.push_back(d);
    s.children.push_back({"door-bottle", {Box::from_bounds({-0.05, 1.51, 0.5}, {0.03, 1.57, 0.68})},
                          0, ChildRelation::kArticulated});
    s.children.push_back({"shelf-box", {Box::from_bounds({0.02, 1.75, z0 + w}, {0.24, 1.95, 0.32})},
                          0, ChildRelation::kStatic});
    s.camera_path =
        detail::sway_path(s.n_frames, Vec3(0.3, 0.05, 1.3), Vec3(0.0, 1.5, 0.6), 0.02, 90.0);
  } else if (name == "kitchen") {
    // Door on the left, two drawers on the right; three or four interactions
    // in random order with random durations and gaps, plus a distractor.
    s.static_geometry.push_back(Box::from_bounds({-0.7, 1.5, 0.0}, {0.7, 2.0, 0.9}));
    std::vector<SimObject> objs = {
        detail::drawer("upper-drawer", 0.05, 0.6, 0.55, 0.8, 0.0, 0, 0),
        detail::drawer("lower-drawer", 0.05, 0.6, 0.2, 0.45, 0.0, 0, 0),
        detail::door("door", -0.675, 0.45, 0.1, 0.8, 0.0, 0, 0),
    };
    std::vector<int> order = {0, 1, 2};
    std::shuffle(order.begin(), order.end(), rng);
    int t = detail::jitter(rng, 15, 25);
    std::vector<double> state(3, 0.0);
    const int events = 3 + detail::jitter(rng, 0, 1);
    bool distractor_done = false;
    for (int e = 0; e < events; ++e) {
      const int o = e < 3 ? order[e] : order[0];
      const bool is_door = o == 2;
      const int len = is_door ? detail::jitter(rng, 26, 36) : detail::jitter(rng, 22, 32);
      double to;
      if (state[o] != 0.0) {
        to = 0.0;  // close what is open
      } else {
        to = is_door ? (70.0 + detail::jitter(rng, 0, 25)) * kPi / 180.0
                     : 0.30 + 0.01 * detail::jitter(rng, 0, 10);
      }
      objs[o].motions.push_back({{t, t + len}, state[o], to, 0.1});
      state[o] = to;
      t += len;
      const int gap = detail::jitter(rng, 25, 45);
      if (!distractor_done && gap >= 35 && e + 1 < events) {
        s.distractors.push_back({t + 8, t + 8 + 16});
        distractor_done = true;
      }
      t += gap;
    }
    s.n_frames = t;
    s.objects = std::move(objs);
    s.camera_path = detail::sway_path(s.n_frames, Vec3(0.0, 0.05, 1.35), Vec3(0.0, 1.5, 0.5), 0.05,
                                      120.0 + detail::jitter(rng, 0, 60));
    s.n_tracks = 900;
    s.noise.depth_sigma = 0.002;
    s.noise.pixel_sigma = 0.3;
  } else if (name == "static") {
    s.static_geometry.push_back(Box::from_bounds({-0.45, 1.5, 0.0}, {0.45, 2.0, 0.9}));
    s.objects.push_back(detail::drawer("drawer", -0.3, 0.3, 0.55, 0.8, 0.0, 0, 0));
    s.n_frames = 40;
    s.camera_path = detail::sway_path(s.n_frames, eye, target, 0.05, 60.0);
  } else {
    fail(ErrorKind::kValidation, "unknown preset '" + name + "'");
  }
  validate(s);
  return s;
}

}  // namespace artiscene
