// artiscene - articulated 3D scene graphs from point trajectories
//
// SceneBundle: the on-disk sequence format shared by the simulator and the
// pipeline.
//
//   meta.json            version, n_frames, fps, intrinsics, poses (4x4 row-major)
//   depth_%06d.bin       float32 little-endian, row-major, meters, 0 = invalid
//   masks_%06d.bin       agent mask, packed bits, row-major, LSB first
//   tracks.json          positions T x F x 2, visibility T x F
//   objects.json         object and child nodes; point sets in float64 xyz
//                        sidecars, child masks as T stacked packed-bit images
//   gt.json              ground truth (simulator bundles only)

#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "artiscene/camera.hpp"
#include "artiscene/errors.hpp"
#include "artiscene/graph.hpp"
#include "artiscene/segmenter.hpp"
#include "artiscene/tracks.hpp"
#include "artiscene/twist_estimator.hpp"

namespace artiscene {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "bundle IO assumes a little-endian host");

inline constexpr int kBundleVersion = 1;

struct BundleObject {
  int id = 0;
  std::string name;
  std::vector<Vec3> points;
  int mask_frame = 0;
  Mask mask;  // visible pixels at mask_frame
};

struct BundleChild {
  int id = 0;
  std::string name;
  std::vector<Vec3> points;
  std::vector<Mask> masks;  // visible pixels per frame
};

struct GtArticulation {
  int object = 0;
  InteractionSegment segment;
  ScrewAxis axis;
  std::vector<double> thetas;  // configuration of the object at every frame
  ModeValue mode = ModeValue::kOpening;
};

struct GtChild {
  int child = 0;
  int parent = 0;
  ChildRelation relation = ChildRelation::kStatic;
};

struct GroundTruth {
  int n_frames = 0;
  double fps = 30.0;
  std::vector<GtArticulation> articulations;
  std::vector<GtChild> children;

  [[nodiscard]] std::vector<InteractionSegment> segments() const {
    std::vector<InteractionSegment> s;
    for (const auto& a : articulations) s.push_back(a.segment);
    std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) {
      return a.t_start < b.t_start || (a.t_start == b.t_start && a.t_end < b.t_end);
    });
    return s;
  }
};

struct SceneBundle {
  int n_frames = 0;
  double fps = 30.0;
  CameraIntrinsics intrinsics;
  std::vector<RigidTransform> poses;
  std::vector<DepthImage> depth;
  std::vector<Mask> agent_masks;
  PointTracks2D tracks;
  std::vector<BundleObject> objects;
  std::vector<BundleChild> children;
  std::optional<GroundTruth> gt;

  [[nodiscard]] std::vector<DepthFrame> depth_frames() const {
    std::vector<DepthFrame> out;
    out.reserve(depth.size());
    for (int t = 0; t < n_frames; ++t) out.push_back({t, depth[t], poses[t]});
    return out;
  }
  [[nodiscard]] std::vector<AgentMaskFrame> mask_frames() const {
    std::vector<AgentMaskFrame> out;
    out.reserve(agent_masks.size());
    for (int t = 0; t < n_frames; ++t) out.push_back({t, agent_masks[t]});
    return out;
  }
};

/// Checks that every per-frame payload matches the declared dimensions.
inline void validate(const SceneBundle& b) {
  validate(b.intrinsics);
  const auto n = static_cast<std::size_t>(b.n_frames);
  if (b.n_frames < 1) fail(ErrorKind::kShape, "bundle: n_frames must be >= 1");
  if (b.poses.size() != n || b.depth.size() != n || b.agent_masks.size() != n) {
    fail(ErrorKind::kShape, "bundle: per-frame stream lengths differ from n_frames");
  }
  for (const auto& p : b.poses) {
    if (!p.is_valid(1e-6)) fail(ErrorKind::kValidation, "bundle: pose is not a rigid transform");
  }
  for (const auto& d : b.depth) check_dims(d, b.intrinsics);
  for (const auto& m : b.agent_masks) {
    if (m.width != b.intrinsics.width || m.height != b.intrinsics.height) {
      fail(ErrorKind::kShape, "bundle: agent mask dimensions differ from intrinsics");
    }
  }
  if (b.tracks.frames != b.n_frames) fail(ErrorKind::kShape, "bundle: track frame count mismatch");
  for (const auto& c : b.children) {
    if (c.masks.size() != n) fail(ErrorKind::kShape, "bundle: child mask count mismatch");
  }
}

// --------------------------------------------------------------------------
// Low-level file helpers

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary sibling and renames it into place.
inline void write_file_atomic(const fs::path& path, const std::string& data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kIo, "cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) fail(ErrorKind::kIo, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Canonical text form: sorted keys, shortest round-trip doubles.
inline std::string dump_json(const Json& j) { return j.dump() + "\n"; }

inline Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::kValidation, path.string() + ": " + e.what());
  }
}

inline std::string frame_name(const char* prefix, int t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%06d.bin", prefix, t);
  return buf;
}

inline std::string encode_depth(const DepthImage& d) {
  std::string out(d.data.size() * sizeof(float), '\0');
  for (std::size_t i = 0; i < d.data.size(); ++i) {
    const double v = d.data[i];
    const float f = (std::isfinite(v) && v > 0.0) ? static_cast<float>(v) : 0.0f;
    std::memcpy(out.data() + i * sizeof(float), &f, sizeof(float));
  }
  return out;
}

inline DepthImage decode_depth(const std::string& raw, int width, int height,
                               const std::string& what) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (raw.size() != n * sizeof(float)) {
    fail(ErrorKind::kShape, what + ": expected " + std::to_string(n * sizeof(float)) +
                                " bytes, found " + std::to_string(raw.size()));
  }
  DepthImage d(width, height);
  for (std::size_t i = 0; i < n; ++i) {
    float f;
    std::memcpy(&f, raw.data() + i * sizeof(float), sizeof(float));
    d.data[i] = f;
  }
  return d;
}

inline std::size_t packed_size(int width, int height) {
  return (static_cast<std::size_t>(width) * height + 7) / 8;
}

inline void encode_mask(const Mask& m, std::string& out) {
  const std::size_t base = out.size();
  out.resize(base + packed_size(m.width, m.height), '\0');
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    if (m.data[i]) out[base + i / 8] = static_cast<char>(out[base + i / 8] | (1u << (i % 8)));
  }
}

inline Mask decode_mask(const std::string& raw, std::size_t offset, int width, int height) {
  Mask m(width, height);
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    m.data[i] = (static_cast<unsigned char>(raw[offset + i / 8]) >> (i % 8)) & 1u;
  }
  return m;
}

inline std::string encode_points(const std::vector<Vec3>& pts) {
  std::string out(pts.size() * 3 * sizeof(double), '\0');
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::memcpy(out.data() + i * 3 * sizeof(double), pts[i].data(), 3 * sizeof(double));
  }
  return out;
}

inline std::vector<Vec3> decode_points(const std::string& raw, std::size_t n,
                                       const std::string& what) {
  if (raw.size() != n * 3 * sizeof(double)) {
    fail(ErrorKind::kShape, what + ": expected " + std::to_string(n) + " points");
  }
  std::vector<Vec3> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::memcpy(pts[i].data(), raw.data() + i * 3 * sizeof(double), 3 * sizeof(double));
  }
  return pts;
}

inline Json pose_json(const RigidTransform& p) {
  const Mat4 m = p.matrix();
  Json a = Json::array();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) a.push_back(m(r, c));
  }
  return a;
}

inline RigidTransform pose_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 16) fail(ErrorKind::kValidation, "pose must have 16 entries");
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = j.at(4 * r + c).get<double>();
  }
  return RigidTransform::from_matrix(m);
}

inline Json intrinsics_json(const CameraIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy},
          {"width", k.width}, {"height", k.height}};
}

inline CameraIntrinsics intrinsics_from_json(const Json& j) {
  CameraIntrinsics k;
  k.fx = j.at("fx").get<double>();
  k.fy = j.at("fy").get<double>();
  k.cx = j.at("cx").get<double>();
  k.cy = j.at("cy").get<double>();
  k.width = j.at("width").get<int>();
  k.height = j.at("height").get<int>();
  validate(k);
  return k;
}

inline Json tracks_json(const PointTracks2D& tr) {
  Json pos = Json::array();
  Json vis = Json::array();
  for (int t = 0; t < tr.frames; ++t) {
    Json prow = Json::array();
    Json vrow = Json::array();
    for (int f = 0; f < tr.tracks; ++f) {
      const Vec2& p = tr.at(t, f);
      prow.push_back(Json::array({p.x(), p.y()}));
      vrow.push_back(static_cast<int>(tr.visible(t, f)));
    }
    pos.push_back(std::move(prow));
    vis.push_back(std::move(vrow));
  }
  return {{"n_frames", tr.frames}, {"n_tracks", tr.tracks}, {"positions", pos}, {"visibility", vis}};
}

inline PointTracks2D tracks_from_json(const Json& j) {
  const int t_n = j.at("n_frames").get<int>();
  const int f_n = j.at("n_tracks").get<int>();
  const Json& pos = j.at("positions");
  const Json& vis = j.at("visibility");
  if (t_n < 0 || f_n < 0 || pos.size() != static_cast<std::size_t>(t_n) ||
      vis.size() != static_cast<std::size_t>(t_n)) {
    fail(ErrorKind::kShape, "tracks.json: frame count mismatch");
  }
  PointTracks2D tr(t_n, f_n);
  for (int t = 0; t < t_n; ++t) {
    if (pos[t].size() != static_cast<std::size_t>(f_n) ||
        vis[t].size() != static_cast<std::size_t>(f_n)) {
      fail(ErrorKind::kShape, "tracks.json: track count mismatch at frame " + std::to_string(t));
    }
    for (int f = 0; f < f_n; ++f) {
      const Json& p = pos[t][f];
      if (p.size() != 2) fail(ErrorKind::kShape, "tracks.json: positions must be pairs");
      tr.positions[tr.index(t, f)] = {p[0].get<double>(), p[1].get<double>()};
      tr.visibility[tr.index(t, f)] = vis[t][f].get<int>() != 0;
    }
  }
  return tr;
}

inline Json gt_json(const GroundTruth& gt) {
  Json doc;
  doc["n_frames"] = gt.n_frames;
  doc["fps"] = gt.fps;
  doc["articulations"] = Json::array();
  for (const auto& a : gt.articulations) {
    doc["articulations"].push_back({{"object", a.object},
                                    {"segment", {a.segment.t_start, a.segment.t_end}},
                                    {"axis", axis_json(a.axis)},
                                    {"kind", to_string(a.axis.kind)},
                                    {"thetas", a.thetas},
                                    {"mode", to_string(a.mode)}});
  }
  doc["children"] = Json::array();
  for (const auto& c : gt.children) {
    doc["children"].push_back(
        {{"child", c.child}, {"parent", c.parent}, {"relation", to_string(c.relation)}});
  }
  doc["segments"] = Json::array();
  for (const auto& s : gt.segments()) doc["segments"].push_back({s.t_start, s.t_end});
  return doc;
}

inline GroundTruth gt_from_json(const Json& j) {
  GroundTruth gt;
  gt.n_frames = j.at("n_frames").get<int>();
  gt.fps = j.at("fps").get<double>();
  for (const auto& a : j.at("articulations")) {
    GtArticulation g;
    g.object = a.at("object").get<int>();
    g.segment = {a.at("segment").at(0).get<int>(), a.at("segment").at(1).get<int>()};
    g.axis = axis_from_json(a.at("axis"));
    g.thetas = a.at("thetas").get<std::vector<double>>();
    g.mode = mode_from_string(a.at("mode").get<std::string>());
    gt.articulations.push_back(std::move(g));
  }
  for (const auto& c : j.at("children")) {
    gt.children.push_back({c.at("child").get<int>(), c.at("parent").get<int>(),
                           child_relation_from_string(c.at("relation").get<std::string>())});
  }
  return gt;
}

// --------------------------------------------------------------------------
// Bundle IO

inline void write_bundle(const SceneBundle& b, const fs::path& dir) {
  validate(b);
  fs::create_directories(dir);
  Json meta;
  meta["version"] = kBundleVersion;
  meta["n_frames"] = b.n_frames;
  meta["fps"] = b.fps;
  meta["intrinsics"] = intrinsics_json(b.intrinsics);
  meta["poses"] = Json::array();
  for (const auto& p : b.poses) meta["poses"].push_back(pose_json(p));
  for (int t = 0; t < b.n_frames; ++t) {
    write_file_atomic(dir / frame_name("depth", t), encode_depth(b.depth[t]));
    std::string m;
    encode_mask(b.agent_masks[t], m);
    write_file_atomic(dir / frame_name("masks", t), m);
  }
  write_file_atomic(dir / "tracks.json", dump_json(tracks_json(b.tracks)));

  Json objs;
  objs["objects"] = Json::array();
  for (const auto& o : b.objects) {
    const std::string pts = "object_" + std::to_string(o.id) + ".bin";
    const std::string msk = "object_" + std::to_string(o.id) + "_mask.bin";
    write_file_atomic(dir / pts, encode_points(o.points));
    std::string m;
    encode_mask(o.mask, m);
    write_file_atomic(dir / msk, m);
    objs["objects"].push_back({{"id", o.id}, {"name", o.name}, {"points", pts},
                               {"n_points", o.points.size()}, {"mask_frame", o.mask_frame},
                               {"mask", msk}});
  }
  objs["children"] = Json::array();
  for (const auto& c : b.children) {
    const std::string pts = "child_" + std::to_string(c.id) + ".bin";
    const std::string msk = "child_" + std::to_string(c.id) + "_masks.bin";
    write_file_atomic(dir / pts, encode_points(c.points));
    std::string m;
    for (const auto& mask : c.masks) encode_mask(mask, m);
    write_file_atomic(dir / msk, m);
    objs["children"].push_back({{"id", c.id}, {"name", c.name}, {"points", pts},
                                {"n_points", c.points.size()}, {"masks", msk}});
  }
  write_file_atomic(dir / "objects.json", dump_json(objs));
  if (b.gt) write_file_atomic(dir / "gt.json", dump_json(gt_json(*b.gt)));
  // meta.json last: its presence marks a complete bundle.
  write_file_atomic(dir / "meta.json", dump_json(meta));
}

inline SceneBundle read_bundle(const fs::path& dir) {
  SceneBundle b;
  try {
    const Json meta = read_json(dir / "meta.json");
    if (meta.at("version").get<int>() != kBundleVersion) {
      fail(ErrorKind::kVersion, "meta.json: unsupported bundle version " + meta.at("version").dump());
    }
    b.n_frames = meta.at("n_frames").get<int>();
    b.fps = meta.at("fps").get<double>();
    b.intrinsics = intrinsics_from_json(meta.at("intrinsics"));
    if (b.n_frames < 1) fail(ErrorKind::kShape, "meta.json: n_frames must be >= 1");
    if (meta.at("poses").size() != static_cast<std::size_t>(b.n_frames)) {
      fail(ErrorKind::kShape, "meta.json: pose count differs from n_frames");
    }
    for (const auto& p : meta.at("poses")) b.poses.push_back(pose_from_json(p));
    const int w = b.intrinsics.width, h = b.intrinsics.height;
    for (int t = 0; t < b.n_frames; ++t) {
      const std::string dn = frame_name("depth", t);
      b.depth.push_back(decode_depth(read_file(dir / dn), w, h, dn));
      const std::string mn = frame_name("masks", t);
      const std::string raw = read_file(dir / mn);
      if (raw.size() != packed_size(w, h)) {
        fail(ErrorKind::kShape, mn + ": expected " + std::to_string(packed_size(w, h)) +
                                    " bytes, found " + std::to_string(raw.size()));
      }
      b.agent_masks.push_back(decode_mask(raw, 0, w, h));
    }
    b.tracks = tracks_from_json(read_json(dir / "tracks.json"));

    const Json objs = read_json(dir / "objects.json");
    for (const auto& o : objs.at("objects")) {
      BundleObject bo;
      bo.id = o.at("id").get<int>();
      bo.name = o.at("name").get<std::string>();
      const std::string pf = o.at("points").get<std::string>();
      bo.points = decode_points(read_file(dir / pf), o.at("n_points").get<std::size_t>(), pf);
      bo.mask_frame = o.at("mask_frame").get<int>();
      const std::string mf = o.at("mask").get<std::string>();
      const std::string raw = read_file(dir / mf);
      if (raw.size() != packed_size(w, h)) fail(ErrorKind::kShape, mf + ": wrong size");
      bo.mask = decode_mask(raw, 0, w, h);
      b.objects.push_back(std::move(bo));
    }
    for (const auto& c : objs.at("children")) {
      BundleChild bc;
      bc.id = c.at("id").get<int>();
      bc.name = c.at("name").get<std::string>();
      const std::string pf = c.at("points").get<std::string>();
      bc.points = decode_points(read_file(dir / pf), c.at("n_points").get<std::size_t>(), pf);
      const std::string mf = c.at("masks").get<std::string>();
      const std::string raw = read_file(dir / mf);
      const std::size_t per = packed_size(w, h);
      if (raw.size() != per * static_cast<std::size_t>(b.n_frames)) {
        fail(ErrorKind::kShape, mf + ": wrong size");
      }
      for (int t = 0; t < b.n_frames; ++t) bc.masks.push_back(decode_mask(raw, per * t, w, h));
      b.children.push_back(std::move(bc));
    }
    if (fs::exists(dir / "gt.json")) b.gt = gt_from_json(read_json(dir / "gt.json"));
  } catch (const Json::exception& e) {
    fail(ErrorKind::kValidation, dir.string() + ": " + e.what());
  }
  validate(b);
  return b;
}

}  // namespace artiscene
