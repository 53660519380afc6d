// artiscene - articulated 3D scene graphs from point trajectories
//
// Scene graph assembly: candidate retrieval, the replay-based matching cost,
// contained-object relations and the versioned graph.json encoding.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "artiscene/bip.hpp"
#include "artiscene/camera.hpp"
#include "artiscene/errors.hpp"
#include "artiscene/geometry2d.hpp"
#include "artiscene/parallel.hpp"
#include "artiscene/segmenter.hpp"
#include "artiscene/tracks.hpp"
#include "artiscene/twist_estimator.hpp"

namespace artiscene {

using Json = nlohmann::json;

inline constexpr int kGraphVersion = 1;

enum class ChildRelation { kStatic, kArticulated, kNone };

inline std::string to_string(ChildRelation r) {
  switch (r) {
    case ChildRelation::kStatic: return "STATIC";
    case ChildRelation::kArticulated: return "ARTICULATED";
    case ChildRelation::kNone: return "NONE";
  }
  return "NONE";
}

inline ChildRelation child_relation_from_string(const std::string& s) {
  if (s == "STATIC") return ChildRelation::kStatic;
  if (s == "ARTICULATED") return ChildRelation::kArticulated;
  if (s == "NONE") return ChildRelation::kNone;
  fail(ErrorKind::kValidation, "unknown child relation '" + s + "'");
}

struct ObjectNode {
  int id = 0;
  std::vector<Vec3> points;
  Vec3 centroid = Vec3::Zero();
  Aabb aabb;
  std::vector<std::pair<int, Mask>> masks;  // (frame, mask) the node was observed in
  bool isolated = false;
  std::size_t n_points = 0;  // kept when points are not loaded
};

inline ObjectNode make_object(int id, std::vector<Vec3> points) {
  ObjectNode o;
  o.id = id;
  o.points = std::move(points);
  o.n_points = o.points.size();
  if (!o.points.empty()) {
    Vec3 s = Vec3::Zero();
    for (const auto& p : o.points) s += p;
    o.centroid = s / static_cast<double>(o.points.size());
  }
  o.aabb = bounding_box(o.points);
  return o;
}

struct GraphArticulation {
  int id = 0;
  InteractionSegment segment;
  ArticulationEstimate estimate;
};

struct GraphMatch {
  int articulation = 0;
  int object = 0;
  double cost = 0.0;
};

struct ChildEdge {
  int parent = 0;
  int child = 0;
  ChildRelation relation = ChildRelation::kNone;
};

struct SceneGraph {
  std::vector<ObjectNode> objects;
  std::vector<GraphArticulation> articulations;
  std::vector<GraphMatch> matches;
  std::vector<ChildEdge> children;
  std::vector<ObjectNode> contained;  // child nodes referenced by `children`
};

/// Ids of the k objects with centroids closest to `query`; ties go to the
/// earlier object.
inline std::vector<int> knn_candidates(const Vec3& query, std::span<const ObjectNode> objects,
                                       std::size_t k = 5) {
  std::vector<std::size_t> order(objects.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return (objects[a].centroid - query).squaredNorm() < (objects[b].centroid - query).squaredNorm();
  });
  order.resize(std::min(k, order.size()));
  std::vector<int> ids;
  for (auto i : order) ids.push_back(objects[i].id);
  return ids;
}

struct MatchFrames {
  std::span<const RigidTransform> poses;  // world-from-camera per sequence frame
  CameraIntrinsics intrinsics;
};

/// Mean over frames of 2 - (fraction of visible dynamic keypoints inside the
/// replayed object's projected hull + fraction of visible static keypoints
/// outside it). A frame whose hull is degenerate falls back to a 10 px
/// neighborhood of the projected points.
inline double match_cost(const ArticulationEstimate& art, const PointTracks2D& keypoints,
                         std::span<const TrackLabel> labels, const ObjectNode& object,
                         const MatchFrames& frames, double fallback_px = 10.0) {
  if (static_cast<int>(labels.size()) != keypoints.tracks) {
    fail(ErrorKind::kShape, "match_cost: one label per keypoint track required");
  }
  if (art.frames.size() != art.thetas.size()) {
    fail(ErrorKind::kShape, "match_cost: articulation frames and thetas differ in length");
  }
  double total = 0.0;
  int evaluated = 0;
  std::vector<Vec2> projected;
  for (std::size_t s = 0; s < art.thetas.size(); ++s) {
    const int t = art.frames[s];
    if (t < 0 || t >= keypoints.frames || t >= static_cast<int>(frames.poses.size())) continue;
    const auto replayed = replay_points(object.points, art.twist, art.thetas[s]);
    projected.clear();
    for (const auto& pr : project(replayed, frames.intrinsics, frames.poses[t])) {
      if (pr.valid) projected.emplace_back(pr.u, pr.v);
    }
    if (projected.size() < 3) continue;
    const std::vector<Vec2> hull = convex_hull(projected);
    const bool degenerate = hull.size() < 3;
    auto inside = [&](const Vec2& q) {
      if (!degenerate) return inside_convex(hull, q);
      const double r2 = fallback_px * fallback_px;
      return std::any_of(projected.begin(), projected.end(),
                         [&](const Vec2& p) { return (p - q).squaredNorm() <= r2; });
    };
    int dyn = 0, dyn_in = 0, stat = 0, stat_out = 0;
    for (int f = 0; f < keypoints.tracks; ++f) {
      if (!keypoints.visible(t, f) || labels[f] == TrackLabel::kRejected) continue;
      const bool in = inside(keypoints.at(t, f));
      if (labels[f] == TrackLabel::kDynamic) {
        ++dyn;
        dyn_in += in;
      } else {
        ++stat;
        stat_out += !in;
      }
    }
    if (dyn == 0 && stat == 0) continue;
    const double s_dyn = dyn ? static_cast<double>(dyn_in) / dyn : 1.0;
    const double s_stat = stat ? static_cast<double>(stat_out) / stat : 1.0;
    total += 2.0 - (s_dyn + s_stat);
    ++evaluated;
  }
  if (evaluated == 0) {
    fail(ErrorKind::kUnmatchedCost, "match_cost: object " + std::to_string(object.id) +
                                        " has no evaluable frame");
  }
  return total / evaluated;
}

/// Builds the assignment problem: candidate costs from `cost_fn`, infinite
/// elsewhere, and AABB IoU overlaps between objects.
template <typename CostFn>
MatchProblem build_match_problem(std::span<const ArticulationEstimate> arts,
                                 std::span<const ObjectNode> objects, std::size_t k,
                                 double lambda, CostFn&& cost_fn) {
  MatchProblem mp;
  const auto na = static_cast<Eigen::Index>(arts.size());
  const auto no = static_cast<Eigen::Index>(objects.size());
  mp.p = Eigen::MatrixXd::Constant(na, no, std::numeric_limits<double>::infinity());
  mp.q = Eigen::MatrixXd::Zero(no, no);
  mp.lambda = lambda;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;
  for (Eigen::Index i = 0; i < na; ++i) {
    for (int id : knn_candidates(arts[i].centroid, objects, k)) {
      const auto j = std::find_if(objects.begin(), objects.end(),
                                  [&](const ObjectNode& o) { return o.id == id; }) -
                     objects.begin();
      cells.emplace_back(i, j);
    }
  }
  std::vector<double> values(cells.size(), std::numeric_limits<double>::infinity());
  parallel_for(cells.size(), [&](std::size_t c) {
    try {
      values[c] = cost_fn(arts[cells[c].first], objects[cells[c].second]);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kUnmatchedCost) throw;
    }
  });
  for (std::size_t c = 0; c < cells.size(); ++c) mp.p(cells[c].first, cells[c].second) = values[c];
  for (Eigen::Index j = 0; j < no; ++j) {
    for (Eigen::Index l = j + 1; l < no; ++l) {
      const double v = std::clamp(aabb_iou(objects[j].aabb, objects[l].aabb), 0.0, 1.0);
      mp.q(j, l) = mp.q(l, j) = v;
    }
  }
  return mp;
}

/// Groups articulations that are the same physical joint seen in separate
/// interactions (open now, close later). Two estimates join when they share
/// a kind and their axes are within `angle_deg` up to sign. Prismatic
/// estimates also need cluster centroids within `dist` across the axis;
/// revolute ones need axis lines within `dist` and centroids within `span`
/// along the axis. Groups are the connected components, numbered in order of
/// their first member.
inline std::vector<int> group_joints(std::span<const ArticulationEstimate> arts, double angle_deg,
                                     double dist, double span) {
  const std::size_t n = arts.size();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  const double cos_max = std::cos(angle_deg * kPi / 180.0);
  auto same = [&](const ArticulationEstimate& a, const ArticulationEstimate& b) {
    if (a.kind != b.kind) return false;
    const Vec3& da = a.axis.direction;
    const Vec3& db = b.axis.direction;
    if (std::abs(da.dot(db)) < cos_max) return false;
    const Vec3 dc = b.centroid - a.centroid;
    if (a.kind == AxisKind::kPrismatic) return (dc - dc.dot(da) * da).norm() <= dist;
    if (std::abs(dc.dot(da)) > span) return false;
    // Distance between the axis lines; parallel lines use the offset.
    const Vec3 dp = b.axis.point - a.axis.point;
    const Vec3 cr = da.cross(db);
    const double line = cr.norm() > 1e-4 ? std::abs(dp.dot(cr)) / cr.norm() : (dp - dp.dot(da) * da).norm();
    return line <= dist;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (same(arts[i], arts[j])) parent[root(static_cast<int>(j))] = root(static_cast<int>(i));
    }
  }
  std::vector<int> group(n, -1), id_of_root(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int r = root(static_cast<int>(i));
    if (id_of_root[r] < 0) id_of_root[r] = next++;
    group[i] = id_of_root[r];
  }
  return group;
}

/// One row per joint group: the mean of the members' finite costs, +inf when
/// no member has the object as a candidate.
inline MatchProblem group_match_problem(const MatchProblem& mp, const std::vector<int>& group) {
  if (static_cast<Eigen::Index>(group.size()) != mp.p.rows()) {
    fail(ErrorKind::kShape, "group_match_problem: one group index per articulation required");
  }
  const int ng = group.empty() ? 0 : *std::max_element(group.begin(), group.end()) + 1;
  MatchProblem out;
  out.q = mp.q;
  out.lambda = mp.lambda;
  out.p = Eigen::MatrixXd::Constant(ng, mp.p.cols(), std::numeric_limits<double>::infinity());
  for (Eigen::Index j = 0; j < mp.p.cols(); ++j) {
    std::vector<double> sum(static_cast<std::size_t>(ng), 0.0);
    std::vector<int> cnt(static_cast<std::size_t>(ng), 0);
    for (std::size_t i = 0; i < group.size(); ++i) {
      const double v = mp.p(static_cast<Eigen::Index>(i), j);
      if (!std::isfinite(v)) continue;
      sum[group[i]] += v;
      ++cnt[group[i]];
    }
    for (int g = 0; g < ng; ++g) {
      if (cnt[g]) out.p(g, j) = sum[g] / cnt[g];
    }
  }
  return out;
}

/// Fraction of `a` pixels that are also set in `b`; 0 for an empty `a`.
inline double containment(const Mask& a, const Mask& b) {
  if (a.width != b.width || a.height != b.height) {
    fail(ErrorKind::kShape, "containment: mask dimensions differ");
  }
  std::size_t n = 0, in = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    if (!a.data[i]) continue;
    ++n;
    in += b.data[i] != 0;
  }
  return n ? static_cast<double>(in) / static_cast<double>(n) : 0.0;
}

inline ChildRelation classify_containment(const Mask& child, const Mask& open_part,
                                          const Mask& closed_part, double thresh = 0.6) {
  if (!(thresh > 0.0 && thresh <= 1.0)) {
    fail(ErrorKind::kInvalidArgument, "classify_containment: threshold must lie in (0, 1]");
  }
  if (child.width != open_part.width || child.height != open_part.height ||
      child.width != closed_part.width || child.height != closed_part.height) {
    fail(ErrorKind::kShape, "classify_containment: mask dimensions differ");
  }
  if (containment(child, open_part) >= thresh) return ChildRelation::kArticulated;
  if (containment(child, closed_part) >= thresh) return ChildRelation::kStatic;
  return ChildRelation::kNone;
}

/// Pixels whose centers fall inside the convex polygon.
inline Mask rasterize_convex(std::span<const Vec2> hull, int width, int height) {
  Mask m(width, height);
  if (hull.size() < 3) return m;
  double lo_u = hull[0].x(), hi_u = lo_u, lo_v = hull[0].y(), hi_v = lo_v;
  for (const auto& p : hull) {
    lo_u = std::min(lo_u, p.x());
    hi_u = std::max(hi_u, p.x());
    lo_v = std::min(lo_v, p.y());
    hi_v = std::max(hi_v, p.y());
  }
  const int c0 = std::max(0, static_cast<int>(std::floor(lo_u)));
  const int c1 = std::min(width - 1, static_cast<int>(std::ceil(hi_u)));
  const int r0 = std::max(0, static_cast<int>(std::floor(lo_v)));
  const int r1 = std::min(height - 1, static_cast<int>(std::ceil(hi_v)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (inside_convex(hull, Vec2(c, r))) m.set(r, c);
    }
  }
  return m;
}

/// Image region of a point set seen from `pose`, as its filled convex hull.
inline Mask silhouette(std::span<const Vec3> points, const CameraIntrinsics& k,
                       const RigidTransform& pose) {
  std::vector<Vec2> px;
  for (const auto& pr : project(points, k, pose)) {
    if (pr.depth > 0.0) px.emplace_back(pr.u, pr.v);
  }
  return rasterize_convex(convex_hull(px), k.width, k.height);
}

/// Index into `art.thetas` of the most open configuration. The opening
/// direction is +theta unless the mode token contradicts the theta profile
/// with the mirrored shape, in which case it is -theta. Ties go to the
/// earliest frame.
inline std::size_t max_open_index(const ArticulationEstimate& art) {
  if (art.thetas.empty()) fail(ErrorKind::kInvalidArgument, "max_open_frame: no configurations");
  double sign = 1.0;
  const std::string shape = theta_shape(art.thetas);
  auto mirrored = [](const std::string& s) {
    if (s == "up") return std::string("down");
    if (s == "down") return std::string("up");
    if (s == "up-down") return std::string("down-up");
    if (s == "down-up") return std::string("up-down");
    return s;
  };
  std::string expected;
  switch (art.mode.value) {
    case ModeValue::kOpening: expected = "up"; break;
    case ModeValue::kClosing: expected = "down"; break;
    case ModeValue::kOpeningClosing: expected = "up-down"; break;
    case ModeValue::kClosingOpening: expected = "down-up"; break;
    case ModeValue::kUnknown: break;
  }
  if (!expected.empty() && shape != expected && shape == mirrored(expected)) sign = -1.0;
  std::size_t best = 0;
  for (std::size_t i = 1; i < art.thetas.size(); ++i) {
    if (sign * art.thetas[i] > sign * art.thetas[best]) best = i;
  }
  return best;
}

inline int max_open_frame(const ArticulationEstimate& art) {
  const std::size_t i = max_open_index(art);
  return i < art.frames.size() ? art.frames[i] : static_cast<int>(i);
}

// --------------------------------------------------------------------------
// JSON encoding

inline Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) fail(ErrorKind::kValidation, "expected a 3-vector");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline Json twist_json(const Twist& t) {
  return {{"omega", vec_json(t.omega)}, {"vel", vec_json(t.vel)}};
}

inline Twist twist_from_json(const Json& j) {
  return {vec_from_json(j.at("omega")), vec_from_json(j.at("vel"))};
}

inline Json axis_json(const ScrewAxis& a) {
  return {{"kind", to_string(a.kind)}, {"direction", vec_json(a.direction)},
          {"point", vec_json(a.point)}};
}

inline ScrewAxis axis_from_json(const Json& j) {
  return {axis_kind_from_string(j.at("kind").get<std::string>()),
          vec_from_json(j.at("direction")), vec_from_json(j.at("point"))};
}

inline Json estimate_json(const ArticulationEstimate& e) {
  return {{"twist", twist_json(e.twist)},
          {"thetas", e.thetas},
          {"frames", e.frames},
          {"kind", to_string(e.kind)},
          {"axis", axis_json(e.axis)},
          {"residual_rms", e.residual_rms},
          {"mode",
           {{"value", to_string(e.mode.value)},
            {"consistent", e.mode.consistent},
            {"convention_dependent", e.mode.convention_dependent},
            {"shape", e.mode.shape}}},
          {"prior",
           {{"eta", e.prior.eta},
            {"lambda_pris", e.prior.lambda_pris},
            {"lambda_rev", e.prior.lambda_rev}}},
          {"centroid", vec_json(e.centroid)},
          {"iterations", e.iterations},
          {"cost", e.cost}};
}

inline ArticulationEstimate estimate_from_json(const Json& j) {
  ArticulationEstimate e;
  e.twist = twist_from_json(j.at("twist"));
  e.thetas = j.at("thetas").get<std::vector<double>>();
  e.frames = j.at("frames").get<std::vector<int>>();
  e.kind = axis_kind_from_string(j.at("kind").get<std::string>());
  e.axis = axis_from_json(j.at("axis"));
  e.residual_rms = j.at("residual_rms").get<double>();
  const Json& m = j.at("mode");
  e.mode.value = mode_from_string(m.at("value").get<std::string>());
  e.mode.consistent = m.at("consistent").get<bool>();
  e.mode.convention_dependent = m.at("convention_dependent").get<bool>();
  e.mode.shape = m.at("shape").get<std::string>();
  const Json& p = j.at("prior");
  e.prior.eta = p.at("eta").get<double>();
  e.prior.lambda_pris = p.at("lambda_pris").get<double>();
  e.prior.lambda_rev = p.at("lambda_rev").get<double>();
  e.centroid = vec_from_json(j.at("centroid"));
  e.iterations = j.at("iterations").get<int>();
  e.cost = j.at("cost").get<double>();
  return e;
}

inline Json object_json(const ObjectNode& o) {
  return {{"id", o.id},
          {"centroid", vec_json(o.centroid)},
          {"aabb", {{"min", vec_json(o.aabb.min)}, {"max", vec_json(o.aabb.max)}}},
          {"n_points", std::max(o.n_points, o.points.size())},
          {"isolated", o.isolated},
          {"points", "points_" + std::to_string(o.id) + ".bin"}};
}

inline ObjectNode object_from_json(const Json& j) {
  ObjectNode o;
  o.id = j.at("id").get<int>();
  o.centroid = vec_from_json(j.at("centroid"));
  o.aabb.min = vec_from_json(j.at("aabb").at("min"));
  o.aabb.max = vec_from_json(j.at("aabb").at("max"));
  o.n_points = j.at("n_points").get<std::size_t>();
  o.isolated = j.at("isolated").get<bool>();
  return o;
}

/// graph.json document. Point sets are not inlined; each object names its
/// sidecar file.
inline Json serialize_graph(const SceneGraph& g) {
  Json doc;
  doc["version"] = kGraphVersion;
  doc["objects"] = Json::array();
  for (const auto& o : g.objects) doc["objects"].push_back(object_json(o));
  doc["contained"] = Json::array();
  for (const auto& o : g.contained) doc["contained"].push_back(object_json(o));
  doc["articulations"] = Json::array();
  for (const auto& a : g.articulations) {
    Json j = estimate_json(a.estimate);
    j["id"] = a.id;
    j["segment"] = {a.segment.t_start, a.segment.t_end};
    doc["articulations"].push_back(std::move(j));
  }
  doc["matches"] = Json::array();
  for (const auto& m : g.matches) {
    doc["matches"].push_back({{"articulation", m.articulation}, {"object", m.object}, {"cost", m.cost}});
  }
  doc["children"] = Json::array();
  for (const auto& c : g.children) {
    doc["children"].push_back(
        {{"parent", c.parent}, {"child", c.child}, {"relation", to_string(c.relation)}});
  }
  return doc;
}

inline SceneGraph load_graph(const Json& doc) {
  try {
    if (!doc.contains("version") || doc.at("version").get<int>() != kGraphVersion) {
      fail(ErrorKind::kVersion, "graph: unsupported schema version " +
                                    (doc.contains("version") ? doc.at("version").dump() : "none"));
    }
    SceneGraph g;
    for (const auto& j : doc.at("objects")) g.objects.push_back(object_from_json(j));
    if (doc.contains("contained")) {
      for (const auto& j : doc.at("contained")) g.contained.push_back(object_from_json(j));
    }
    for (const auto& j : doc.at("articulations")) {
      GraphArticulation a;
      a.id = j.at("id").get<int>();
      a.segment = {j.at("segment").at(0).get<int>(), j.at("segment").at(1).get<int>()};
      a.estimate = estimate_from_json(j);
      g.articulations.push_back(std::move(a));
    }
    for (const auto& j : doc.at("matches")) {
      g.matches.push_back({j.at("articulation").get<int>(), j.at("object").get<int>(),
                           j.at("cost").get<double>()});
    }
    for (const auto& j : doc.at("children")) {
      g.children.push_back({j.at("parent").get<int>(), j.at("child").get<int>(),
                            child_relation_from_string(j.at("relation").get<std::string>())});
    }
    return g;
  } catch (const Json::exception& e) {
    fail(ErrorKind::kValidation, std::string("graph: ") + e.what());
  }
}

}  // namespace artiscene
