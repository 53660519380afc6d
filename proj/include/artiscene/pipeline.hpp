// artiscene - articulated 3D scene graphs from point trajectories
//
// Pipeline stages over a SceneBundle: interaction segmentation, per-segment
// articulation estimation, assignment to objects with containment, and
// evaluation against ground truth. Each stage has a JSON form so the CLI can
// run them one at a time.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "artiscene/bip.hpp"
#include "artiscene/bundle.hpp"
#include "artiscene/config.hpp"
#include "artiscene/graph.hpp"
#include "artiscene/metrics.hpp"
#include "artiscene/segmenter.hpp"
#include "artiscene/tracks.hpp"
#include "artiscene/twist_estimator.hpp"

namespace artiscene {

// --------------------------------------------------------------------------
// Segmentation

inline SegmentationResult run_segment(const SceneBundle& b, const PipelineConfig& cfg) {
  const auto frames = b.depth_frames();
  const auto masks = b.mask_frames();
  return segment_interactions(frames, masks, b.intrinsics, cfg.segmenter());
}

inline Json segments_json(const SegmentationResult& r) {
  Json j;
  j["scores"] = Json::array();
  for (const auto& s : r.scores) {
    j["scores"].push_back({{"t", s.t}, {"h", s.h}, {"delta", s.delta}, {"p", s.p}});
  }
  j["segments"] = Json::array();
  for (const auto& s : r.segments) j["segments"].push_back({s.t_start, s.t_end});
  return j;
}

inline std::vector<InteractionSegment> segments_from_json(const Json& j) {
  std::vector<InteractionSegment> out;
  try {
    for (const auto& s : j.at("segments")) {
      InteractionSegment seg{s.at(0).get<int>(), s.at(1).get<int>()};
      if (seg.t_start < 0 || seg.t_end <= seg.t_start) {
        fail(ErrorKind::kValidation, "segments: invalid interval");
      }
      out.push_back(seg);
    }
  } catch (const Json::exception& e) {
    fail(ErrorKind::kValidation, std::string("segments: ") + e.what());
  }
  return out;
}

// --------------------------------------------------------------------------
// Estimation

/// Tracks of one interaction segment at full frame rate.
struct SegmentTracks {
  std::vector<int> frames;     // sequence frames, t_start .. t_end - 1
  std::vector<int> track_ids;  // bundle track index of each local track
  PointTracks3D lifted;
  TrackLabels split;
};

inline SegmentTracks prepare_segment(const SceneBundle& b, const InteractionSegment& seg,
                                     const PipelineConfig& cfg) {
  if (seg.t_start < 0 || seg.t_end > b.n_frames || seg.length() < 2) {
    fail(ErrorKind::kValidation, "segment [" + std::to_string(seg.t_start) + ", " +
                                     std::to_string(seg.t_end) + ") outside the sequence");
  }
  SegmentTracks st;
  for (int t = seg.t_start; t < seg.t_end; ++t) st.frames.push_back(t);

  std::vector<int> ids;
  for (int f = 0; f < b.tracks.tracks; ++f) {
    int n = 0;
    for (int t : st.frames) n += b.tracks.visible(t, f);
    if (n >= 2) ids.push_back(f);
  }
  const auto cap = static_cast<std::size_t>(cfg.max_queries);
  if (ids.size() > cap) {
    std::vector<int> kept;
    for (std::size_t i = 0; i < cap; ++i) kept.push_back(ids[i * ids.size() / cap]);
    ids = std::move(kept);
  }
  st.track_ids = ids;

  const int nt = static_cast<int>(st.frames.size());
  PointTracks2D sub(nt, static_cast<int>(ids.size()));
  std::vector<DepthFrame> depth;
  for (int s = 0; s < nt; ++s) {
    const int t = st.frames[s];
    depth.push_back({t, b.depth[t], b.poses[t]});
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const int f = static_cast<int>(j);
      sub.positions[sub.index(s, f)] = b.tracks.at(t, ids[j]);
      sub.visibility[sub.index(s, f)] = b.tracks.visibility[b.tracks.index(t, ids[j])];
    }
  }
  st.lifted = lift_tracks(sub, depth, b.intrinsics);
  st.split = split_static_dynamic(st.lifted, cfg.min_track_len, cfg.jump_thresh);
  return st;
}

/// Every `stride`-th frame plus the last one.
inline std::vector<int> stride_indices(int frames, int stride) {
  std::vector<int> idx;
  for (int s = 0; s < frames; s += stride) idx.push_back(s);
  if (idx.empty() || idx.back() != frames - 1) idx.push_back(frames - 1);
  return idx;
}

inline PointTracks3D select_frames(const PointTracks3D& tr, const std::vector<int>& idx) {
  PointTracks3D out(static_cast<int>(idx.size()), tr.tracks);
  for (std::size_t s = 0; s < idx.size(); ++s) {
    for (int f = 0; f < tr.tracks; ++f) {
      out.positions[out.index(static_cast<int>(s), f)] = tr.at(idx[s], f);
      out.visibility[out.index(static_cast<int>(s), f)] = tr.visibility[tr.index(idx[s], f)];
    }
  }
  return out;
}

struct SegmentEstimate {
  ArticulationEstimate estimate;
  std::vector<TrackLabel> labels;  // per bundle track, for matching
  int cluster_size = 0;
};

inline SegmentEstimate estimate_segment(const SceneBundle& b, const InteractionSegment& seg,
                                        const PipelineConfig& cfg,
                                        std::optional<ModeValue> hint = std::nullopt) {
  const SegmentTracks st = prepare_segment(b, seg, cfg);
  std::vector<int> candidates;
  for (int f = 0; f < st.lifted.tracks; ++f) {
    if (st.split.labels[f] == TrackLabel::kDynamic) candidates.push_back(f);
  }
  if (candidates.empty()) {
    fail(ErrorKind::kEmptyCluster, "segment [" + std::to_string(seg.t_start) + ", " +
                                       std::to_string(seg.t_end) + "): no dynamic tracks");
  }
  const ClusterResult cr = cluster_tracks(st.lifted, candidates, cfg.dbscan_eps,
                                          cfg.dbscan_min_pts, cfg.min_joint_visibility);
  const PointTracks3D smoothed = smooth_tracks(st.lifted.select(cr.selected), cfg.smooth_window);
  const auto idx = stride_indices(smoothed.frames, cfg.query_stride);
  const PointTracks3D cluster = select_frames(smoothed, idx);

  EstimatorOptions opt = cfg.estimator();
  Vec3 eye = Vec3::Zero();
  for (int t : st.frames) eye += b.poses[t].translation;
  opt.viewpoint = eye / static_cast<double>(st.frames.size());

  SegmentEstimate out;
  out.estimate = estimate_articulation(cluster, opt, hint);
  out.estimate.frames.clear();
  for (int s : idx) out.estimate.frames.push_back(st.frames[s]);
  out.cluster_size = static_cast<int>(cr.selected.size());

  out.labels.assign(static_cast<std::size_t>(b.tracks.tracks), TrackLabel::kRejected);
  for (std::size_t j = 0; j < st.track_ids.size(); ++j) {
    if (st.split.labels[j] == TrackLabel::kStatic) out.labels[st.track_ids[j]] = TrackLabel::kStatic;
  }
  for (int j : cr.selected) out.labels[st.track_ids[j]] = TrackLabel::kDynamic;
  return out;
}

struct EstimateFailure {
  InteractionSegment segment;
  ErrorKind kind = ErrorKind::kConvergence;
  std::string message;
};

struct EstimationResult {
  std::vector<GraphArticulation> articulations;
  std::vector<std::vector<TrackLabel>> labels;
  std::vector<EstimateFailure> failures;
};

/// Estimates every segment. Segments whose estimation fails are reported and
/// skipped; other errors propagate.
inline EstimationResult run_estimate(const SceneBundle& b,
                                     const std::vector<InteractionSegment>& segments,
                                     const PipelineConfig& cfg,
                                     const std::vector<std::optional<ModeValue>>& hints = {}) {
  if (!hints.empty() && hints.size() != segments.size()) {
    fail(ErrorKind::kValidation, "run_estimate: " + std::to_string(hints.size()) +
                                     " mode hints for " + std::to_string(segments.size()) +
                                     " segments");
  }
  EstimationResult r;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto hint = hints.empty() ? std::nullopt : hints[i];
    try {
      SegmentEstimate se = estimate_segment(b, segments[i], cfg, hint);
      GraphArticulation a;
      a.id = static_cast<int>(r.articulations.size());
      a.segment = segments[i];
      a.estimate = std::move(se.estimate);
      r.articulations.push_back(std::move(a));
      r.labels.push_back(std::move(se.labels));
    } catch (const Error& e) {
      if (!e.is_estimation_failure()) throw;
      r.failures.push_back({segments[i], e.kind(), e.what()});
    }
  }
  return r;
}

inline std::string encode_labels(const std::vector<TrackLabel>& labels) {
  std::string s;
  for (auto l : labels) s += l == TrackLabel::kDynamic ? 'D' : (l == TrackLabel::kStatic ? 'S' : 'R');
  return s;
}

inline std::vector<TrackLabel> decode_labels(const std::string& s) {
  std::vector<TrackLabel> out;
  for (char c : s) {
    if (c == 'D') out.push_back(TrackLabel::kDynamic);
    else if (c == 'S') out.push_back(TrackLabel::kStatic);
    else if (c == 'R') out.push_back(TrackLabel::kRejected);
    else fail(ErrorKind::kValidation, "articulations: bad track label code");
  }
  return out;
}

inline Json estimation_json(const EstimationResult& r) {
  Json j;
  j["articulations"] = Json::array();
  for (std::size_t i = 0; i < r.articulations.size(); ++i) {
    const auto& a = r.articulations[i];
    Json e = estimate_json(a.estimate);
    e["id"] = a.id;
    e["segment"] = {a.segment.t_start, a.segment.t_end};
    e["track_labels"] = encode_labels(r.labels[i]);
    j["articulations"].push_back(std::move(e));
  }
  j["failures"] = Json::array();
  for (const auto& f : r.failures) {
    j["failures"].push_back({{"segment", {f.segment.t_start, f.segment.t_end}},
                             {"kind", std::string(to_string(f.kind))},
                             {"message", f.message}});
  }
  return j;
}

inline EstimationResult estimation_from_json(const Json& j) {
  EstimationResult r;
  try {
    for (const auto& e : j.at("articulations")) {
      GraphArticulation a;
      a.id = e.at("id").get<int>();
      a.segment = {e.at("segment").at(0).get<int>(), e.at("segment").at(1).get<int>()};
      a.estimate = estimate_from_json(e);
      r.articulations.push_back(std::move(a));
      r.labels.push_back(decode_labels(e.at("track_labels").get<std::string>()));
    }
  } catch (const Json::exception& e) {
    fail(ErrorKind::kValidation, std::string("articulations: ") + e.what());
  }
  return r;
}

// --------------------------------------------------------------------------
// Matching and containment

inline std::vector<ObjectNode> bundle_objects(const SceneBundle& b) {
  std::vector<ObjectNode> out;
  for (const auto& o : b.objects) {
    ObjectNode n = make_object(o.id, o.points);
    n.masks.emplace_back(o.mask_frame, o.mask);
    out.push_back(std::move(n));
  }
  return out;
}

inline SceneGraph run_match(const SceneBundle& b, const EstimationResult& est,
                            const PipelineConfig& cfg) {
  SceneGraph g;
  g.objects = bundle_objects(b);
  g.articulations = est.articulations;
  for (auto& o : g.objects) o.isolated = true;
  if (est.labels.size() != est.articulations.size()) {
    fail(ErrorKind::kShape, "match: one label set per articulation required");
  }
  for (const auto& l : est.labels) {
    if (static_cast<int>(l.size()) != b.tracks.tracks) {
      fail(ErrorKind::kShape, "match: track labels do not fit the bundle tracks");
    }
  }
  if (est.articulations.empty()) return g;

  std::vector<ArticulationEstimate> arts;
  for (const auto& a : est.articulations) arts.push_back(a.estimate);
  const MatchFrames mf{b.poses, b.intrinsics};
  const ArticulationEstimate* base = arts.data();
  const MatchProblem mp = build_match_problem(
      arts, g.objects, static_cast<std::size_t>(cfg.knn_k), cfg.lambda,
      [&](const ArticulationEstimate& art, const ObjectNode& obj) {
        const auto i = static_cast<std::size_t>(&art - base);
        return match_cost(art, b.tracks, est.labels[i], obj, mf, cfg.fallback_px);
      });
  // The assignment runs over joints so that repeated interactions with one
  // part may share its object.
  const std::vector<int> joint = group_joints(arts, cfg.joint_merge_angle_deg, cfg.joint_merge_dist,
                                                cfg.joint_merge_span);
  const MatchProblem gp = group_match_problem(mp, joint);
  const BipSolution gsol = solve_bip(gp);
  std::vector<int> object_of(arts.size());
  for (std::size_t i = 0; i < arts.size(); ++i) {
    const int j = gsol.object_of[joint[i]];
    object_of[i] = j;
    const double own = mp.p(static_cast<Eigen::Index>(i), j);
    g.matches.push_back({est.articulations[i].id, g.objects[j].id, std::isfinite(own) ? own : gp.p(joint[i], j)});
    g.objects[j].isolated = false;
  }

  // Containment of child objects at the most open configuration of each
  // matched part.
  struct PartMasks {
    int object;
    int frame;
    Mask open;
    Mask closed;
  };
  std::vector<PartMasks> parts;
  for (std::size_t i = 0; i < arts.size(); ++i) {
    const ObjectNode& obj = g.objects[object_of[i]];
    const std::size_t s = max_open_index(arts[i]);
    const int t = arts[i].frames[s];
    const auto open_pts = replay_points(obj.points, arts[i].twist, arts[i].thetas[s]);
    parts.push_back({obj.id, t, silhouette(open_pts, b.intrinsics, b.poses[t]),
                     silhouette(obj.points, b.intrinsics, b.poses[t])});
  }
  for (const auto& c : b.children) {
    std::optional<ChildEdge> art_edge, static_edge;
    for (const auto& p : parts) {
      const ChildRelation r =
          classify_containment(c.masks[p.frame], p.open, p.closed, cfg.containment_thresh);
      if (r == ChildRelation::kArticulated && !art_edge) art_edge = ChildEdge{p.object, c.id, r};
      if (r == ChildRelation::kStatic && !static_edge) static_edge = ChildEdge{p.object, c.id, r};
    }
    ObjectNode node = make_object(c.id, c.points);
    g.contained.push_back(std::move(node));
    if (art_edge) g.children.push_back(*art_edge);
    else if (static_edge) g.children.push_back(*static_edge);
  }
  return g;
}

// Sidecar point files next to graph.json.
inline void write_graph(const SceneGraph& g, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto* list : {&g.objects, &g.contained}) {
    for (const auto& o : *list) {
      write_file_atomic(dir / ("points_" + std::to_string(o.id) + ".bin"), encode_points(o.points));
    }
  }
  write_file_atomic(dir / "graph.json", dump_json(serialize_graph(g)));
}

inline SceneGraph read_graph(const fs::path& dir, bool with_points = true) {
  SceneGraph g = load_graph(read_json(dir / "graph.json"));
  if (with_points) {
    for (auto* list : {&g.objects, &g.contained}) {
      for (auto& o : *list) {
        const std::string name = "points_" + std::to_string(o.id) + ".bin";
        o.points = decode_points(read_file(dir / name), o.n_points, name);
      }
    }
  }
  return g;
}

// --------------------------------------------------------------------------
// Evaluation

struct ArticulationRow {
  int gt = -1;
  int pred = -1;  // -1 when the ground-truth articulation has no prediction
  double segment_iou = 0.0;
  AxisKind gt_kind = AxisKind::kRevolute;
  AxisKind pred_kind = AxisKind::kRevolute;
  double angle_deg = 0.0;
  double position_m = 0.0;
};

struct EvalReport {
  bool fold_angles = true;
  std::vector<ArticulationRow> rows;
  double mean_angle_prismatic = 0.0;
  double mean_angle_revolute = 0.0;
  double mean_position = 0.0;  // revolute pairs
  TypeMetrics types;
  double iou_1d = 0.0;
  SegmentMetrics segments;
  PartMetrics parts;
  ChildMetrics children;
  int n_pred = 0;
  int n_gt = 0;
};

/// Pairs each ground-truth articulation with at most one prediction by
/// maximum segment overlap; pairs without any overlap stay unmatched.
inline std::vector<int> pair_articulations(const std::vector<GraphArticulation>& preds,
                                           const std::vector<GtArticulation>& gts) {
  std::vector<int> pred_of(gts.size(), -1);
  if (preds.empty() || gts.empty()) return pred_of;
  Eigen::MatrixXd cost(static_cast<Eigen::Index>(gts.size()), static_cast<Eigen::Index>(preds.size()));
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (std::size_t p = 0; p < preds.size(); ++p) {
      cost(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(p)) =
          -interval_iou(gts[g].segment, preds[p].segment);
    }
  }
  const Assignment a = hungarian(cost);
  for (std::size_t g = 0; g < gts.size(); ++g) {
    const int p = a.row_to_col[g];
    if (p >= 0 && cost(static_cast<Eigen::Index>(g), p) < 0.0) pred_of[g] = p;
  }
  return pred_of;
}

inline EvalReport evaluate(const SceneGraph& g, const GroundTruth& gt, bool fold = true) {
  EvalReport r;
  r.fold_angles = fold;
  r.n_pred = static_cast<int>(g.articulations.size());
  r.n_gt = static_cast<int>(gt.articulations.size());
  const auto pred_of = pair_articulations(g.articulations, gt.articulations);

  std::vector<AxisKind> pk, gk;
  double ang_p = 0.0, ang_r = 0.0, pos = 0.0;
  int n_p = 0, n_r = 0;
  for (std::size_t i = 0; i < gt.articulations.size(); ++i) {
    const auto& ga = gt.articulations[i];
    ArticulationRow row;
    row.gt = static_cast<int>(i);
    row.gt_kind = ga.axis.kind;
    row.pred = pred_of[i];
    if (row.pred >= 0) {
      const auto& pa = g.articulations[row.pred];
      row.segment_iou = interval_iou(ga.segment, pa.segment);
      row.pred_kind = pa.estimate.kind;
      row.angle_deg = axis_angle_error(pa.estimate.axis, ga.axis, fold);
      row.position_m = axis_position_error(pa.estimate.axis, ga.axis);
      pk.push_back(row.pred_kind);
      gk.push_back(row.gt_kind);
      if (ga.axis.kind == AxisKind::kPrismatic) {
        ang_p += row.angle_deg;
        ++n_p;
      } else {
        ang_r += row.angle_deg;
        pos += row.position_m;
        ++n_r;
      }
    }
    r.rows.push_back(row);
  }
  r.mean_angle_prismatic = n_p ? ang_p / n_p : 0.0;
  r.mean_angle_revolute = n_r ? ang_r / n_r : 0.0;
  r.mean_position = n_r ? pos / n_r : 0.0;
  r.types = type_metrics(pk, gk);

  std::vector<InteractionSegment> ps;
  for (const auto& a : g.articulations) ps.push_back(a.segment);
  const auto gs = gt.segments();
  r.iou_1d = iou_1d(segments_to_mask(ps, gt.n_frames), segments_to_mask(gs, gt.n_frames));
  r.segments = segment_matching(ps, gs, gt.fps);

  // Parts: the object each paired prediction was matched to against the
  // ground-truth object of the articulation.
  std::map<int, const ObjectNode*> by_id;
  for (const auto& o : g.objects) by_id[o.id] = &o;
  std::map<int, int> object_of_art;
  for (const auto& m : g.matches) object_of_art[m.articulation] = m.object;
  std::vector<Aabb> pred_boxes, gt_boxes;
  for (std::size_t i = 0; i < gt.articulations.size(); ++i) {
    const auto it = by_id.find(gt.articulations[i].object);
    if (it != by_id.end()) gt_boxes.push_back(it->second->aabb);
  }
  for (const auto& a : g.articulations) {
    const auto m = object_of_art.find(a.id);
    if (m == object_of_art.end()) continue;
    const auto it = by_id.find(m->second);
    if (it != by_id.end()) pred_boxes.push_back(it->second->aabb);
  }
  r.parts = part_segmentation_metrics(pred_boxes, gt_boxes);

  // Children: contained nodes carry the points for both sides.
  std::map<int, const ObjectNode*> contained;
  for (const auto& o : g.contained) contained[o.id] = &o;
  std::vector<ChildInstance> pc, gc;
  for (const auto& e : g.children) {
    const auto it = contained.find(e.child);
    if (it != contained.end()) pc.push_back({it->second->points, e.relation});
  }
  for (const auto& c : gt.children) {
    const auto it = contained.find(c.child);
    if (it != contained.end()) gc.push_back({it->second->points, c.relation});
  }
  r.children = child_metrics(pc, gc);
  return r;
}

inline Json report_json(const EvalReport& r) {
  Json j;
  j["fold_angles"] = r.fold_angles;
  j["n_pred"] = r.n_pred;
  j["n_gt"] = r.n_gt;
  j["axis"] = {{"angle_err_prismatic_deg", r.mean_angle_prismatic},
               {"angle_err_revolute_deg", r.mean_angle_revolute},
               {"position_err_m", r.mean_position}};
  j["type"] = {{"accuracy", r.types.accuracy},
               {"prismatic_recall", r.types.prismatic_recall},
               {"revolute_recall", r.types.revolute_recall}};
  j["segmentation"] = {{"iou_1d", r.iou_1d},
                       {"precision", r.segments.precision},
                       {"recall", r.segments.recall},
                       {"segment_iou", r.segments.mean_iou},
                       {"onset_err_s", r.segments.onset_error_s},
                       {"offset_err_s", r.segments.offset_error_s}};
  j["parts"] = {{"iou", r.parts.mean_iou},
                {"recall_25", r.parts.recall[0]},
                {"recall_50", r.parts.recall[1]},
                {"recall_75", r.parts.recall[2]}};
  j["children"] = {{"iou", r.children.mean_iou},
                   {"recall_25", r.children.recall_25},
                   {"relation_accuracy", r.children.relation_accuracy}};
  j["rows"] = Json::array();
  for (const auto& row : r.rows) {
    j["rows"].push_back({{"gt", row.gt},
                         {"pred", row.pred},
                         {"segment_iou", row.segment_iou},
                         {"gt_kind", to_string(row.gt_kind)},
                         {"pred_kind", row.pred >= 0 ? Json(to_string(row.pred_kind)) : Json()},
                         {"angle_err_deg", row.angle_deg},
                         {"position_err_m", row.position_m}});
  }
  return j;
}

inline std::string report_table(const EvalReport& r) {
  std::ostringstream os;
  char buf[256];
  auto line = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    os << buf << '\n';
  };
  line("%-12s %10s %10s %10s %10s", "axis", "th_pris", "th_rev", "d_L2", "");
  line("%-12s %10.3f %10.3f %10.4f", "", r.mean_angle_prismatic, r.mean_angle_revolute, r.mean_position);
  line("%-12s %10s %10s %10s", "type", "acc", "R_pris", "R_rev");
  line("%-12s %10.3f %10.3f %10.3f", "", r.types.accuracy, r.types.prismatic_recall,
       r.types.revolute_recall);
  line("%-12s %10s %10s %10s %10s %10s %10s", "segments", "1D-IoU", "P", "R", "seg-IoU", "I_on",
       "I_off");
  line("%-12s %10.3f %10.3f %10.3f %10.3f %10.3f %10.3f", "", r.iou_1d, r.segments.precision,
       r.segments.recall, r.segments.mean_iou, r.segments.onset_error_s, r.segments.offset_error_s);
  line("%-12s %10s %10s %10s %10s", "parts", "IoU", "R@0.25", "R@0.50", "R@0.75");
  line("%-12s %10.3f %10.3f %10.3f %10.3f", "", r.parts.mean_iou, r.parts.recall[0],
       r.parts.recall[1], r.parts.recall[2]);
  line("%-12s %10s %10s %10s", "children", "IoU", "R@0.25", "rel-acc");
  line("%-12s %10.3f %10.3f %10.3f", "", r.children.mean_iou, r.children.recall_25,
       r.children.relation_accuracy);
  line("angles folded to [0, 90]: %s", r.fold_angles ? "yes" : "no");
  return os.str();
}

}  // namespace artiscene
