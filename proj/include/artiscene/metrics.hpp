// artiscene - articulated 3D scene graphs from point trajectories
//
// Evaluation metrics: axis direction and position errors, joint-type
// accuracy, temporal segmentation scores, 3D part and child-object IoUs.

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <tuple>
#include <vector>

#include "artiscene/errors.hpp"
#include "artiscene/geometry2d.hpp"
#include "artiscene/graph.hpp"
#include "artiscene/hungarian.hpp"
#include "artiscene/se3.hpp"
#include "artiscene/segmenter.hpp"

namespace artiscene {

/// Angle between axis directions in degrees. With `fold`, the sign of either
/// direction is ignored and the result lies in [0, 90].
inline double axis_angle_error(const ScrewAxis& pred, const ScrewAxis& gt, bool fold = true) {
  const double c = pred.direction.normalized().dot(gt.direction.normalized());
  const double v = std::clamp(fold ? std::abs(c) : c, -1.0, 1.0);
  return std::acos(v) * 180.0 / kPi;
}

/// Distance between the two axis lines; parallel below `eps` in the norm of
/// the direction cross product.
inline double axis_position_error(const ScrewAxis& pred, const ScrewAxis& gt, double eps = 1e-4) {
  const Vec3 a = pred.direction.normalized();
  const Vec3 b = gt.direction.normalized();
  const Vec3 n = a.cross(b);
  const Vec3 d = pred.point - gt.point;
  const double nn = n.norm();
  if (nn > eps) return std::abs(d.dot(n)) / nn;
  return d.cross(b).norm();
}

struct TypeMetrics {
  double accuracy = 0.0;
  double prismatic_recall = 0.0;
  double revolute_recall = 0.0;
};

/// Recall of a class absent from `gts` is reported as 0.
inline TypeMetrics type_metrics(std::span<const AxisKind> preds, std::span<const AxisKind> gts) {
  if (preds.size() != gts.size()) fail(ErrorKind::kShape, "type_metrics: length mismatch");
  TypeMetrics m;
  if (gts.empty()) return m;
  int correct = 0, n_p = 0, hit_p = 0, n_r = 0, hit_r = 0;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const bool ok = preds[i] == gts[i];
    correct += ok;
    if (gts[i] == AxisKind::kPrismatic) {
      ++n_p;
      hit_p += ok;
    } else {
      ++n_r;
      hit_r += ok;
    }
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(gts.size());
  m.prismatic_recall = n_p ? static_cast<double>(hit_p) / n_p : 0.0;
  m.revolute_recall = n_r ? static_cast<double>(hit_r) / n_r : 0.0;
  return m;
}

/// Jaccard index of two binary sequences; 0 when both are empty.
inline double iou_1d(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt) {
  if (pred.size() != gt.size()) fail(ErrorKind::kShape, "iou_1d: length mismatch");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    inter += (pred[i] && gt[i]);
    uni += (pred[i] || gt[i]);
  }
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

/// Per-frame indicator of a segment list over `frames` frames.
inline std::vector<std::uint8_t> segments_to_mask(std::span<const InteractionSegment> segs,
                                                  int frames) {
  std::vector<std::uint8_t> m(static_cast<std::size_t>(std::max(frames, 0)), 0);
  for (const auto& s : segs) {
    for (int t = std::max(s.t_start, 0); t < std::min(s.t_end, frames); ++t) m[t] = 1;
  }
  return m;
}

/// IoU of two half-open frame intervals.
inline double interval_iou(const InteractionSegment& a, const InteractionSegment& b) {
  const double inter = std::max(0, std::min(a.t_end, b.t_end) - std::max(a.t_start, b.t_start));
  const double uni = a.length() + b.length() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

struct SegmentMatch {
  int pred = -1;
  int gt = -1;
  double iou = 0.0;
};

struct SegmentMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double mean_iou = 0.0;       // over kept matches; 0 without matches
  double onset_error_s = 0.0;  // mean |s_p - s_g| over kept matches
  double offset_error_s = 0.0;
  std::vector<SegmentMatch> matches;
};

/// Hungarian pairing maximizing interval IoU; pairs below `gate` are dropped.
/// Precision is 0 for an empty prediction list, recall 0 for an empty truth.
inline SegmentMetrics segment_matching(std::span<const InteractionSegment> preds,
                                       std::span<const InteractionSegment> gts, double fps,
                                       double gate = 0.5) {
  if (!(fps > 0.0)) fail(ErrorKind::kInvalidArgument, "segment_matching: fps must be > 0");
  SegmentMetrics m;
  if (preds.empty() || gts.empty()) return m;
  Eigen::MatrixXd cost(preds.size(), gts.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < gts.size(); ++j) cost(i, j) = -interval_iou(preds[i], gts[j]);
  }
  const Assignment a = hungarian(cost);
  double on = 0.0, off = 0.0, iou = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int j = a.row_to_col[i];
    if (j < 0) continue;
    const double v = -cost(static_cast<Eigen::Index>(i), j);
    if (v < gate) continue;
    m.matches.push_back({static_cast<int>(i), j, v});
    iou += v;
    on += std::abs(preds[i].t_start - gts[j].t_start) / fps;
    off += std::abs(preds[i].t_end - gts[j].t_end) / fps;
  }
  const double tp = static_cast<double>(m.matches.size());
  m.precision = tp / static_cast<double>(preds.size());
  m.recall = tp / static_cast<double>(gts.size());
  if (!m.matches.empty()) {
    m.mean_iou = iou / tp;
    m.onset_error_s = on / tp;
    m.offset_error_s = off / tp;
  }
  return m;
}

inline constexpr std::array<double, 3> kRecallThresholds = {0.25, 0.50, 0.75};

struct PartMetrics {
  double mean_iou = 0.0;  // over ground-truth parts, unmatched count as 0
  std::array<double, 3> recall{};  // at kRecallThresholds
};

inline PartMetrics part_segmentation_metrics(std::span<const Aabb> preds,
                                             std::span<const Aabb> gts) {
  PartMetrics m;
  if (gts.empty() || preds.empty()) return m;
  Eigen::MatrixXd cost(gts.size(), preds.size());
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (std::size_t p = 0; p < preds.size(); ++p) cost(g, p) = -aabb_iou(gts[g], preds[p]);
  }
  const Assignment a = hungarian(cost);
  double sum = 0.0;
  std::array<int, 3> hits{};
  for (std::size_t g = 0; g < gts.size(); ++g) {
    const int p = a.row_to_col[g];
    const double v = p < 0 ? 0.0 : -cost(static_cast<Eigen::Index>(g), p);
    sum += v;
    for (std::size_t k = 0; k < kRecallThresholds.size(); ++k) hits[k] += v >= kRecallThresholds[k];
  }
  m.mean_iou = sum / static_cast<double>(gts.size());
  for (std::size_t k = 0; k < hits.size(); ++k) {
    m.recall[k] = static_cast<double>(hits[k]) / static_cast<double>(gts.size());
  }
  return m;
}

using VoxelKey = std::tuple<long, long, long>;

inline std::set<VoxelKey> voxelize(std::span<const Vec3> points, double voxel = 0.015) {
  std::set<VoxelKey> out;
  for (const auto& p : points) {
    out.emplace(static_cast<long>(std::floor(p.x() / voxel)),
                static_cast<long>(std::floor(p.y() / voxel)),
                static_cast<long>(std::floor(p.z() / voxel)));
  }
  return out;
}

inline double voxel_iou(std::span<const Vec3> a, std::span<const Vec3> b, double voxel = 0.015) {
  const auto va = voxelize(a, voxel);
  const auto vb = voxelize(b, voxel);
  std::size_t inter = 0;
  for (const auto& k : va) inter += vb.count(k);
  const std::size_t uni = va.size() + vb.size() - inter;
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

struct ChildInstance {
  std::vector<Vec3> points;
  ChildRelation relation = ChildRelation::kStatic;
};

struct ChildMetrics {
  double mean_iou = 0.0;           // mean over predictions of their best IoU
  double recall_25 = 0.0;          // ground-truth children whose best IoU >= 0.25
  double relation_accuracy = 0.0;  // over predictions with a positive-IoU match
};

inline ChildMetrics child_metrics(std::span<const ChildInstance> preds,
                                  std::span<const ChildInstance> gts, double voxel = 0.015) {
  ChildMetrics m;
  if (preds.empty() || gts.empty()) return m;
  std::vector<double> gt_best(gts.size(), 0.0);
  double sum = 0.0;
  int matched = 0, correct = 0;
  for (const auto& p : preds) {
    double best = 0.0;
    int arg = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double v = voxel_iou(p.points, gts[g].points, voxel);
      gt_best[g] = std::max(gt_best[g], v);
      if (v > best) {
        best = v;
        arg = static_cast<int>(g);
      }
    }
    sum += best;
    if (arg >= 0) {
      ++matched;
      correct += p.relation == gts[arg].relation;
    }
  }
  m.mean_iou = sum / static_cast<double>(preds.size());
  m.recall_25 = static_cast<double>(std::count_if(gt_best.begin(), gt_best.end(),
                                                  [](double v) { return v >= 0.25; })) /
                static_cast<double>(gts.size());
  m.relation_accuracy = matched ? static_cast<double>(correct) / matched : 0.0;
  return m;
}

}  // namespace artiscene
