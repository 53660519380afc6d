// artiscene - articulated 3D scene graphs from point trajectories
//
// Point-track processing: lifting 2D tracks into world coordinates,
// static/dynamic labeling with a jump filter, DBSCAN trajectory clustering
// and run-wise smoothing.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "artiscene/camera.hpp"
#include "artiscene/errors.hpp"
#include "artiscene/parallel.hpp"
#include "artiscene/segmenter.hpp"

namespace artiscene {

/// T x F pixel tracks, stored frame-major (index t * F + f).
struct PointTracks2D {
  int frames = 0;
  int tracks = 0;
  std::vector<Vec2> positions;
  std::vector<std::uint8_t> visibility;

  PointTracks2D() = default;
  PointTracks2D(int t, int f)
      : frames(t), tracks(f),
        positions(static_cast<std::size_t>(t) * f, Vec2::Zero()),
        visibility(static_cast<std::size_t>(t) * f, 0) {}

  [[nodiscard]] std::size_t index(int t, int f) const {
    return static_cast<std::size_t>(t) * tracks + f;
  }
  [[nodiscard]] bool visible(int t, int f) const { return visibility[index(t, f)] != 0; }
  [[nodiscard]] const Vec2& at(int t, int f) const { return positions[index(t, f)]; }
};

/// T x F world-frame tracks; visible means observed with valid depth.
struct PointTracks3D {
  int frames = 0;
  int tracks = 0;
  std::vector<Vec3> positions;
  std::vector<std::uint8_t> visibility;

  PointTracks3D() = default;
  PointTracks3D(int t, int f)
      : frames(t), tracks(f),
        positions(static_cast<std::size_t>(t) * f, Vec3::Zero()),
        visibility(static_cast<std::size_t>(t) * f, 0) {}

  [[nodiscard]] std::size_t index(int t, int f) const {
    return static_cast<std::size_t>(t) * tracks + f;
  }
  [[nodiscard]] bool visible(int t, int f) const { return visibility[index(t, f)] != 0; }
  [[nodiscard]] const Vec3& at(int t, int f) const { return positions[index(t, f)]; }
  Vec3& at(int t, int f) { return positions[index(t, f)]; }

  [[nodiscard]] int visible_count(int f) const {
    int n = 0;
    for (int t = 0; t < frames; ++t) n += visible(t, f);
    return n;
  }

  /// Copy restricted to the given track indices, in that order.
  [[nodiscard]] PointTracks3D select(std::span<const int> ids) const {
    PointTracks3D out(frames, static_cast<int>(ids.size()));
    for (int t = 0; t < frames; ++t) {
      for (std::size_t j = 0; j < ids.size(); ++j) {
        out.positions[out.index(t, static_cast<int>(j))] = at(t, ids[j]);
        out.visibility[out.index(t, static_cast<int>(j))] = visibility[index(t, ids[j])];
      }
    }
    return out;
  }
};

enum class TrackLabel : std::uint8_t { kStatic, kDynamic, kRejected };

inline std::string to_string(TrackLabel l) {
  switch (l) {
    case TrackLabel::kStatic: return "STATIC";
    case TrackLabel::kDynamic: return "DYNAMIC";
    case TrackLabel::kRejected: return "REJECTED";
  }
  return "STATIC";
}

inline TrackLabel track_label_from_string(const std::string& s) {
  if (s == "STATIC") return TrackLabel::kStatic;
  if (s == "DYNAMIC") return TrackLabel::kDynamic;
  if (s == "REJECTED") return TrackLabel::kRejected;
  fail(ErrorKind::kValidation, "unknown track label '" + s + "'");
}

struct TrackLabels {
  std::vector<TrackLabel> labels;
  std::vector<int> selected_cluster;
};

namespace detail {

// Depth at a sub-pixel location: bilinear interpolation of inverse depth when
// the four neighbors are valid and look like one surface, else the nearest
// pixel.
inline double sample_depth(const DepthImage& depth, double u, double v) {
  const int col = static_cast<int>(std::lround(u));
  const int row = static_cast<int>(std::lround(v));
  if (col < 0 || col >= depth.width || row < 0 || row >= depth.height) return 0.0;
  if (!depth.valid(row, col)) return 0.0;
  const int c0 = static_cast<int>(std::floor(u));
  const int r0 = static_cast<int>(std::floor(v));
  if (c0 >= 0 && r0 >= 0 && c0 + 1 < depth.width && r0 + 1 < depth.height &&
      depth.valid(r0, c0) && depth.valid(r0, c0 + 1) && depth.valid(r0 + 1, c0) &&
      depth.valid(r0 + 1, c0 + 1)) {
    const double d00 = depth.at(r0, c0), d01 = depth.at(r0, c0 + 1);
    const double d10 = depth.at(r0 + 1, c0), d11 = depth.at(r0 + 1, c0 + 1);
    const double lo = std::min({d00, d01, d10, d11});
    const double hi = std::max({d00, d01, d10, d11});
    // Inverse depth of a plane is affine in the pixel, so a sloped surface
    // passes the planarity check while a depth edge fails the spread check.
    const double twist = std::abs(1 / d00 - 1 / d01 - 1 / d10 + 1 / d11);
    if (hi - lo <= 0.05 * lo && twist <= 1e-3 / lo) {
      const double a = u - c0;
      const double b = v - r0;
      const double inv = (1 - a) * (1 - b) / d00 + a * (1 - b) / d01 +
                         (1 - a) * b / d10 + a * b / d11;
      return 1.0 / inv;
    }
  }
  return depth.at(row, col);
}

}  // namespace detail

/// Lifts pixel tracks to world points with the per-frame depth and pose.
inline PointTracks3D lift_tracks(const PointTracks2D& tracks,
                                 std::span<const DepthFrame> depths,
                                 const CameraIntrinsics& k) {
  validate(k);
  if (static_cast<std::size_t>(tracks.frames) != depths.size()) {
    fail(ErrorKind::kShape, "lift_tracks: " + std::to_string(tracks.frames) +
                                " track frames but " + std::to_string(depths.size()) +
                                " depth frames");
  }
  PointTracks3D out(tracks.frames, tracks.tracks);
  for (int t = 0; t < tracks.frames; ++t) {
    const DepthFrame& frame = depths[t];
    check_dims(frame.depth, k);
    for (int f = 0; f < tracks.tracks; ++f) {
      if (!tracks.visible(t, f)) continue;
      const Vec2& px = tracks.at(t, f);
      if (!px.allFinite() || !inside_image(k, px.x(), px.y())) continue;
      const double z = detail::sample_depth(frame.depth, px.x(), px.y());
      if (!(z > 0.0) || !std::isfinite(z)) continue;
      out.at(t, f) = frame.pose.apply(k.back_project(px.x(), px.y(), z));
      out.visibility[out.index(t, f)] = 1;
    }
  }
  return out;
}

/// REJECTED if any step between consecutive visible observations exceeds
/// `jump_thresh`; otherwise DYNAMIC when the largest excursion from the first
/// visible point reaches `motion_thresh`, else STATIC.
inline TrackLabels split_static_dynamic(const PointTracks3D& tracks, double motion_thresh = 0.10,
                                        double jump_thresh = 0.15) {
  TrackLabels out;
  out.labels.assign(static_cast<std::size_t>(tracks.tracks), TrackLabel::kStatic);
  for (int f = 0; f < tracks.tracks; ++f) {
    const Vec3* first = nullptr;
    const Vec3* last = nullptr;
    double excursion = 0.0;
    bool jumped = false;
    for (int t = 0; t < tracks.frames; ++t) {
      if (!tracks.visible(t, f)) continue;
      const Vec3& p = tracks.at(t, f);
      if (!first) first = &p;
      if (last && (p - *last).norm() > jump_thresh) jumped = true;
      excursion = std::max(excursion, (p - *first).norm());
      last = &p;
    }
    if (jumped) {
      out.labels[f] = TrackLabel::kRejected;
    } else if (excursion >= motion_thresh) {
      out.labels[f] = TrackLabel::kDynamic;
    }
  }
  return out;
}

/// Mean Euclidean distance over jointly visible frames; infinite when fewer
/// than `min_joint_fraction` of the frames are jointly visible.
inline double trajectory_distance(const PointTracks3D& tracks, int a, int b,
                                  double min_joint_fraction = 0.3) {
  double sum = 0.0;
  int joint = 0;
  for (int t = 0; t < tracks.frames; ++t) {
    if (!tracks.visible(t, a) || !tracks.visible(t, b)) continue;
    sum += (tracks.at(t, a) - tracks.at(t, b)).norm();
    ++joint;
  }
  if (joint == 0 || joint < min_joint_fraction * tracks.frames) {
    return std::numeric_limits<double>::infinity();
  }
  return sum / joint;
}

struct ClusterResult {
  std::vector<int> selected;    // member track indices, ascending
  std::vector<int> cluster_id;  // per input track; -1 for noise / not clustered
  int cluster_count = 0;
};

inline int visible_span(const PointTracks3D& tracks, int f) {
  int first = -1, last = -1;
  for (int t = 0; t < tracks.frames; ++t) {
    if (!tracks.visible(t, f)) continue;
    if (first < 0) first = t;
    last = t;
  }
  return first < 0 ? 0 : last - first + 1;
}

/// DBSCAN over the tracks listed in `candidates`, scanned in the given order.
/// Returns the cluster whose members have the greatest median visible
/// duration; ties go to the larger cluster, then to the lowest track index.
inline ClusterResult cluster_tracks(const PointTracks3D& tracks, std::span<const int> candidates,
                                    double eps = 0.25, int min_pts = 5,
                                    double min_joint_fraction = 0.3) {
  const int n = static_cast<int>(candidates.size());
  if (n < min_pts || n == 0) {
    fail(ErrorKind::kEmptyCluster, "cluster_tracks: " + std::to_string(n) +
                                       " dynamic tracks, need at least " +
                                       std::to_string(min_pts));
  }
  std::vector<double> dist(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = trajectory_distance(tracks, candidates[i], candidates[j], min_joint_fraction);
      dist[static_cast<std::size_t>(i) * n + j] = d;
      dist[static_cast<std::size_t>(j) * n + i] = d;
    }
  }
  auto neighbors = [&](int i) {
    std::vector<int> out;
    for (int j = 0; j < n; ++j) {
      if (dist[static_cast<std::size_t>(i) * n + j] <= eps) out.push_back(j);
    }
    return out;
  };

  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(static_cast<std::size_t>(n), kUnvisited);
  int clusters = 0;
  for (int i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    auto nb = neighbors(i);
    if (static_cast<int>(nb.size()) < min_pts) {
      label[i] = kNoise;
      continue;
    }
    const int id = clusters++;
    label[i] = id;
    std::deque<int> queue(nb.begin(), nb.end());
    while (!queue.empty()) {
      const int j = queue.front();
      queue.pop_front();
      if (label[j] == kNoise) label[j] = id;
      if (label[j] != kUnvisited) continue;
      label[j] = id;
      auto nb2 = neighbors(j);
      if (static_cast<int>(nb2.size()) >= min_pts) {
        for (int q : nb2) queue.push_back(q);
      }
    }
  }
  if (clusters == 0) fail(ErrorKind::kEmptyCluster, "cluster_tracks: all tracks are noise");

  ClusterResult res;
  res.cluster_count = clusters;
  res.cluster_id.assign(static_cast<std::size_t>(tracks.tracks), -1);
  int best = -1;
  double best_median = -1.0;
  std::size_t best_size = 0;
  int best_min_index = std::numeric_limits<int>::max();
  for (int c = 0; c < clusters; ++c) {
    std::vector<double> durations;
    int min_index = std::numeric_limits<int>::max();
    for (int i = 0; i < n; ++i) {
      if (label[i] != c) continue;
      durations.push_back(visible_span(tracks, candidates[i]));
      min_index = std::min(min_index, candidates[i]);
    }
    const double med = quantile(durations, 0.5);
    const bool better =
        med > best_median ||
        (med == best_median && (durations.size() > best_size ||
                                (durations.size() == best_size && min_index < best_min_index)));
    if (better) {
      best = c;
      best_median = med;
      best_size = durations.size();
      best_min_index = min_index;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (label[i] >= 0) res.cluster_id[candidates[i]] = label[i];
    if (label[i] == best) res.selected.push_back(candidates[i]);
  }
  std::sort(res.selected.begin(), res.selected.end());
  return res;
}

/// Centered moving average within each visible run. The window shrinks
/// symmetrically toward run ends, so endpoints keep their values and affine
/// motion is reproduced exactly. Runs shorter than `window` are untouched.
inline PointTracks3D smooth_tracks(const PointTracks3D& tracks, int window = 5) {
  if (window < 1 || window % 2 == 0) {
    fail(ErrorKind::kInvalidArgument, "smooth_tracks: window must be odd and >= 1");
  }
  PointTracks3D out = tracks;
  const int half = window / 2;
  for (int f = 0; f < tracks.tracks; ++f) {
    int t = 0;
    while (t < tracks.frames) {
      if (!tracks.visible(t, f)) {
        ++t;
        continue;
      }
      int end = t;
      while (end < tracks.frames && tracks.visible(end, f)) ++end;
      if (end - t >= window) {
        for (int i = t; i < end; ++i) {
          const int h = std::min({half, i - t, end - 1 - i});
          Vec3 acc = Vec3::Zero();
          for (int j = i - h; j <= i + h; ++j) acc += tracks.at(j, f);
          out.at(i, f) = acc / static_cast<double>(2 * h + 1);
        }
      }
      t = end;
    }
  }
  return out;
}

}  // namespace artiscene
