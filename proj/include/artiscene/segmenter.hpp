// artiscene - articulated 3D scene graphs from point trajectories
//
// Interaction segmentation: depth warping and disparity, agent-mask ratios,
// probabilistic fusion of both cues and parsing of temporal segments.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "artiscene/camera.hpp"
#include "artiscene/errors.hpp"
#include "artiscene/parallel.hpp"
#include "artiscene/se3.hpp"

namespace artiscene {

struct DepthFrame {
  int t = 0;
  DepthImage depth;
  RigidTransform pose;  // world-from-camera
};

struct AgentMaskFrame {
  int t = 0;
  Mask mask;
};

/// P(s | d, h) for the four combinations of dynamic-scene d and agent h.
struct FusionTable {
  double p_tt = 0.95;
  double p_tf = 0.45;
  double p_ft = 0.45;
  double p_ff = 0.02;

  [[nodiscard]] bool is_valid() const {
    auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
    return in01(p_tt) && in01(p_tf) && in01(p_ft) && in01(p_ff);
  }
};

/// Half-open frame interval [t_start, t_end).
struct InteractionSegment {
  int t_start = 0;
  int t_end = 0;

  [[nodiscard]] int length() const { return t_end - t_start; }
  bool operator==(const InteractionSegment&) const = default;
};

/// Forward-warps `prev` into the view at `cur_pose` with nearest-pixel
/// splatting and a z-buffer. Unhit pixels whose left/right or up/down
/// neighbors were both hit at depths within `fill_tolerance` are filled
/// with the mean of that pair; everything else unhit stays invalid (0).
inline DepthImage warp_depth(const DepthFrame& prev, const RigidTransform& cur_pose,
                             const CameraIntrinsics& k, double fill_tolerance = 0.05) {
  validate(k);
  check_dims(prev.depth, k);
  const int w = k.width;
  const int h = k.height;
  const RigidTransform cur_from_prev = cur_pose.inverse() * prev.pose;
  DepthImage zbuf(w, h, std::numeric_limits<double>::infinity());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!prev.depth.valid(r, c)) continue;
      const Vec3 pc = cur_from_prev.apply(k.back_project(c, r, prev.depth.at(r, c)));
      if (!(pc.z() > 0.0)) continue;
      const double u = k.fx * pc.x() / pc.z() + k.cx;
      const double v = k.fy * pc.y() / pc.z() + k.cy;
      if (!inside_image(k, u, v)) continue;
      const int col = static_cast<int>(std::lround(u));
      const int row = static_cast<int>(std::lround(v));
      if (col < 0 || col >= w || row < 0 || row >= h) continue;
      double& z = zbuf.at(row, col);
      if (pc.z() < z) z = pc.z();
    }
  }
  DepthImage out(w, h, 0.0);
  auto hit = [&](int r, int c) { return std::isfinite(zbuf.at(r, c)); };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (hit(r, c)) {
        out.at(r, c) = zbuf.at(r, c);
        continue;
      }
      double best_gap = std::numeric_limits<double>::infinity();
      double fill = 0.0;
      if (c > 0 && c + 1 < w && hit(r, c - 1) && hit(r, c + 1)) {
        const double a = zbuf.at(r, c - 1), b = zbuf.at(r, c + 1);
        if (std::abs(a - b) < best_gap) { best_gap = std::abs(a - b); fill = 0.5 * (a + b); }
      }
      if (r > 0 && r + 1 < h && hit(r - 1, c) && hit(r + 1, c)) {
        const double a = zbuf.at(r - 1, c), b = zbuf.at(r + 1, c);
        if (std::abs(a - b) < best_gap) { best_gap = std::abs(a - b); fill = 0.5 * (a + b); }
      }
      if (best_gap <= fill_tolerance) out.at(r, c) = fill;
    }
  }
  return out;
}

struct DisparityResult {
  DepthImage delta;  // |cur - warped| on compared pixels, NaN elsewhere
  double ratio = 0.0;  // raw fraction of compared pixels with delta > tau
  std::size_t compared = 0;
  std::size_t moved = 0;
  bool low_coverage = false;  // no jointly valid pixel
};

/// Depth disparity between the current depth and a warped earlier depth.
/// With `edge_guard`, pixels whose 3x3 neighborhood in the warped map holds
/// an invalid pixel, leaves the image or spans more than `tau` are not
/// compared: nearest-pixel splatting is only reliable away from depth
/// discontinuities. Pixels set in `exclude` (agent pixels) are never compared.
inline DisparityResult depth_disparity(const DepthImage& cur, const DepthImage& warped,
                                       double tau, const Mask* exclude = nullptr,
                                       bool edge_guard = true) {
  if (!(tau > 0.0)) fail(ErrorKind::kInvalidArgument, "depth_disparity: tau must be positive");
  if (cur.width != warped.width || cur.height != warped.height) {
    fail(ErrorKind::kShape, "depth_disparity: depth maps differ in size");
  }
  if (exclude && (exclude->width != cur.width || exclude->height != cur.height)) {
    fail(ErrorKind::kShape, "depth_disparity: exclusion mask differs in size");
  }
  const int w = cur.width;
  const int h = cur.height;
  DisparityResult res;
  res.delta = DepthImage(w, h, std::numeric_limits<double>::quiet_NaN());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!cur.valid(r, c) || !warped.valid(r, c)) continue;
      if (exclude && exclude->at(r, c)) continue;
      if (edge_guard) {
        double lo = warped.at(r, c), hi = lo;
        bool reliable = true;
        for (int dr = -1; dr <= 1 && reliable; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = r + dr, cc = c + dc;
            if (rr < 0 || rr >= h || cc < 0 || cc >= w || !warped.valid(rr, cc)) {
              reliable = false;
              break;
            }
            lo = std::min(lo, warped.at(rr, cc));
            hi = std::max(hi, warped.at(rr, cc));
          }
        }
        if (!reliable || hi - lo > tau) continue;
      }
      const double d = std::abs(cur.at(r, c) - warped.at(r, c));
      res.delta.at(r, c) = d;
      ++res.compared;
      if (d > tau) ++res.moved;
    }
  }
  res.low_coverage = res.compared == 0;
  res.ratio = res.compared ? static_cast<double>(res.moved) / res.compared : 0.0;
  return res;
}

/// Raw fraction of agent pixels.
inline double agent_ratio(const AgentMaskFrame& mask) {
  if (mask.mask.size() == 0) return 0.0;
  return static_cast<double>(mask.mask.count()) / static_cast<double>(mask.mask.size());
}

/// Linear-interpolated quantile, q in [0, 1].
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - lo) * (values[hi] - values[lo]);
}

/// Divides by the per-sequence `q`-quantile (at least `floor`) and clamps
/// into [0, 1].
inline std::vector<double> normalize_series(std::span<const double> raw, double q,
                                            double floor) {
  const double scale = std::max(quantile({raw.begin(), raw.end()}, q), floor);
  std::vector<double> out(raw.size(), 0.0);
  if (!(scale > 0.0)) return out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = std::clamp(raw[i] / scale, 0.0, 1.0);
  }
  return out;
}

/// Sliding median with edge replication.
inline std::vector<double> median_filter(std::span<const double> series, int kappa) {
  if (kappa < 1 || kappa % 2 == 0) {
    fail(ErrorKind::kInvalidArgument, "median_filter: window must be odd and >= 1");
  }
  const int n = static_cast<int>(series.size());
  const int half = kappa / 2;
  std::vector<double> out(series.size());
  std::vector<double> window(static_cast<std::size_t>(kappa));
  for (int i = 0; i < n; ++i) {
    for (int j = -half; j <= half; ++j) {
      window[j + half] = series[std::clamp(i + j, 0, n - 1)];
    }
    std::nth_element(window.begin(), window.begin() + half, window.end());
    out[i] = window[half];
  }
  return out;
}

/// P(s) = sum over (d, h) of P(s | d, h) P(d) P(h).
inline double fuse(double h, double delta, const FusionTable& table) {
  auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in01(h) || !in01(delta)) {
    fail(ErrorKind::kInvalidArgument, "fuse: h and delta must lie in [0, 1]");
  }
  if (!table.is_valid()) fail(ErrorKind::kInvalidArgument, "fuse: fusion table entries must lie in [0, 1]");
  return table.p_tt * delta * h + table.p_tf * delta * (1.0 - h) +
         table.p_ft * (1.0 - delta) * h + table.p_ff * (1.0 - delta) * (1.0 - h);
}

/// Maximal runs with prob >= threshold whose length lies in [t_min, t_max].
/// Runs outside the length gates are dropped, never split.
inline std::vector<InteractionSegment> parse_segments(std::span<const double> prob,
                                                      double threshold, int t_min,
                                                      int t_max) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    fail(ErrorKind::kInvalidArgument, "parse_segments: threshold must lie in (0, 1)");
  }
  if (t_min > t_max) fail(ErrorKind::kInvalidArgument, "parse_segments: t_min > t_max");
  std::vector<InteractionSegment> out;
  const int n = static_cast<int>(prob.size());
  int i = 0;
  while (i < n) {
    if (!(prob[i] >= threshold)) {
      ++i;
      continue;
    }
    int j = i;
    while (j < n && prob[j] >= threshold) ++j;
    const int len = j - i;
    if (len >= t_min && len <= t_max) out.push_back({i, j});
    i = j;
  }
  return out;
}

struct SegmenterConfig {
  int stride = 6;  // s_H
  double tau = 0.05;
  int kappa = 11;
  FusionTable table;
  double threshold = 0.5;
  int t_min = 10;
  int t_max = 600;
  double quantile = 0.99;
  double delta_floor = 0.002;
  double h_floor = 0.002;
  /// Attribute the disparity of (t - stride, t] to its midpoint frame.
  bool center_disparity = true;
};

struct FrameScore {
  int t = 0;
  double h = 0.0;
  double delta = 0.0;
  double p = 0.0;
};

struct SegmentationResult {
  std::vector<FrameScore> scores;
  std::vector<InteractionSegment> segments;
  std::vector<double> raw_h;
  std::vector<double> raw_delta;
  std::vector<int> low_coverage_frames;
};

inline SegmentationResult segment_interactions(std::span<const DepthFrame> frames,
                                               std::span<const AgentMaskFrame> masks,
                                               const CameraIntrinsics& k,
                                               const SegmenterConfig& cfg) {
  if (frames.size() != masks.size()) {
    fail(ErrorKind::kShape, "segment_interactions: depth and mask streams differ in length");
  }
  if (cfg.stride < 1) fail(ErrorKind::kInvalidArgument, "segment_interactions: stride must be >= 1");
  const std::size_t n = frames.size();
  SegmentationResult res;
  res.raw_h.assign(n, 0.0);
  res.raw_delta.assign(n, 0.0);
  std::vector<char> low(n, 0);
  parallel_for(n, [&](std::size_t t) {
    const Mask& m = masks[t].mask;
    if (m.width != k.width || m.height != k.height) {
      fail(ErrorKind::kShape, "agent mask dimensions do not match the intrinsics");
    }
    res.raw_h[t] = agent_ratio(masks[t]);
    const std::size_t prev = t >= static_cast<std::size_t>(cfg.stride) ? t - cfg.stride : 0;
    if (prev == t) return;
    const DepthImage warped = warp_depth(frames[prev], frames[t].pose, k, cfg.tau);
    const DisparityResult d = depth_disparity(frames[t].depth, warped, cfg.tau, &m);
    res.raw_delta[t] = d.ratio;
    low[t] = d.low_coverage ? 1 : 0;
  });
  for (std::size_t t = 0; t < n; ++t) {
    if (low[t]) res.low_coverage_frames.push_back(static_cast<int>(t));
  }

  std::vector<double> delta_src = res.raw_delta;
  if (cfg.center_disparity && n > 0) {
    const std::size_t shift = static_cast<std::size_t>(cfg.stride / 2);
    for (std::size_t t = 0; t < n; ++t) delta_src[t] = res.raw_delta[std::min(t + shift, n - 1)];
  }
  const auto h_norm = median_filter(normalize_series(res.raw_h, cfg.quantile, cfg.h_floor), cfg.kappa);
  const auto d_norm = median_filter(normalize_series(delta_src, cfg.quantile, cfg.delta_floor), cfg.kappa);
  std::vector<double> prob(n);
  res.scores.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    prob[t] = fuse(h_norm[t], d_norm[t], cfg.table);
    res.scores[t] = {frames[t].t, h_norm[t], d_norm[t], prob[t]};
  }
  res.segments = parse_segments(prob, cfg.threshold, cfg.t_min, cfg.t_max);
  return res;
}

}  // namespace artiscene
